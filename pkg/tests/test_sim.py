import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from resetpid.lti import StateSpaceModel, second_order_plant
from resetpid.reset import ResetController, clegg, gfore
from resetpid.sim import (
    NotSettled,
    SimConfig,
    SimulationDiverged,
    discretize,
    first_harmonic,
    simulate_closed_loop,
    uniform_noise,
)
from resetpid.describing import df
from resetpid.lti import freq_response


def lag_controller(p, gamma, kp):
    lin = StateSpaceModel([[-3 * p]], [[3 * p]], [[1.0]], [[0.0]])
    return ResetController(gfore(p, gamma), lin, kp)


def test_discretize_integrator():
    Ad, Bd = discretize(StateSpaceModel([[0.0]], [[1.0]], [[1.0]], [[0.0]]), 0.01)
    assert Ad[0, 0] == pytest.approx(1.0, abs=1e-15)
    assert Bd[0, 0] == pytest.approx(0.01, rel=1e-14)


def test_discretize_diagonal():
    a = np.array([-1.0, -7.0, 0.5])
    Ad, _ = discretize(StateSpaceModel(np.diag(a), np.ones((3, 1)), np.ones((1, 3)), [[0.0]]), 0.1)
    assert np.allclose(Ad, np.diag(np.exp(a * 0.1)), rtol=1e-13, atol=0)


def test_discretize_plant_poles():
    P, _ = second_order_plant()
    dt = 5e-5
    Ad, _ = discretize(P, dt)
    got = np.sort_complex(np.linalg.eigvals(Ad))
    ref = np.sort_complex(np.exp(np.linalg.eigvals(P.A) * dt))
    assert np.allclose(got, ref, rtol=1e-12)


def test_discretize_rejects_bad_dt():
    with pytest.raises(ValueError):
        discretize(StateSpaceModel([[0.0]], [[1.0]], [[1.0]], [[0.0]]), 0.0)


def test_config_checks():
    with pytest.raises(ValueError):
        SimConfig(dt=-1)
    with pytest.raises(ValueError):
        SimConfig(dt=0.1, duration=0.01)


def test_zero_in_zero_out(controllers, plant):
    tr = simulate_closed_loop(plant, controllers["A"], config=SimConfig(duration=0.05))
    for s in (tr.e, tr.u, tr.y):
        assert not np.any(s)
    assert tr.to_csv().splitlines()[0] == "t,r,e,u,y"
    assert len(tr.to_csv().splitlines()) == tr.time.size + 1


@given(
    st.floats(5, 500),
    st.floats(0.5, 3),
    st.integers(0, 2**31 - 1),
)
def test_gamma_one_is_linear(p, kp, seed):
    plant, _ = second_order_plant()
    c = lag_controller(p, 1.0, kp)
    rng = np.random.default_rng(seed)
    cfg = SimConfig(dt=1e-3, duration=0.3)
    r = rng.standard_normal(cfg.n_samples)
    a = simulate_closed_loop(plant, c, r, config=cfg)
    b = simulate_closed_loop(plant, c, r, config=cfg, resets=False)
    assert np.array_equal(a.y, b.y) and np.array_equal(a.u, b.u)


def naive_linear(plant, ctrl, r, dt):
    """Separate controller and plant recursions, ZOH from scipy."""
    def zoh(s):
        n, m = s.n_states, s.n_inputs
        M = np.zeros((n + m, n + m))
        M[:n, :n], M[:n, n:] = s.A, s.B
        E = scipy.linalg.expm(M * dt)
        return E[:n, :n], E[:n, n:]

    comp = ctrl.composite()
    Ac, Bc = zoh(comp)
    Ap, Bp = zoh(plant)
    xc = np.zeros(comp.n_states)
    xp = np.zeros(plant.n_states)
    y = np.empty(r.size)
    for k in range(r.size):
        y[k] = (plant.C @ xp)[0]
        e = r[k] - y[k]
        u = (comp.C @ xc)[0] + comp.D[0, 0] * e
        xc = Ac @ xc + Bc[:, 0] * e
        xp = Ap @ xp + Bp[:, 0] * u
    return y


def test_linear_against_naive_recursion(controllers, plant):
    cfg = SimConfig(duration=0.1)
    r = np.sin(2 * math.pi * 30 * cfg.time) * 1e-7
    tr = simulate_closed_loop(plant, controllers["PID"], r, config=cfg)
    ref = naive_linear(plant, controllers["PID"], r, cfg.dt)
    assert np.allclose(tr.y, ref, rtol=1e-8, atol=1e-9 * np.abs(ref).max())


def test_resets_fire_on_sign_change(controllers, plant):
    cfg = SimConfig(duration=0.2)
    r = 1e-7 * np.sin(2 * math.pi * 20 * cfg.time)
    tr = simulate_closed_loop(plant, controllers["A"], r, config=cfg)
    e = tr.e
    crossing = np.zeros_like(tr.resets)
    crossing[1:] = (e[1:] * e[:-1] < 0) | (e[1:] == 0)
    assert np.array_equal(tr.resets, crossing)
    assert tr.resets.sum() > 0
    # state right after a jump is gamma times the propagated value
    k = int(np.argmax(tr.resets))
    assert np.all(tr.resets[:k] == 0)


@given(st.floats(0, 1), st.floats(-1e3, 1e3))
def test_reset_never_grows_for_nonnegative_gamma(g, x):
    from resetpid.reset import apply_reset

    assert abs(apply_reset([x], gfore(1.0, g))[0]) <= abs(x)


def test_divergence_detected(controllers, plant):
    c = controllers["PID"].with_kp(controllers["PID"].kp * 300)
    with pytest.raises(SimulationDiverged):
        simulate_closed_loop(plant, c, np.ones(20000) * 1e-6, config=SimConfig(duration=1.0))


def test_series_length_checked(controllers, plant):
    with pytest.raises(ValueError):
        simulate_closed_loop(plant, controllers["PID"], np.zeros(5), config=SimConfig(duration=0.01))


def test_noise_seeded():
    a = uniform_noise(1000, 5e-8, seed=3)
    assert np.array_equal(a, uniform_noise(1000, 5e-8, seed=3))
    assert np.abs(a).max() <= 5e-8


def test_quantized_measurement(controllers, plant):
    cfg = SimConfig(duration=0.05, quantization=1e-8)
    r = np.full(cfg.n_samples, 3.3e-8)
    tr = simulate_closed_loop(plant, controllers["PID"], r, config=cfg)
    meas = tr.r - tr.e
    assert np.allclose(meas / 1e-8, np.round(meas / 1e-8), atol=1e-6)


def test_first_harmonic_linear():
    el = gfore(2 * math.pi * 100, 1.0)
    for w in (2 * math.pi * 30, 2 * math.pi * 300):
        assert first_harmonic(el, w) == pytest.approx(freq_response(el.base, w), rel=5e-3)


def test_first_harmonic_clegg():
    w = 3.0
    g = first_harmonic(clegg(0.0), w)
    assert abs(g) * w == pytest.approx(1.6188, rel=1e-3)
    assert math.degrees(np.angle(g)) == pytest.approx(-38.15, abs=0.1)


def test_first_harmonic_gfore_high_frequency():
    el = gfore(1.0, 0.0)
    sim, pred = first_harmonic(el, 10.0), df(el, 10.0)
    assert abs(sim) == pytest.approx(abs(pred), rel=0.02)
    assert abs(math.degrees(np.angle(sim / pred))) < 2


def test_first_harmonic_needs_cycles():
    with pytest.raises(ValueError):
        first_harmonic(gfore(1.0), 1.0, cycles=5)


def test_first_harmonic_drift_rejected():
    # unstable base: the response grows cycle to cycle
    el = gfore(1.0, 1.0)
    unstable = type(el)(StateSpaceModel([[0.5]], [[1.0]], [[1.0]], [[0.0]]), 1.0)
    with pytest.raises(NotSettled):
        first_harmonic(unstable, 1.0)
