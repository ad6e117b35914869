import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from resetpid.describing import bisect, cutoff_ratio_beta, df, df_curve, theta_d
from resetpid.lti import freq_response
from resetpid.reset import clegg, gfore
from resetpid.sim import first_harmonic

# Clegg integrator, full reset: first harmonic of the sawtooth-like response is
# 4/(pi w) - j/w. Closed form, obtained by integrating one half period by hand.
CLEGG_MAG = math.hypot(4 / math.pi, 1.0)  # 1.6189...
CLEGG_PHASE = -math.degrees(math.atan(math.pi / 4))  # -38.146...


@given(st.floats(0.01, 1e4))
def test_linear_when_gamma_one(w):
    el = gfore(37.0, 1.0)
    assert df(el, w) == freq_response(el.base, w)


@given(st.floats(0.01, 1e4))
def test_clegg_closed_form(w):
    g = df(clegg(0.0), w)
    assert g == pytest.approx(complex(4 / (math.pi * w), -1 / w), rel=1e-10)


@given(st.floats(-0.99, 0.99), st.floats(0.1, 100))
def test_clegg_theta(gamma, w):
    # first-order integrator: Theta_D reduces to (4/pi)(1 - gamma)/(1 + gamma)
    th = theta_d(clegg(gamma), w)[0, 0]
    assert th == pytest.approx(4 / math.pi * (1 - gamma) / (1 + gamma), rel=1e-9)


def test_clegg_constants():
    g = df(clegg(0.0), 1.0)
    assert abs(g) == pytest.approx(CLEGG_MAG, rel=1e-12)
    assert math.degrees(np.angle(g)) == pytest.approx(CLEGG_PHASE, abs=1e-9)


@pytest.mark.parametrize("gamma", [-0.5, 0.0, 0.5])
@pytest.mark.parametrize("ratio", [0.3, 3.0, 10.0])
def test_against_time_domain(gamma, ratio):
    el = gfore(2 * math.pi * 100, gamma)
    w = ratio * 2 * math.pi * 100
    sim = first_harmonic(el, w)
    assert abs(df(el, w)) == pytest.approx(abs(sim), rel=0.02)
    assert abs(math.degrees(np.angle(df(el, w) / sim))) < 2.0


def test_phase_decreases_with_gamma():
    ph = [np.angle(df(gfore(1.0, g), 10.0)) for g in np.linspace(-1, 1, 9)]
    assert np.all(np.diff(ph) < 0)


@pytest.mark.parametrize("gamma", [0.0, 0.25, 0.5, 0.75])
def test_magnitude_close_to_lag_for_nonnegative_gamma(gamma):
    el = gfore(1.0, gamma)
    w = np.logspace(-2, 2, 41)
    ratio = np.abs(df_curve(el, w).values) / np.abs([freq_response(el.base, x) for x in w])
    assert ratio.max() < 1.7 and ratio.min() > 1 / 1.7


def test_low_frequency_tends_to_base():
    el = gfore(1.0, -0.5)
    assert df(el, 1e-3) == pytest.approx(freq_response(el.base, 1e-3), rel=1e-3)


def test_beta_values():
    assert cutoff_ratio_beta(1.0) == 1.0
    assert cutoff_ratio_beta(0.0) == pytest.approx(1.13613, rel=1e-5)
    with pytest.raises(ValueError):
        cutoff_ratio_beta(1.2)


def test_beta_undefined_at_full_negative_reset():
    # the magnitude stays above -3 dB on the whole search range
    with pytest.raises(ValueError):
        cutoff_ratio_beta(-1.0)


def test_bisect_bracket():
    assert bisect(lambda x: x - 2.0, 1.0, 8.0, rtol=1e-12) == pytest.approx(2.0, rel=1e-11)
    with pytest.raises(ValueError):
        bisect(lambda x: x + 1.0, 1.0, 2.0)


def test_theta_rejects_nonpositive_omega():
    with pytest.raises(ValueError):
        theta_d(gfore(1.0), 0.0)
