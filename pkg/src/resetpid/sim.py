"""Sampled-data simulation of reset control loops and the open-element
sinusoid runner used to measure describing functions empirically."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .lti import StateSpaceModel, matrix_exp
from .reset import ResetController, ResetElement

__all__ = [
    "SimConfig",
    "SimTrace",
    "SimulationDiverged",
    "NotSettled",
    "discretize",
    "simulate_closed_loop",
    "first_harmonic",
    "uniform_noise",
]

DEFAULT_DT = 1 / 20000


class SimulationDiverged(FloatingPointError):
    pass


class NotSettled(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    dt: float = DEFAULT_DT
    duration: float = 1.0
    seed: int = 0
    quantization: float | None = None  # sensor resolution applied to the measured output

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.duration >= self.dt:
            raise ValueError("duration must cover at least one sample")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def time(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt


def uniform_noise(n: int, amplitude: float, seed: int = 0) -> np.ndarray:
    """White noise uniform on [-amplitude, amplitude]."""
    return amplitude * np.random.default_rng(seed).uniform(-1.0, 1.0, n)


@dataclass
class SimTrace:
    time: np.ndarray
    r: np.ndarray
    e: np.ndarray  # error seen by the controller, r - (y + n)
    u: np.ndarray  # plant input (feedback + feedforward)
    y: np.ndarray  # true plant output
    n: np.ndarray  # injected measurement noise
    states: np.ndarray = field(repr=False)  # controller states, one row per sample
    resets: np.ndarray = field(repr=False)  # boolean, True where a jump fired

    def __post_init__(self):
        lengths = {len(a) for a in (self.time, self.r, self.e, self.u, self.y, self.n)}
        if len(lengths) != 1:
            raise ValueError("trace series differ in length")

    @property
    def tracking_error(self) -> np.ndarray:
        """True position error r - y (excludes the injected sensor noise)."""
        return self.r - self.y

    def to_csv(self, digits: int = 12) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "r", "e", "u", "y"])
        fmt = f"{{:.{digits}e}}"
        for row in zip(self.time, self.r, self.e, self.u, self.y):
            w.writerow([fmt.format(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {k: getattr(self, k).tolist() for k in ("time", "r", "e", "u", "y", "n")}
            | {"n_resets": int(self.resets.sum())},
            sort_keys=True,
        )


def discretize(sys: StateSpaceModel, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Zero-order-hold equivalent (A_d, B_d) from exp([[A, B], [0, 0]] dt)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    n, m = sys.n_states, sys.n_inputs
    M = np.zeros((n + m, n + m))
    M[:n, :n] = sys.A
    M[:n, n:] = sys.B
    E = matrix_exp(M * dt)
    return E[:n, :n], E[:n, n:]


def _series_or_zeros(x, n, name):
    if x is None:
        return np.zeros(n)
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"{name} has shape {x.shape}, expected ({n},)")
    return x


def simulate_closed_loop(
    plant: StateSpaceModel,
    controller: ResetController,
    reference=None,
    feedforward=None,
    config: SimConfig = SimConfig(),
    noise=None,
    x0_plant=None,
    resets: bool = True,
) -> SimTrace:
    """Simulate the sampled loop

        e[k] = r[k] - (y[k] + n[k]),  u[k] = C(x_c[k], e[k]) + ff[k]

    with ZOH-discretized controller and plant. When e changes sign between
    consecutive samples (or is exactly zero) the reset states are scaled by
    gamma before the sample's output and flow update. ``resets=False`` gives
    the jump-free linear loop through the identical arithmetic.
    """
    N = config.n_samples
    r = _series_or_zeros(reference, N, "reference")
    ff = _series_or_zeros(feedforward, N, "feedforward")
    nz = _series_or_zeros(noise, N, "noise")

    ctrl = controller.composite()
    nc, npl = ctrl.n_states, plant.n_states
    Acd, Bcd = discretize(ctrl, config.dt)
    Apd, Bpd = discretize(plant, config.dt)
    Cc, Dc = ctrl.C.ravel(), float(ctrl.D[0, 0])
    Cp = plant.C.ravel()
    if plant.D[0, 0] != 0:
        raise ValueError("plant must be strictly proper (no algebraic loop)")
    nr = controller.n_r
    gamma = controller.gamma if resets else 1.0
    q = config.quantization

    # one affine map for the stacked state z = [x_c; x_p]:
    # z+ = M z + b_e * e + b_u * ff
    M = np.zeros((nc + npl, nc + npl))
    M[:nc, :nc] = Acd
    M[nc:, :nc] = np.outer(Bpd.ravel(), Cc)
    M[nc:, nc:] = Apd
    b_e = np.concatenate([Bcd.ravel(), Bpd.ravel() * Dc])
    b_u = np.concatenate([np.zeros(nc), Bpd.ravel()])

    z = np.zeros(nc + npl)
    if x0_plant is not None:
        z[nc:] = np.asarray(x0_plant, dtype=float)

    e_out = np.empty(N)
    u_out = np.empty(N)
    y_out = np.empty(N)
    states = np.empty((N, nc))
    fired = np.zeros(N, dtype=bool)
    e_prev = 0.0
    for k in range(N):
        y = float(Cp @ z[nc:])
        meas = y + nz[k]
        if q:
            meas = q * round(meas / q)
        e = r[k] - meas
        if resets and k > 0 and (e * e_prev < 0.0 or e == 0.0):
            z[:nr] *= gamma
            fired[k] = True
        u = float(Cc @ z[:nc]) + Dc * e + ff[k]
        states[k] = z[:nc]
        e_out[k] = e
        u_out[k] = u
        y_out[k] = y
        z = M @ z + b_e * e + b_u * ff[k]
        e_prev = e
        if not math.isfinite(y) or abs(y) > 1e100:
            raise SimulationDiverged(f"state diverged at t={k * config.dt:.6g} s")
    return SimTrace(config.time, r, e_out, u_out, y_out, nz, states, fired)


def _sinusoid_propagator(element: ResetElement, omega: float, dt: float):
    """Exact one-step map for x' = A x + B sin(omega t) sampled at dt:
    x[k+1] = Ad x[k] + bs sin(omega t_k) + bc cos(omega t_k)."""
    base = element.base
    n = base.n_states
    M = np.zeros((n + 2, n + 2))
    M[:n, :n] = base.A
    M[:n, n] = base.B.ravel()
    M[n, n + 1] = omega
    M[n + 1, n] = -omega
    E = matrix_exp(M * dt)
    return E[:n, :n], E[:n, n], E[:n, n + 1]


def first_harmonic(
    element: ResetElement,
    omega: float,
    cycles: int = 20,
    samples_per_cycle: int = 2000,
    drift_tol: float = 0.01,
) -> complex:
    """Empirical describing function: first Fourier coefficient of the
    steady-state output under a unit sinusoid, measured over the second half
    of ``cycles`` periods.

    The input is propagated exactly between samples; with an even number of
    samples per cycle the input zero crossings fall on samples, where the
    reset fires. At a reset sample the output is taken as the mean of the
    pre- and post-jump values (trapezoidal weight of the discontinuity).
    """
    if cycles < 10:
        raise ValueError("need at least 10 cycles (first half is discarded)")
    if samples_per_cycle % 2:
        raise ValueError("samples_per_cycle must be even")
    n = element.n_r
    if n == 0:
        return complex(element.base.D[0, 0])
    dt = 2 * math.pi / (omega * samples_per_cycle)
    Ad, bs, bc = _sinusoid_propagator(element, omega, dt)
    C = element.base.C.ravel()
    D = float(element.base.D[0, 0])
    half = samples_per_cycle // 2
    k_all = np.arange(samples_per_cycle)
    phase = 2 * math.pi * k_all / samples_per_cycle
    s_in = np.sin(phase)
    s_in[::half] = 0.0
    c_in = np.cos(phase)
    basis = np.exp(-1j * phase)

    x = np.zeros(n)
    u_prev = 0.0
    per_cycle = []
    for _ in range(cycles):
        y = np.empty(samples_per_cycle)
        for k in range(samples_per_cycle):
            u = s_in[k]
            pre = float(C @ x) + D * u
            if u * u_prev < 0.0 or u == 0.0:
                x = element.gamma * x
                y[k] = 0.5 * (pre + float(C @ x) + D * u)
            else:
                y[k] = pre
            x = Ad @ x + bs * s_in[k] + bc * c_in[k]
            u_prev = u
        per_cycle.append(2.0 / samples_per_cycle * (y @ basis))
    per_cycle = np.array(per_cycle)
    last, prev = per_cycle[-1], per_cycle[-2]
    drift = abs(last - prev) / max(abs(last), 1e-300)
    if drift > drift_tol:
        raise NotSettled(f"harmonic drifts {drift:.2%} between the last two cycles at omega={omega:g}")
    # sin input: coefficient of e^{j w t} in y relative to that of sin (1/(2j))
    return complex(1j * per_cycle[cycles // 2 :].mean())
