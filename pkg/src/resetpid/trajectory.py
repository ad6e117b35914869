"""Snap-limited (fourth-order) triangular reference and inverse-model
feedforward for a mass-spring-damper plant."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

__all__ = ["MotionLimits", "Profile", "fourth_order_triangle", "second_order_ff", "transition_durations"]


@dataclass(frozen=True)
class MotionLimits:
    v_max: float = 5e-6  # m/s
    a_max: float = 5e-4  # m/s^2
    j_max: float = 0.5  # m/s^3
    s_max: float = 500.0  # m/s^4

    def __post_init__(self):
        for name in ("v_max", "a_max", "j_max", "s_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class Profile:
    time: np.ndarray
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    jerk: np.ndarray
    snap: np.ndarray  # constant over [t_k, t_k+1)
    dt: float
    period: float
    v_peak: float
    binding: str
    segments: tuple  # (n_s, n_j, n_a, n_cruise) sample counts

    def __len__(self):
        return self.time.size

    def to_csv(self, digits: int = 12) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "r", "v", "a", "j", "s"])
        fmt = f"{{:.{digits}e}}"
        for row in zip(self.time, self.position, self.velocity, self.acceleration, self.jerk, self.snap):
            w.writerow([fmt.format(v) for v in row])
        return buf.getvalue()


def transition_durations(dv: float, limits: MotionLimits) -> tuple[float, float, float, str]:
    """Continuous durations (t_s, t_j, t_a) of a symmetric velocity change
    ``dv`` under the acceleration, jerk and snap limits, and the limit that
    shapes it.

    Snap pulses of length t_s build jerk, jerk is held for t_j, acceleration
    is held for t_a; the deceleration half mirrors the first.
    """
    s, j, a = limits.s_max, limits.j_max, limits.a_max
    t_s = j / s
    if s * t_s**2 > a:
        t_s = math.sqrt(a / s)
        t_j = 0.0
    else:
        t_j = a / j - t_s
    a_peak = s * t_s * (t_s + t_j)
    dv0 = a_peak * (2 * t_s + t_j)
    if dv >= dv0:
        return t_s, t_j, dv / a_peak - (2 * t_s + t_j), "acceleration"
    t_s = j / s
    if dv >= 2 * s * t_s**3:
        # dv = s t_s (t_s + t_j)(2 t_s + t_j), solve for t_j
        c = dv / (s * t_s)
        t_j = (-3 * t_s + math.sqrt(t_s**2 + 4 * c)) / 2
        return t_s, max(t_j, 0.0), 0.0, "jerk"
    return (dv / (2 * s)) ** (1 / 3), 0.0, 0.0, "snap"


def _step(state, s, h):
    x, v, a, j = state
    return (
        x + v * h + a * h**2 / 2 + j * h**3 / 6 + s * h**4 / 24,
        v + a * h + j * h**2 / 2 + s * h**3 / 6,
        a + j * h + s * h**2 / 2,
        j + s * h,
    )


def _transition_snap(n_s: int, n_j: int, n_a: int, s: float) -> np.ndarray:
    up = [s] * n_s + [0.0] * n_j + [-s] * n_s
    down = [-s] * n_s + [0.0] * n_j + [s] * n_s
    return np.array(up + [0.0] * n_a + down)


def _half_transition_displacement(n_s, n_j, n_a, s, v0, dt) -> float:
    """Displacement from the start of a transition (velocity -v0) to its
    midpoint, integrated exactly."""
    snap = _transition_snap(n_s, n_j, n_a, s)
    t_mid = snap.size * dt / 2
    state = (0.0, -v0, 0.0, 0.0)
    t = 0.0
    for sk in snap:
        h = min(dt, t_mid - t)
        if h <= 0:
            break
        state = _step(state, sk, h)
        t += h
    return state[0]


def fourth_order_triangle(
    amplitude: float,
    period: float,
    limits: MotionLimits = MotionLimits(),
    dt: float = 1 / 20000,
    n_periods: float = 1,
) -> Profile:
    """Periodic triangle of the given amplitude with snap-limited corners.

    Every phase lasts a whole number of samples and the snap is constant
    within each sample, so the derivative chain is integrated exactly. The
    trace starts at the beginning of a rising cruise, centred so that the
    position is symmetric about zero.
    """
    if not amplitude > 0 or not period > 0:
        raise ValueError("amplitude and period must be positive")
    n_half = period / (2 * dt)
    if abs(n_half - round(n_half)) > 1e-6:
        raise ValueError("half period must be a whole number of samples")
    n_half = int(round(n_half))

    v_p = 4 * amplitude / period
    seen = set()
    for _ in range(100):
        t_s, t_j, t_a, binding = transition_durations(2 * v_p, limits)
        n_s = max(1, math.ceil(t_s / dt - 1e-9))
        n_j = max(0, math.ceil(t_j / dt - 1e-9))
        n_a = max(0, math.ceil(t_a / dt - 1e-9))
        n_tr = 4 * n_s + 2 * n_j + n_a
        n_c = n_half - n_tr
        if n_c < 0:
            raise ValueError(
                f"period {period:g} s too short: each corner needs {n_tr * dt:g} s "
                f"under the {binding} limit"
            )
        # snap magnitude that realizes the velocity change with these durations
        unit_s = 2.0 / (n_s * dt * (n_s + n_j) * dt * (2 * n_s + n_j + n_a) * dt)
        d_half = -_half_transition_displacement(n_s, n_j, n_a, unit_s, 1.0, dt)
        v_new = 2 * amplitude / (n_c * dt + 2 * d_half)
        key = (n_s, n_j, n_a)
        if key in seen and abs(v_new - v_p) <= 1e-12 * v_p:
            break
        seen.add(key)
        v_p = v_new
    else:
        raise RuntimeError("corner durations did not converge")
    s = unit_s * v_p
    if v_p > limits.v_max * (1 + 1e-12):
        raise ValueError(f"velocity limit binds: triangle needs {v_p:.4g} m/s > v_max {limits.v_max:.4g}")

    trans_down = -_transition_snap(n_s, n_j, n_a, s)
    trans_up = -trans_down
    one_period = np.concatenate([np.zeros(n_c), trans_down, np.zeros(n_c), trans_up])
    n_total = int(round(n_periods * one_period.size))
    snap = np.resize(one_period, n_total)

    pos = np.empty(n_total)
    vel = np.empty(n_total)
    acc = np.empty(n_total)
    jerk = np.empty(n_total)
    state = (-v_p * n_c * dt / 2, v_p, 0.0, 0.0)
    for k in range(n_total):
        pos[k], vel[k], acc[k], jerk[k] = state
        state = _step(state, snap[k], dt)

    tol = 1 + 1e-9
    for name, series, lim in (
        ("acceleration", acc, limits.a_max),
        ("jerk", jerk, limits.j_max),
        ("snap", snap, limits.s_max),
    ):
        if np.abs(series).max() > lim * tol:
            raise ValueError(f"{name} limit exceeded after quantization; reduce dt")
    return Profile(
        time=np.arange(n_total) * dt,
        position=pos,
        velocity=vel,
        acceleration=acc,
        jerk=jerk,
        snap=snap,
        dt=dt,
        period=period,
        v_peak=v_p,
        binding=binding,
        segments=(n_s, n_j, n_a, n_c),
    )


def second_order_ff(acceleration, mass: float, damping: float, stiffness: float, position, velocity) -> np.ndarray:
    """Inverse-model force m*a + c*v + k*x."""
    acceleration = np.asarray(acceleration, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    position = np.asarray(position, dtype=float)
    if not acceleration.shape == velocity.shape == position.shape:
        raise ValueError("series must share one shape")
    return mass * acceleration + damping * velocity + stiffness * position
