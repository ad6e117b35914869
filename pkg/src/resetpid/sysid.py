"""Stepped-sine closed-loop identification of S and T by injecting a sinusoid
at the measurement-noise point, and the describing-function predictions they
are compared against."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lti import FrequencyCurve, StateSpaceModel
from .loopshape import OpenLoop, open_loop_df
from .reset import ResetController
from .sim import SimConfig, SimulationDiverged, simulate_closed_loop

__all__ = ["IdentPlan", "Identification", "identify", "identify_T", "identify_S", "predicted_S", "predicted_T", "default_grid"]


def default_grid(n: int = 60) -> np.ndarray:
    """``n`` log-spaced points from 10 Hz to 2 kHz, in rad/s."""
    return 2 * math.pi * np.logspace(1, math.log10(2000), n)


@dataclass(frozen=True)
class IdentPlan:
    omega: np.ndarray = field(default_factory=default_grid)
    amplitude: float = 50e-9
    cycles: int = 30  # per point, including settling
    settle_cycles: int = 20
    samples_per_cycle: int = 2000  # step is one period over this, so discretization delay stays ~0.2 deg

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        if np.any(w <= 0) or np.any(np.diff(w) <= 0):
            raise ValueError("grid must be positive and increasing")
        if self.cycles < self.settle_cycles + 5:
            raise ValueError("need at least 5 measured cycles after settling")
        if self.samples_per_cycle < 20:
            raise ValueError("samples_per_cycle too small")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")
        object.__setattr__(self, "omega", w)

    def to_dict(self) -> dict:
        return {
            "omega_rad_s": self.omega.tolist(),
            "amplitude": self.amplitude,
            "cycles": self.cycles,
            "settle_cycles": self.settle_cycles,
            "samples_per_cycle": self.samples_per_cycle,
        }


@dataclass(frozen=True)
class Identification:
    S: FrequencyCurve
    T: FrequencyCurve
    failed: tuple  # requested omegas where the loop diverged


def _harmonic(x: np.ndarray, omega: float, dt: float) -> complex:
    t = np.arange(x.size) * dt
    return complex(2.0 / x.size * (x @ np.exp(-1j * omega * t)))


def _measure(plant, controller, omega, plan: IdentPlan):
    dt = 2 * math.pi / (omega * plan.samples_per_cycle)
    n_settle = plan.settle_cycles * plan.samples_per_cycle
    n_meas = (plan.cycles - plan.settle_cycles) * plan.samples_per_cycle
    n_total = n_settle + n_meas
    t = np.arange(n_total) * dt
    noise = plan.amplitude * np.sin(omega * t)
    trace = simulate_closed_loop(plant, controller, None, None, SimConfig(dt=dt, duration=n_total * dt), noise=noise)
    sl = slice(n_settle, n_total)
    y = trace.y[sl]
    n = trace.n[sl]
    Hn = _harmonic(n, omega, dt)
    return _harmonic(y + n, omega, dt) / Hn, _harmonic(y, omega, dt) / -Hn


def identify(plant: StateSpaceModel, controller: ResetController, plan: IdentPlan = IdentPlan()) -> Identification:
    """One stepped-sine run per grid point, from rest each time.

    S is the transfer n -> y + n and T the transfer -n -> y, both from the
    first harmonics over the measured cycles.
    """
    ws, S, T, failed = [], [], [], []
    for omega in plan.omega:
        try:
            s, tt = _measure(plant, controller, float(omega), plan)
        except SimulationDiverged:
            failed.append(float(omega))
            continue
        ws.append(float(omega))
        S.append(s)
        T.append(tt)
    meta = {"plan": plan.to_dict(), "controller": controller.label, "failed_omega": failed}
    return Identification(FrequencyCurve(ws, S, dict(meta, quantity="S")), FrequencyCurve(ws, T, dict(meta, quantity="T")), tuple(failed))


def identify_T(plant, controller, plan: IdentPlan = IdentPlan()) -> FrequencyCurve:
    return identify(plant, controller, plan).T


def identify_S(plant, controller, plan: IdentPlan = IdentPlan()) -> FrequencyCurve:
    return identify(plant, controller, plan).S


def predicted_S(ol: OpenLoop, omega) -> FrequencyCurve:
    """1/(1 + L_DF)."""
    omega = np.asarray(omega, dtype=float)
    return FrequencyCurve(omega, [1 / (1 + open_loop_df(ol, w)) for w in omega], {"quantity": "S", "source": "describing function"})


def predicted_T(ol: OpenLoop, omega) -> FrequencyCurve:
    """L_DF/(1 + L_DF)."""
    omega = np.asarray(omega, dtype=float)
    vals = []
    for w in omega:
        L = open_loop_df(ol, w)
        vals.append(L / (1 + L))
    return FrequencyCurve(omega, vals, {"quantity": "T", "source": "describing function"})
