"""Loop shaping of linear PID and Reset PID (controllers A and B) using the
describing function of the open loop."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .describing import bisect, df
from .lti import RationalTF, StateSpaceModel, freq_response, tf_to_ss
from .reset import ResetController, ResetElement, reset_taming_pole

__all__ = [
    "DesignSpec",
    "OpenLoop",
    "integral_lag",
    "lead_zero",
    "lowpass",
    "pid_series",
    "pid_comparator",
    "reset_pid_a",
    "reset_pid_b",
    "open_loop_df",
    "phase_margin",
    "tune_kp",
    "solve_gamma",
    "design_report",
]

# Frequency (as a multiple of the reference crossover) at which controller B's
# gain is matched to the reference PID. Far enough out that every filter has
# reached its asymptote.
ASYMPTOTIC_MATCH = 1000.0


@dataclass(frozen=True)
class DesignSpec:
    omega_c: float
    pm_target: float = 45.0
    gamma: float | None = None  # None: solve for pm_target
    alpha: float = 0.7
    ratio_i: float = 0.1
    ratio_d: float = 0.2
    ratio_l: float = 7.0

    def __post_init__(self):
        if not self.omega_c > 0:
            raise ValueError("omega_c must be positive")
        if not 0 < self.alpha <= 1.5:
            raise ValueError(f"alpha must lie in (0, 1.5], got {self.alpha}")
        if min(self.ratio_i, self.ratio_d, self.ratio_l) <= 0:
            raise ValueError("frequency ratios must be positive")
        if not self.ratio_d < self.ratio_l:
            raise ValueError("omega_d must lie below omega_l")
        if self.gamma is not None and not -1 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [-1, 1]")

    @property
    def omega_i(self) -> float:
        return self.ratio_i * self.omega_c

    @property
    def omega_d(self) -> float:
        return self.ratio_d * self.omega_c

    @property
    def omega_l(self) -> float:
        return self.ratio_l * self.omega_c

    def at(self, omega_c: float) -> "DesignSpec":
        return replace(self, omega_c=omega_c)


def integral_lag(omega_i: float) -> RationalTF:
    """1 + omega_i/s."""
    return RationalTF([1.0, omega_i], [1.0, 0.0])


def lead_zero(omega_d: float) -> RationalTF:
    """s/omega_d + 1 (improper on its own)."""
    return RationalTF([1.0 / omega_d, 1.0], [1.0])


def lowpass(omega_l: float) -> RationalTF:
    """1/(s/omega_l + 1)."""
    return RationalTF([1.0], [1.0 / omega_l, 1.0])


def _proper_factors(factors, omega_l: float) -> list:
    factors = list(factors)
    while not RationalTF.product(factors).is_proper:
        # extra pole a decade above the LPF, where it leaves the bandwidth phase alone
        factors.append(lowpass(10 * omega_l))
    return factors


@dataclass(frozen=True)
class OpenLoop:
    controller: ResetController
    plant: StateSpaceModel

    def __post_init__(self):
        if self.plant.n_inputs != 1 or self.plant.n_outputs != 1:
            raise ValueError("plant must be SISO")

    def __call__(self, omega: float) -> complex:
        return open_loop_df(self, omega)

    def with_controller(self, controller: ResetController) -> "OpenLoop":
        return OpenLoop(controller, self.plant)


def open_loop_df(ol: OpenLoop, omega: float) -> complex:
    c = ol.controller
    return df(c.resetting, omega) * freq_response(c.linear, omega) * c.kp * freq_response(ol.plant, omega)


def _pm_at(ol: OpenLoop, omega: float) -> float:
    return math.degrees(np.angle(-open_loop_df(ol, omega)))


def phase_margin(ol: OpenLoop, window=(1e-1, 1e6), points_per_decade: int = 100) -> tuple[float, float]:
    """Phase margin [deg] and crossover [rad/s] of the open-loop DF.

    Exactly one unity-gain crossing is required inside ``window``.
    """
    lo, hi = window
    n = int(points_per_decade * math.log10(hi / lo)) + 1
    grid = np.logspace(math.log10(lo), math.log10(hi), n)
    logmag = np.array([math.log(abs(open_loop_df(ol, w))) for w in grid])
    idx = np.nonzero(np.sign(logmag[:-1]) != np.sign(logmag[1:]))[0]
    if idx.size == 0:
        raise ValueError(
            f"no unity-gain crossing in [{lo:g}, {hi:g}] rad/s "
            f"(|L| ranges {math.exp(logmag.min()):.3g}..{math.exp(logmag.max()):.3g})"
        )
    if idx.size > 1:
        raise ValueError(f"{idx.size} unity-gain crossings near {grid[idx].round(3).tolist()} rad/s")
    i = idx[0]
    wc = bisect(lambda w: math.log(abs(open_loop_df(ol, w))), grid[i], grid[i + 1], rtol=1e-10)
    return _pm_at(ol, wc), wc


def tune_kp(ol: OpenLoop, omega_c: float) -> float:
    """Gain that puts the open-loop DF magnitude at exactly 1 at ``omega_c``."""
    unit = ol.with_controller(ol.controller.with_kp(1.0))
    mag = abs(open_loop_df(unit, omega_c))
    if mag == 0 or not math.isfinite(mag):
        raise ValueError(f"open-loop magnitude at {omega_c:g} rad/s is {mag}")
    return 1.0 / mag


def pid_series(kp: float, omega_i: float, omega_d: float, omega_t: float, omega_l: float) -> ResetController:
    """Linear series PID: kp (1 + wi/s) (s/wd + 1)/(s/wt + 1) / (s/wl + 1)."""
    if min(omega_i, omega_d, omega_t, omega_l) <= 0:
        raise ValueError("PID frequencies must be positive")
    if not omega_t > omega_d:
        raise ValueError(f"taming pole {omega_t:g} must lie above the lead zero {omega_d:g}")
    factors = [integral_lag(omega_i), lead_zero(omega_d), lowpass(omega_t), lowpass(omega_l)]
    return ResetController.from_factors(
        ResetElement(StateSpaceModel.gain(1.0), 1.0), factors, kp, label="PID"
    )


def _reset_pid(spec: DesignSpec, gamma: float, kp: float = 1.0, label: str = "") -> ResetController:
    factors = _proper_factors([integral_lag(spec.omega_i), lead_zero(spec.omega_d), lowpass(spec.omega_l)], spec.omega_l)
    return ResetController.from_factors(
        reset_taming_pole(spec.alpha * spec.omega_d, gamma), factors, kp, label=label
    )


def solve_gamma(build, omega_c: float, pm_target: float, plant: StateSpaceModel, tol_deg: float = 1e-3) -> float:
    """Bisection on gamma in [-1, 1] so that the PM at ``omega_c`` hits the target.

    ``build(gamma)`` returns a controller; its gain is retuned at every step.
    The margin falls as gamma rises (less reset, less phase lead).
    """

    def pm_err(g):
        ol = OpenLoop(build(g), plant)
        ol = ol.with_controller(ol.controller.with_kp(tune_kp(ol, omega_c)))
        return _pm_at(ol, omega_c) - pm_target

    lo, hi = -1.0, 1.0
    flo, fhi = pm_err(lo), pm_err(hi)
    if flo < 0:
        raise ValueError(f"even gamma=-1 gives PM {flo + pm_target:.2f} deg < target {pm_target}")
    if fhi > 0:
        return 1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        fm = pm_err(mid)
        if abs(fm) < tol_deg:
            return mid
        if fm > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def reset_pid_a(spec: DesignSpec, plant: StateSpaceModel) -> ResetController:
    """Reset PID controller A: reset taming pole at alpha*omega_d, gain set for
    unity open-loop DF magnitude at omega_c."""
    gamma = spec.gamma
    if gamma is None:
        gamma = solve_gamma(lambda g: _reset_pid(spec, g), spec.omega_c, spec.pm_target, plant)
    c = _reset_pid(spec, gamma, label="Reset PID A")
    kp = tune_kp(OpenLoop(c, plant), spec.omega_c)
    return c.with_kp(kp)


def pid_comparator(spec: DesignSpec, plant: StateSpaceModel) -> ResetController:
    """Linear PID with lead zero/pole symmetric about omega_c, spread chosen so
    that the linear phase margin equals ``spec.pm_target``."""
    wc = spec.omega_c

    def build(ratio):
        r = math.sqrt(ratio)
        return pid_series(1.0, spec.omega_i, wc / r, wc * r, spec.omega_l)

    def pm_err(ratio):
        ol = OpenLoop(build(ratio), plant)
        return _pm_at(ol, wc) - spec.pm_target

    ratio = bisect(pm_err, 1.0 + 1e-9, 1e4, rtol=1e-12)
    c = build(ratio)
    kp = tune_kp(OpenLoop(c, plant), wc)
    out = c.with_kp(kp)
    return ResetController(out.resetting, out.linear, out.kp, out.factors, label="PID")


def reset_pid_b(
    spec: DesignSpec,
    plant: StateSpaceModel,
    reference_pid: ResetController,
    match_factor: float = ASYMPTOTIC_MATCH,
    search=(1.0, 5.0),
) -> ResetController:
    """Reset PID controller B.

    Same structure and tuning rules as A, redesigned at a higher crossover
    chosen so that the open-loop gain at ``match_factor`` times the reference
    crossover equals the reference PID's.
    """
    ref_ol = OpenLoop(reference_pid, plant)
    _, wc_ref = phase_margin(ref_ol)
    w_match = match_factor * wc_ref
    if not w_match > wc_ref:
        raise ValueError("gain-match frequency must lie above the reference crossover")
    target = abs(open_loop_df(ref_ol, w_match))

    def design(wc):
        return reset_pid_a(spec.at(wc), plant)

    def err(wc):
        return math.log(abs(open_loop_df(OpenLoop(design(wc), plant), w_match)) / target)

    wc_b = bisect(err, search[0] * wc_ref, search[1] * wc_ref, rtol=1e-7)
    c = design(wc_b)
    return ResetController(c.resetting, c.linear, c.kp, c.factors, label="Reset PID B")


def design_report(ol: OpenLoop, window=(1e-1, 1e6)) -> dict:
    pm, wc = phase_margin(ol, window)
    return {
        "label": ol.controller.label,
        "kp": ol.controller.kp,
        "gamma": ol.controller.gamma,
        "crossover_rad_s": wc,
        "phase_margin_deg": pm,
        "gain_at_crossover": abs(open_loop_df(ol, wc)),
        "gain_decade_below": abs(open_loop_df(ol, wc / 10)),
        "gain_decade_above": abs(open_loop_df(ol, wc * 10)),
    }
