"""Scalar performance measures for tracking, precision and closed-loop
frequency responses."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .lti import FrequencyCurve

__all__ = [
    "rms",
    "max_abs",
    "steady_state_window",
    "bandwidth_from_T",
    "peak_db",
    "PerformanceReport",
    "format_table",
]


def steady_state_window(n: int) -> slice:
    """Final half of an ``n``-sample trace."""
    return slice(n // 2, n)


def _windowed(series, window):
    x = np.asarray(series, dtype=float)
    if window is not None:
        x = x[window]
    if x.size == 0:
        raise ValueError("empty window")
    return x


def rms(series, window: slice | None = None) -> float:
    x = _windowed(series, window)
    return float(np.sqrt(np.mean(x * x)))


def max_abs(series, window: slice | None = None) -> float:
    return float(np.abs(_windowed(series, window)).max())


def bandwidth_from_T(curve: FrequencyCurve, level_db: float = -3.0) -> float:
    """Frequency where |T| falls through ``level_db``, interpolated linearly in
    dB against log-frequency."""
    mag = curve.magnitude_db - level_db
    above = mag > 0
    crossings = np.nonzero(above[:-1] & ~above[1:])[0]
    rises = np.nonzero(~above[:-1] & above[1:])[0]
    if crossings.size == 0:
        raise ValueError(f"|T| never falls through {level_db} dB on the grid")
    if crossings.size > 1 or rises.size > 0:
        raise ValueError(f"|T| crosses {level_db} dB more than once")
    i = crossings[0]
    lw = np.log(curve.omega[i : i + 2])
    m0, m1 = mag[i], mag[i + 1]
    return float(math.exp(lw[0] + (lw[1] - lw[0]) * m0 / (m0 - m1)))


def peak_db(curve: FrequencyCurve) -> tuple[float, float]:
    """Largest magnitude in dB and the frequency where it occurs."""
    i = int(np.argmax(np.abs(curve.values)))
    return float(curve.magnitude_db[i]), float(curve.omega[i])


@dataclass(frozen=True)
class PerformanceReport:
    label: str
    rms_error: float  # m
    max_ss_error: float  # m
    bandwidth: float  # rad/s, -3 dB of T
    sensitivity_peak: float  # dB
    phase_margin: float  # deg
    crossover: float  # rad/s, open-loop DF unity gain

    def __post_init__(self):
        for k, v in asdict(self).items():
            if k != "label" and not math.isfinite(v):
                raise ValueError(f"{k} is not finite")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def format_table(reports) -> str:
    """Fixed-width table with the max steady-state and RMS tracking errors in nm."""
    lines = [
        f"{'Controller':<14}{'Max. SS error (nm)':>20}{'RMS tracking (nm)':>20}",
        "-" * 54,
    ]
    for r in reports:
        lines.append(f"{r.label:<14}{r.max_ss_error * 1e9:>20.4f}{r.rms_error * 1e9:>20.4f}")
    return "\n".join(lines)
