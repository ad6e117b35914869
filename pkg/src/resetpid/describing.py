"""Sinusoidal-input describing function of reset elements."""

from __future__ import annotations

import math

import numpy as np

from .lti import FrequencyCurve, freq_response, matrix_exp
from .reset import ResetElement, gfore

__all__ = ["theta_d", "df", "df_curve", "cutoff_ratio_beta", "bisect"]


def theta_d(element: ResetElement, omega: float) -> np.ndarray:
    """Reset correction matrix Theta_D(omega).

    With Lambda = w^2 I + A^2, Delta = I + exp(pi A / w),
    Delta_D = I + A_rho exp(pi A / w) and
    Gamma_D = Delta_D^-1 A_rho Delta Lambda^-1:

        Theta_D = -(2 w^2 / pi) Delta (Gamma_D - Lambda^-1)
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    A = element.base.A
    n = element.n_r
    if n == 0:
        return np.zeros((0, 0))
    I = np.eye(n)
    A_rho = element.reset_matrix
    E = matrix_exp((math.pi / omega) * A)
    lam = omega**2 * I + A @ A
    delta = I + E
    delta_d = I + A_rho @ E
    if np.linalg.cond(lam) > 1e12:
        raise ValueError(f"Lambda(omega) singular at omega={omega:g}")
    if np.linalg.cond(delta_d) > 1e12:
        raise ValueError(
            f"Delta_D(omega) singular at omega={omega:g} for gamma={element.gamma:g}; "
            "the reset state never settles to a periodic orbit"
        )
    lam_inv = np.linalg.inv(lam)
    gamma_d = np.linalg.solve(delta_d, A_rho @ delta @ lam_inv)
    return -(2 * omega**2 / math.pi) * delta @ (gamma_d - lam_inv)


def df(element: ResetElement, omega: float) -> complex:
    """Describing function C (jwI - A)^-1 (I + j Theta_D) B + D."""
    base = element.base
    if element.n_r == 0 or element.gamma == 1.0:
        return freq_response(base, omega)
    th = theta_d(element, omega)
    n = element.n_r
    # Theta_D multiplies the input direction; for one reset state the order is immaterial
    res = np.linalg.solve(1j * omega * np.eye(n) - base.A, (np.eye(n) + 1j * th) @ base.B)
    return complex((base.C @ res + base.D)[0, 0])


def df_curve(element: ResetElement, omega) -> FrequencyCurve:
    omega = np.asarray(omega, dtype=float)
    return FrequencyCurve(omega, [df(element, w) for w in omega])


def bisect(f, lo: float, hi: float, rtol: float = 1e-6, max_iter: int = 200) -> float:
    """Root of ``f`` on [lo, hi] by bisection in log-space (lo, hi > 0)."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise ValueError(f"root not bracketed in [{lo:g}, {hi:g}]")
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi / lo - 1 < rtol:
            break
    return math.sqrt(lo * hi)


def cutoff_ratio_beta(gamma: float, rtol: float = 1e-9) -> float:
    """-3 dB frequency of a unit-corner reset lag's DF, relative to the corner."""
    if not -1.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [-1, 1], got {gamma}")
    if gamma == 1.0:
        return 1.0
    el = gfore(1.0, gamma)
    target = 1 / math.sqrt(2)
    return bisect(lambda w: abs(df(el, w)) - target, 1e-2, 1e2, rtol=rtol)
