"""Stability certificates for reset control loops.

The loop is certified when a P > 0 exists with A_cl^T P + P A_cl < 0 whose
reset-state rows are pinned to [P_rho, beta * C_nrp] (the restricted Lyapunov
equation). States are ordered [x_r; x_nrp] where x_nrp stacks the linear
controller part and the plant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from .lti import StateSpaceModel, series
from .reset import ResetController

__all__ = [
    "StabilityProblem",
    "StabilityCertificate",
    "Infeasible",
    "Unknown",
    "closed_loop_matrix",
    "check_stability",
    "verify_certificate",
]


@dataclass(frozen=True)
class StabilityProblem:
    reset_part: StateSpaceModel  # (A_r, B_r, C_r, D_r)
    nonreset_part: StateSpaceModel  # linear controller part in series with the plant

    def __post_init__(self):
        r, n = self.reset_part, self.nonreset_part
        if r.n_states == 0:
            raise ValueError("no reset states: nothing to certify beyond linear stability")
        for name, s in (("reset part", r), ("non-reset part", n)):
            if s.n_inputs != 1 or s.n_outputs != 1:
                raise ValueError(f"{name} must be SISO (beta * C_nrp only conforms for SISO loops)")
            if np.any(s.D != 0):
                raise ValueError(f"{name} must be strictly proper for the closed-loop block form")

    @classmethod
    def from_loop(cls, controller: ResetController, plant: StateSpaceModel) -> "StabilityProblem":
        return cls(controller.resetting.base, series(controller.linear.scaled(controller.kp), plant))

    @property
    def n_r(self) -> int:
        return self.reset_part.n_states

    @property
    def n_nrp(self) -> int:
        return self.nonreset_part.n_states


@dataclass(frozen=True)
class StabilityCertificate:
    P: np.ndarray
    beta: np.ndarray
    P_rho: np.ndarray
    min_eig_P: float
    min_eig_decay: float  # smallest eigenvalue of -(A_cl^T P + P A_cl)

    def to_dict(self) -> dict:
        def mat(M):
            M = np.atleast_2d(M)
            return {"rows": M.shape[0], "cols": M.shape[1], "data": M.ravel().tolist()}

        return {
            "status": "certified",
            "P": mat(self.P),
            "beta": mat(self.beta.reshape(-1, 1)),
            "P_rho": mat(self.P_rho),
            "min_eig_P": self.min_eig_P,
            "min_eig_decay": self.min_eig_decay,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class Infeasible:
    reason: str

    def to_dict(self) -> dict:
        return {"status": "infeasible", "reason": self.reason}


@dataclass(frozen=True)
class Unknown:
    reason: str
    best_objective: float

    def to_dict(self) -> dict:
        return {"status": "unknown", "reason": self.reason, "best_objective": self.best_objective}


def closed_loop_matrix(problem: StabilityProblem) -> np.ndarray:
    r, n = problem.reset_part, problem.nonreset_part
    return np.block([[r.A, r.B @ n.C], [-n.B @ r.C, n.A]])


def _definite_margin(M: np.ndarray) -> tuple[float, float]:
    """Smallest eigenvalue of symmetric ``M`` and the floating-point noise floor
    below which its sign cannot be trusted."""
    w = np.linalg.eigvalsh(M)
    floor = 10 * M.shape[0] * np.finfo(float).eps * np.abs(w).max()
    return float(w.min()), float(floor)


def verify_certificate(problem: StabilityProblem, cert: StabilityCertificate, rtol: float = 1e-8) -> list[str]:
    """Independent re-check of a certificate. Returns the list of violations."""
    A = closed_loop_matrix(problem)
    nr = problem.n_r
    P = np.asarray(cert.P, dtype=float)
    errors = []
    if not np.array_equal(P, P.T):
        errors.append("P is not symmetric")
    # Jacobi congruence D P D keeps definiteness and makes the test well conditioned;
    # the same similarity on A gives D (A^T P + P A) D.
    diag = np.diag(P)
    if np.any(diag <= 0):
        errors.append("P has a non-positive diagonal entry")
        return errors
    d = 1 / np.sqrt(diag)
    Ps = P * np.outer(d, d)
    As = A * np.outer(1 / d, d)
    lo, floor = _definite_margin(Ps)
    if lo <= floor:
        errors.append(f"P is not positive definite (min eig {lo:.3g}, noise floor {floor:.3g})")
    lo, floor = _definite_margin(np.atleast_2d(cert.P_rho))
    if lo <= floor:
        errors.append("P_rho is not positive definite")
    L = As.T @ Ps + Ps @ As
    lo, floor = _definite_margin(-0.5 * (L + L.T))
    if lo <= floor:
        errors.append(f"A_cl^T P + P A_cl is not negative definite (margin {lo:.3g}, noise floor {floor:.3g})")
    B0 = np.vstack([np.eye(nr), np.zeros((problem.n_nrp, nr))])
    C0 = np.hstack([np.atleast_2d(cert.P_rho), np.asarray(cert.beta).reshape(nr, 1) @ problem.nonreset_part.C])
    resid = np.linalg.norm(B0.T @ P - C0) / max(np.linalg.norm(C0), 1e-300)
    if resid > rtol:
        errors.append(f"restricted equality residual {resid:.2e} exceeds {rtol:.0e}")
    return errors


class _Param:
    """Affine parameterization P(x) of symmetric matrices with reset rows
    [P_rho, beta * c] for a given output row ``c``."""

    def __init__(self, nr: int, c: np.ndarray):
        self.nr = nr
        m = c.size
        self.n = nr + m
        basis = []
        for i in range(nr):
            for j in range(i, nr):
                E = np.zeros((self.n, self.n))
                E[i, j] = E[j, i] = 1.0
                basis.append(E)
        for i in range(nr):
            E = np.zeros((self.n, self.n))
            E[i, nr:] = c
            E[nr:, i] = c
            basis.append(E)
        for i in range(m):
            for j in range(i, m):
                E = np.zeros((self.n, self.n))
                E[nr + i, nr + j] = E[nr + j, nr + i] = 1.0
                basis.append(E)
        self.basis = np.array(basis)
        self.n_p_rho = nr * (nr + 1) // 2

    def __call__(self, x):
        return np.tensordot(x, self.basis, axes=1)

    def project(self, P):
        """Least-squares coordinates of a symmetric matrix in this basis."""
        G = self.basis.reshape(len(self.basis), -1)
        x, *_ = np.linalg.lstsq(G.T, P.ravel(), rcond=None)
        return x

    def beta(self, x):
        return x[self.n_p_rho : self.n_p_rho + self.nr]


def _search(A, param, x0, mus=(1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7), maxiter=5000):
    """Minimize the largest eigenvalue of diag(A^T P + P A, -P) over trace(P) = 1.

    The max-eigenvalue is smoothed as mu*logsumexp(eig/mu) and driven down by
    L-BFGS with a decreasing sequence of mu (continuation)."""
    from scipy.linalg import null_space
    from scipy.optimize import minimize

    basis = param.basis
    n = param.n
    tr = np.array([np.trace(E) for E in basis])
    N = null_space(tr.reshape(1, -1))
    LB = np.array([A.T @ E + E @ A for E in basis])
    x0 = x0 / (tr @ x0)

    def eigs(x):
        wl, vl = np.linalg.eigh(np.tensordot(x, LB, axes=1))
        wp, vp = np.linalg.eigh(-param(x))
        return np.concatenate([wl, wp]), vl, vp

    def smoothed(z, mu):
        x = x0 + N @ z
        w, vl, vp = eigs(x)
        f = w.max()
        e = np.exp((w - f) / mu)
        s = e.sum()
        wts = e / s
        Wl = (vl * wts[:n]) @ vl.T
        Wp = (vp * wts[n:]) @ vp.T
        g = np.einsum("kij,ij->k", LB, Wl) - np.einsum("kij,ij->k", basis, Wp)
        return f + mu * np.log(s), N.T @ g

    z = np.zeros(N.shape[1])
    best_x, best_f = x0, eigs(x0)[0].max()
    for mu in mus:
        res = minimize(smoothed, z, args=(mu,), jac=True, method="L-BFGS-B",
                       options={"maxiter": maxiter // len(mus), "gtol": 1e-14, "ftol": 1e-15})
        z = res.x
        x = x0 + N @ z
        f = eigs(x)[0].max()
        if f < best_f:
            best_f, best_x = f, x
        if best_f < 0:
            break
    return best_x, best_f


def check_stability(
    problem: StabilityProblem,
    seed: int = 0,
    restarts: int = 50,
    iters: int = 5000,
):
    """Search for a restricted-Lyapunov certificate.

    Returns a verified :class:`StabilityCertificate`, :class:`Infeasible` when
    the base linear loop is not Hurwitz, or :class:`Unknown` when the search
    budget runs out. Search failure alone never reports instability.
    """
    A = closed_loop_matrix(problem)
    eig = np.linalg.eigvals(A)
    if eig.real.max() >= 0:
        return Infeasible(
            f"closed-loop matrix is not Hurwitz (max Re(eig) = {eig.real.max():.4g}); "
            "no P can make A_cl^T P + P A_cl negative definite"
        )
    nr = problem.n_r
    c = problem.nonreset_part.C.ravel()

    # diagonal similarity scaling (keeps the block structure) and time scaling
    d = _balance_scaling(A)
    T = np.diag(d)
    Ti = np.diag(1 / d)
    As = Ti @ A @ T
    As = As / np.abs(As).max()
    cs = c * d[nr:]
    cs = cs / np.linalg.norm(cs)
    param = _Param(nr, cs)

    rng = np.random.default_rng(seed)
    Q = solve_continuous_lyapunov(As.T, -np.eye(param.n))
    starts = [param.project(Q / np.trace(Q))]
    for _ in range(restarts - 1):
        M = rng.standard_normal((param.n, param.n))
        starts.append(param.project(M @ M.T / param.n + np.eye(param.n)))

    best = np.inf
    for x0 in starts:
        x, f = _search(As, param, x0, maxiter=iters)
        best = min(best, f)
        if f < 0:
            Ps = param(x)
            P = Ti.T @ Ps @ Ti
            P = 0.5 * (P + P.T)
            P_rho = P[:nr, :nr]
            # beta from the reset rows in original coordinates
            beta, *_ = np.linalg.lstsq(c.reshape(-1, 1), P[:nr, nr:].T, rcond=None)
            beta = beta.ravel()
            # pin the reset rows exactly to the structure
            P[:nr, nr:] = np.outer(beta, c)
            P[nr:, :nr] = P[:nr, nr:].T
            L = A.T @ P + P @ A
            cert = StabilityCertificate(
                P=P,
                beta=beta,
                P_rho=P_rho,
                min_eig_P=float(np.linalg.eigvalsh(P).min()),
                min_eig_decay=float(-np.linalg.eigvalsh(0.5 * (L + L.T)).max()),
            )
            if not verify_certificate(problem, cert):
                return cert
    return Unknown(f"no certificate after {len(starts)} restarts x {iters} iterations", float(best))


def _balance_scaling(A: np.ndarray) -> np.ndarray:
    """Positive diagonal d such that diag(d)^-1 A diag(d) has balanced rows/columns."""
    from scipy.linalg import matrix_balance

    _, (scale, _) = matrix_balance(A, permute=False, separate=True)
    return scale
