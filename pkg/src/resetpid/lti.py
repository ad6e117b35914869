"""Continuous-time LTI building blocks: state-space models, rational transfer
functions, frequency-response curves and the matrix exponential."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "StateSpaceModel",
    "RationalTF",
    "FrequencyCurve",
    "tf_to_ss",
    "series",
    "freq_response",
    "matrix_exp",
    "second_order_plant",
]


def _frozen(x, ndim=2) -> np.ndarray:
    arr = np.array(x, dtype=float, ndmin=ndim)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """dx/dt = A x + B u, y = C x + D u."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, 0)
        B = np.array(self.B, dtype=float, ndmin=2)
        C = np.array(self.C, dtype=float, ndmin=2)
        D = np.array(self.D, dtype=float, ndmin=2)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        n = A.shape[0]
        if n == 0:
            B = B.reshape(0, D.shape[1])
            C = C.reshape(D.shape[0], 0)
        if B.shape[0] != n:
            raise ValueError(f"B has {B.shape[0]} rows, expected {n}")
        if C.shape[1] != n:
            raise ValueError(f"C has {C.shape[1]} columns, expected {n}")
        if D.shape != (C.shape[0], B.shape[1]):
            raise ValueError(f"D must be {C.shape[0]}x{B.shape[1]}, got {D.shape}")
        for name, M in zip("ABCD", (A, B, C, D)):
            if not np.all(np.isfinite(M)):
                raise ValueError(f"{name} contains non-finite entries")
        for name, M in zip("ABCD", (A, B, C, D)):
            M.setflags(write=False)
            object.__setattr__(self, name, M)

    def __eq__(self, other):
        if not isinstance(other, StateSpaceModel):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k)) for k in "ABCD")

    def __hash__(self):
        return hash(tuple(getattr(self, k).tobytes() for k in "ABCD"))

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.B.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.C.shape[0]

    @classmethod
    def gain(cls, k: float) -> "StateSpaceModel":
        return cls(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[k]])

    def __call__(self, omega: float) -> complex:
        return freq_response(self, omega)

    def scaled(self, k: float) -> "StateSpaceModel":
        """Output scaled by ``k``."""
        return StateSpaceModel(self.A, self.B, k * self.C, k * self.D)

    def to_dict(self) -> dict:
        return {name: getattr(self, name).tolist() for name in "ABCD"} | {
            "shape": [self.n_states, self.n_inputs, self.n_outputs]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StateSpaceModel":
        n, m, p = d["shape"]
        return cls(
            np.array(d["A"], dtype=float).reshape(n, n),
            np.array(d["B"], dtype=float).reshape(n, m),
            np.array(d["C"], dtype=float).reshape(p, n),
            np.array(d["D"], dtype=float).reshape(p, m),
        )


@dataclass(frozen=True)
class RationalTF:
    """num(s)/den(s), coefficients in descending powers of s."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num = np.trim_zeros(np.atleast_1d(np.asarray(self.num, dtype=float)), "f")
        den = np.trim_zeros(np.atleast_1d(np.asarray(self.den, dtype=float)), "f")
        if den.size == 0:
            raise ValueError("denominator is identically zero")
        if num.size == 0:
            num = np.zeros(1)
        if not (np.all(np.isfinite(num)) and np.all(np.isfinite(den))):
            raise ValueError("non-finite coefficients")
        object.__setattr__(self, "num", _frozen(num, 1))
        object.__setattr__(self, "den", _frozen(den, 1))

    @property
    def is_proper(self) -> bool:
        return self.num.size <= self.den.size

    @property
    def relative_degree(self) -> int:
        return self.den.size - self.num.size

    def __call__(self, s: complex) -> complex:
        return complex(np.polyval(self.num, s) / np.polyval(self.den, s))

    def at(self, omega: float) -> complex:
        return self(1j * omega)

    def __mul__(self, other: "RationalTF | float") -> "RationalTF":
        if isinstance(other, RationalTF):
            return RationalTF(np.polymul(self.num, other.num), np.polymul(self.den, other.den))
        return RationalTF(self.num * float(other), self.den)

    __rmul__ = __mul__

    @classmethod
    def product(cls, factors) -> "RationalTF":
        out = cls([1.0], [1.0])
        for f in factors:
            out = out * f
        return out

    def to_dict(self) -> dict:
        return {"num": self.num.tolist(), "den": self.den.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "RationalTF":
        return cls(d["num"], d["den"])


@dataclass(frozen=True)
class FrequencyCurve:
    """Ordered (omega [rad/s], complex value) samples."""

    omega: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float).ravel()
        v = np.asarray(self.values, dtype=complex).ravel()
        if w.shape != v.shape:
            raise ValueError("omega and values differ in length")
        if w.size and (np.any(w <= 0) or np.any(np.diff(w) <= 0)):
            raise ValueError("omega must be positive and strictly increasing")
        object.__setattr__(self, "omega", _frozen(w, 1))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.omega.size

    @property
    def magnitude_db(self) -> np.ndarray:
        return 20 * np.log10(np.abs(self.values))

    @property
    def phase_deg(self) -> np.ndarray:
        return np.degrees(np.unwrap(np.angle(self.values)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["omega_rad_s", "real", "imag"])
        for om, v in zip(self.omega, self.values):
            w.writerow([repr(float(om)), repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "FrequencyCurve":
        rows = list(csv.reader(io.StringIO(text)))
        if rows[0] != ["omega_rad_s", "real", "imag"]:
            raise ValueError(f"unexpected header {rows[0]}")
        data = np.array(rows[1:], dtype=float).reshape(-1, 3)
        return cls(data[:, 0], data[:, 1] + 1j * data[:, 2])

    def to_json(self) -> str:
        return json.dumps(
            {
                "meta": self.meta,
                "omega_rad_s": self.omega.tolist(),
                "real": self.values.real.tolist(),
                "imag": self.values.imag.tolist(),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "FrequencyCurve":
        d = json.loads(text)
        return cls(d["omega_rad_s"], np.array(d["real"]) + 1j * np.array(d["imag"]), d.get("meta", {}))


def tf_to_ss(tf: RationalTF) -> StateSpaceModel:
    """Controllable canonical realization of a proper SISO transfer function."""
    if not tf.is_proper:
        raise ValueError(
            f"improper transfer function (num degree {tf.num.size - 1} > den degree "
            f"{tf.den.size - 1}); combine it with enough poles before realizing"
        )
    a0 = tf.den[0]
    den = tf.den / a0
    n = den.size - 1
    num = np.concatenate([np.zeros(den.size - tf.num.size), tf.num / a0])
    d = num[0]
    if n == 0:
        return StateSpaceModel.gain(d)
    # strictly proper remainder: num - d*den
    rem = num[1:] - d * den[1:]
    A = np.zeros((n, n))
    A[0, :] = -den[1:]
    A[1:, :-1] = np.eye(n - 1)
    B = np.zeros((n, 1))
    B[0, 0] = 1.0
    C = rem.reshape(1, n)
    return StateSpaceModel(A, B, C, [[d]])


def series(first: StateSpaceModel, second: StateSpaceModel) -> StateSpaceModel:
    """u -> first -> second -> y. State is [x_first; x_second]."""
    if first.n_outputs != second.n_inputs:
        raise ValueError(
            f"cannot connect {first.n_outputs} outputs into {second.n_inputs} inputs"
        )
    n1, n2 = first.n_states, second.n_states
    A = np.block(
        [
            [first.A, np.zeros((n1, n2))],
            [second.B @ first.C, second.A],
        ]
    )
    B = np.vstack([first.B, second.B @ first.D])
    C = np.hstack([second.D @ first.C, second.C])
    D = second.D @ first.D
    return StateSpaceModel(A, B, C, D)


def freq_response(sys: StateSpaceModel, omega: float) -> complex:
    """C (j omega I - A)^-1 B + D for a SISO model."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    n = sys.n_states
    if n == 0:
        return complex(sys.D[0, 0])
    M = 1j * omega * np.eye(n) - sys.A
    if np.linalg.cond(M) > 1e14:
        raise ValueError(f"resolvent singular at omega={omega:g} (pole on the imaginary axis)")
    x = np.linalg.solve(M, sys.B)
    return complex((sys.C @ x + sys.D)[0, 0])


# Pade(13) coefficients for scaling-and-squaring
_PADE13 = np.array(
    [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ]
)
_THETA13 = 5.371920351148152


def matrix_exp(M) -> np.ndarray:
    """exp(M) by scaling and squaring with a degree-13 Pade approximant."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix_exp needs a square matrix")
    n = M.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix_exp needs finite entries")
    norm = np.linalg.norm(M, 1)
    s = max(0, int(math.ceil(math.log2(norm / _THETA13)))) if norm > 0 else 0
    X = M / 2.0**s
    b = _PADE13
    I = np.eye(n)
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2) + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * I)
    V = X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * I
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def second_order_plant(omega_n: float = 2 * math.pi * 10.0, zeta: float = 0.015, dc_gain: float = 1.0):
    """Mass-spring-damper with states [position, velocity].

    Returns the model together with the physical (m, c, k) it was built from,
    normalized so that k = 1/dc_gain.
    """
    k = 1.0 / dc_gain
    m = k / omega_n**2
    c = 2 * zeta * math.sqrt(k * m)
    A = [[0.0, 1.0], [-k / m, -c / m]]
    B = [[0.0], [1.0 / m]]
    C = [[1.0, 0.0]]
    return StateSpaceModel(A, B, C, [[0.0]]), (m, c, k)
