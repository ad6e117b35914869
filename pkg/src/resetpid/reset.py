"""Reset elements and reset controllers.

A reset element flows as its base linear system and, whenever its input
crosses zero, jumps ``x <- gamma * x``. A reset controller is a reset element
followed in series by a linear part and a proportional gain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .lti import RationalTF, StateSpaceModel, series, tf_to_ss

__all__ = [
    "ResetElement",
    "ResetController",
    "clegg",
    "gfore",
    "reset_taming_pole",
    "apply_reset",
]


@dataclass(frozen=True)
class ResetElement:
    base: StateSpaceModel
    gamma: float = 0.0

    def __post_init__(self):
        if not -1.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [-1, 1], got {self.gamma}")
        if self.base.n_inputs != 1 or self.base.n_outputs != 1:
            raise ValueError("reset elements are SISO")
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def n_r(self) -> int:
        return self.base.n_states

    @property
    def reset_matrix(self) -> np.ndarray:
        return self.gamma * np.eye(self.n_r)

    def with_gamma(self, gamma: float) -> "ResetElement":
        return ResetElement(self.base, gamma)

    def to_dict(self) -> dict:
        return {"base": self.base.to_dict(), "gamma": self.gamma}

    @classmethod
    def from_dict(cls, d: dict) -> "ResetElement":
        return cls(StateSpaceModel.from_dict(d["base"]), d["gamma"])


def apply_reset(state, element: ResetElement) -> np.ndarray:
    state = np.asarray(state, dtype=float)
    if state.shape != (element.n_r,):
        raise ValueError(f"state has shape {state.shape}, element has {element.n_r} reset states")
    return element.gamma * state


def clegg(gamma: float = 0.0) -> ResetElement:
    """Clegg integrator 1/s (gamma=0 is the classic full reset)."""
    return ResetElement(StateSpaceModel([[0.0]], [[1.0]], [[1.0]], [[0.0]]), gamma)


def gfore(omega_r: float, gamma: float = 0.0) -> ResetElement:
    """First-order reset element with unit DC gain, base 1/(s/omega_r + 1)."""
    if not omega_r > 0:
        raise ValueError(f"corner frequency must be positive, got {omega_r}")
    return ResetElement(StateSpaceModel([[-omega_r]], [[omega_r]], [[1.0]], [[0.0]]), gamma)


def reset_taming_pole(omega_pole: float, gamma: float = 0.0) -> ResetElement:
    """The lead filter's taming pole made resettable. Same realization as :func:`gfore`."""
    return gfore(omega_pole, gamma)


@dataclass(frozen=True)
class ResetController:
    """Reset part -> linear part -> gain ``kp``.

    ``factors`` optionally records the rational factors whose product is the
    linear part; it is carried for serialization and reporting only.
    """

    resetting: ResetElement
    linear: StateSpaceModel
    kp: float = 1.0
    factors: tuple = field(default=(), compare=False)
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.linear.n_inputs != 1 or self.linear.n_outputs != 1:
            raise ValueError("linear part must be SISO")
        object.__setattr__(self, "kp", float(self.kp))

    @classmethod
    def from_factors(
        cls,
        resetting: ResetElement,
        factors,
        kp: float = 1.0,
        label: str = "",
    ) -> "ResetController":
        """Build the linear part from rational factors, realizing their product."""
        factors = tuple(factors)
        linear = tf_to_ss(RationalTF.product(factors))
        return cls(resetting, linear, kp, factors, label)

    @property
    def gamma(self) -> float:
        return self.resetting.gamma

    @property
    def n_r(self) -> int:
        return self.resetting.n_r

    @property
    def is_linear(self) -> bool:
        return self.n_r == 0 or self.gamma == 1.0

    def composite(self) -> StateSpaceModel:
        """Base linear realization, state ordered [x_r; x_nr]."""
        return series(self.resetting.base, self.linear.scaled(self.kp))

    def with_kp(self, kp: float) -> "ResetController":
        return ResetController(self.resetting, self.linear, kp, self.factors, self.label)

    def with_gamma(self, gamma: float) -> "ResetController":
        return ResetController(
            self.resetting.with_gamma(gamma), self.linear, self.kp, self.factors, self.label
        )

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "kp": self.kp,
            "gamma": self.gamma,
            "resetting": self.resetting.to_dict(),
            "linear": self.linear.to_dict(),
            "linear_factors": [f.to_dict() for f in self.factors],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ResetController":
        return cls(
            ResetElement.from_dict(d["resetting"]),
            StateSpaceModel.from_dict(d["linear"]),
            d["kp"],
            tuple(RationalTF.from_dict(f) for f in d.get("linear_factors", [])),
            d.get("label", ""),
        )

    @classmethod
    def from_json(cls, text: str) -> "ResetController":
        return cls.from_dict(json.loads(text))
