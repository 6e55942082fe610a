"""Model parameters, parity sectors and shared numerical defaults."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from enum import Enum

# absolute guard distance (in E) around every pole of G
EPS_POLE = 1e-8
DEFAULT_TOL = 1e-10
DEFAULT_MAX_TERMS = 20000
EXCEPTIONAL_MAX_TERMS = 50000
SQRT2 = math.sqrt(2.0)


def max_terms_default(fallback: int = DEFAULT_MAX_TERMS) -> int:
    """Series term cap, overridable through ``DICKE2_MAX_TERMS``."""
    raw = os.environ.get("DICKE2_MAX_TERMS")
    if raw is None or raw.strip() == "":
        return fallback
    cap = int(raw)
    if cap < 256:
        raise ValueError(f"DICKE2_MAX_TERMS must be >= 256, got {cap}")
    return cap


class Parity(Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def sign(self) -> int:
        return 1 if self is Parity.EVEN else -1

    @property
    def other(self) -> "Parity":
        return Parity.ODD if self is Parity.EVEN else Parity.EVEN

    def bracket(self, m: int) -> int:
        """``1 + s(-1)^m``: 2 when ``m`` matches the sector, else 0."""
        return 2 if (m % 2 == 0) == (self is Parity.EVEN) else 0

    def matches(self, n: int) -> bool:
        return self.bracket(n) == 2

    @classmethod
    def parse(cls, value: "Parity | str | int") -> "Parity":
        if isinstance(value, Parity):
            return value
        if value in (1, "+", "even", "EVEN", "+1"):
            return cls.EVEN
        if value in (-1, "-", "odd", "ODD", "-1"):
            return cls.ODD
        raise ValueError(f"unknown parity {value!r}")

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ModelParams:
    """Two-qubit Rabi model in units where the cavity frequency is 1.

    ``delta`` is the qubit splitting and ``g`` the rotated-frame coupling,
    related to the bare coupling by ``g = 2*lambda/sqrt(2)``.
    """

    delta: float
    g: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and math.isfinite(self.g)):
            raise ValueError("delta and g must be finite")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if self.g <= 0:
            raise ValueError(f"g must be > 0, got {self.g}")

    @classmethod
    def from_lambda(cls, delta: float, lam: float) -> "ModelParams":
        return cls(delta, 2.0 * lam / SQRT2)

    @property
    def lam(self) -> float:
        return self.g * SQRT2 / 2.0

    @property
    def g2(self) -> float:
        return self.g * self.g

    @property
    def coupling(self) -> float:
        """Qubit coupling ``Delta/sqrt(2)`` of the rotated matrix form."""
        return self.delta / SQRT2
