"""Scale parameters (a, b, hbar) and the state label |n, X, P, b>."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = ["ScaleParam", "PhaseIndex", "dispersions"]


@dataclass(frozen=True)
class ScaleParam:
    """Coordinate half-width ``a`` and reduced Planck constant ``hbar``.

    The momentum half-width is always derived, ``b = hbar / (2 a)``, so the
    minimum-uncertainty relation ``a * b = hbar / 2`` holds by construction.
    """

    a: float
    hbar: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise ValueError(f"a must be positive and finite, got {self.a!r}")
        if not (math.isfinite(self.hbar) and self.hbar > 0):
            raise ValueError(f"hbar must be positive and finite, got {self.hbar!r}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "hbar", float(self.hbar))

    @classmethod
    def from_b(cls, b: float, hbar: float = 1.0) -> "ScaleParam":
        if not b > 0:
            raise ValueError(f"b must be positive, got {b!r}")
        return cls(hbar / (2.0 * b), hbar)

    @property
    def b(self) -> float:
        return self.hbar / (2.0 * self.a)

    @property
    def A(self) -> float:
        """Coordinate variance unit a**2."""
        return self.a * self.a

    @property
    def B(self) -> float:
        """Momentum variance unit b**2."""
        b = self.b
        return b * b

    def to_dict(self) -> dict:
        return {"a": self.a, "hbar": self.hbar}

    @classmethod
    def from_dict(cls, d: dict) -> "ScaleParam":
        return cls(float(d["a"]), float(d.get("hbar", 1.0)))


@dataclass(frozen=True)
class PhaseIndex:
    """Label (n, X, P, scale) of a harmonic Hermite-Gaussian state."""

    n: int
    X: float = 0.0
    P: float = 0.0
    scale: ScaleParam = field(default_factory=lambda: ScaleParam(1.0))

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"n must be a non-negative integer, got {self.n!r}")
        if not (math.isfinite(self.X) and math.isfinite(self.P)):
            raise ValueError("X and P must be finite")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "X", float(self.X))
        object.__setattr__(self, "P", float(self.P))

    def with_n(self, n: int) -> "PhaseIndex":
        return PhaseIndex(n, self.X, self.P, self.scale)

    def to_dict(self) -> dict:
        return {"n": self.n, "X": self.X, "P": self.P, **self.scale.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "PhaseIndex":
        return cls(
            int(d["n"]),
            float(d.get("X", 0.0)),
            float(d.get("P", 0.0)),
            ScaleParam.from_dict(d),
        )


def dispersions(idx: PhaseIndex) -> tuple[float, float]:
    """Coordinate and momentum variances ``((2n+1) a**2, (2n+1) b**2)``."""
    k = 2 * idx.n + 1
    return k * idx.scale.A, k * idx.scale.B
