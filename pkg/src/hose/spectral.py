"""Spectral shrinkage functions and the plans that combine them across modes.

Each function maps the vector of one mode's singular values ``s`` (sorted,
decreasing, positive) to shrunken values.  ``jacobian_diag`` returns the
diagonal of the Jacobian of that map, which for elementwise families is just
the derivative of the scalar function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class SpectralFunction:
    """Base class; subclasses are frozen dataclasses."""

    family = "base"
    elementwise = True

    def __call__(self, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian_diag(self, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def threshold(self):
        """Location of the kink for thresholding families, else ``None``."""
        return None

    def params(self) -> dict:
        return {}


@dataclass(frozen=True)
class Identity(SpectralFunction):
    family = "identity"

    def __call__(self, s):
        return np.array(s, dtype=np.float64)

    def jacobian_diag(self, s):
        return np.ones_like(s, dtype=np.float64)


@dataclass(frozen=True)
class Truncation(SpectralFunction):
    """Keep the ``rank`` largest singular values."""

    rank: int
    family = "truncation"

    def _mask(self, s):
        return (np.arange(len(s)) < self.rank).astype(np.float64)

    def __call__(self, s):
        return s * self._mask(s)

    def jacobian_diag(self, s):
        return self._mask(s)

    def params(self):
        return {"rank": self.rank}


@dataclass(frozen=True)
class SoftThreshold(SpectralFunction):
    """``(s - lam)_+``; ``lam`` may be negative."""

    lam: float
    family = "soft_threshold"

    def __call__(self, s):
        return np.maximum(s - self.lam, 0.0)

    def jacobian_diag(self, s):
        return (s > self.lam).astype(np.float64)

    def threshold(self):
        return self.lam

    def params(self):
        return {"lam": self.lam}


@dataclass(frozen=True)
class HardThreshold(SpectralFunction):
    lam: float
    family = "hard_threshold"

    def __call__(self, s):
        return s * (s >= self.lam)

    def jacobian_diag(self, s):
        return (s >= self.lam).astype(np.float64)

    def threshold(self):
        return self.lam

    def params(self):
        return {"lam": self.lam}


@dataclass(frozen=True)
class EfronMorris(SpectralFunction):
    """``s - lam / s``, left unclamped."""

    lam: float
    family = "efron_morris"

    def __call__(self, s):
        return s - self.lam / s

    def jacobian_diag(self, s):
        return 1.0 + self.lam / s**2

    def params(self):
        return {"lam": self.lam}


@dataclass(frozen=True)
class AdaptiveTrace(SpectralFunction):
    """``s * (1 - lam^gamma / s^gamma)_+`` for ``lam >= 0``."""

    lam: float
    gamma: float
    family = "adaptive_trace"

    def __post_init__(self):
        if self.lam < 0 or self.gamma <= 0:
            raise ValueError("adaptive_trace needs lam >= 0 and gamma > 0")

    def __call__(self, s):
        ratio = (self.lam / s) ** self.gamma
        return s * np.maximum(1.0 - ratio, 0.0)

    def jacobian_diag(self, s):
        ratio = (self.lam / s) ** self.gamma
        return np.where(s > self.lam, 1.0 - (1.0 - self.gamma) * ratio, 0.0)

    def threshold(self):
        return self.lam

    def params(self):
        return {"lam": self.lam, "gamma": self.gamma}


@dataclass(frozen=True)
class Stein(SpectralFunction):
    """``(1 - lam / sum(s^2)) * s``; every output depends on the whole spectrum."""

    lam: float
    family = "stein"
    elementwise = False

    def __call__(self, s):
        return (1.0 - self.lam / np.sum(s**2)) * s

    def jacobian_diag(self, s):
        total = np.sum(s**2)
        return 1.0 - self.lam / total + 2.0 * self.lam * s**2 / total**2

    def params(self):
        return {"lam": self.lam}


@dataclass(frozen=True)
class ImprovedEfronMorris(SpectralFunction):
    """``(1 - gamma / sum(s^2)) * s - lam / s``."""

    gamma: float
    lam: float
    family = "improved_em"
    elementwise = False

    def __call__(self, s):
        return (1.0 - self.gamma / np.sum(s**2)) * s - self.lam / s

    def jacobian_diag(self, s):
        total = np.sum(s**2)
        return (1.0 - self.gamma / total + 2.0 * self.gamma * s**2 / total**2
                + self.lam / s**2)

    def params(self):
        return {"gamma": self.gamma, "lam": self.lam}


FAMILIES = {
    cls.family: cls
    for cls in (Identity, Truncation, SoftThreshold, HardThreshold, EfronMorris,
                AdaptiveTrace, Stein, ImprovedEfronMorris)
}


@dataclass(frozen=True)
class ShrinkagePlan:
    """One spectral function per mode and an overall scale ``c > 0``."""

    per_mode: tuple
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "per_mode", tuple(self.per_mode))
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        for f in self.per_mode:
            if not isinstance(f, SpectralFunction):
                raise TypeError(f"{f!r} is not a SpectralFunction")

    def __len__(self):
        return len(self.per_mode)

    @property
    def elementwise(self) -> bool:
        return all(f.elementwise for f in self.per_mode)

    def with_scale(self, scale: float) -> "ShrinkagePlan":
        return ShrinkagePlan(self.per_mode, scale)

    @classmethod
    def identity(cls, ndim: int) -> "ShrinkagePlan":
        return cls((Identity(),) * ndim)

    @classmethod
    def soft(cls, lams: Sequence[float], scale: float = 1.0) -> "ShrinkagePlan":
        return cls(tuple(SoftThreshold(float(x)) for x in lams), scale)

    @classmethod
    def truncation(cls, ranks: Sequence[int]) -> "ShrinkagePlan":
        return cls(tuple(Truncation(int(r)) for r in ranks))

    def describe(self) -> str:
        parts = []
        for f in self.per_mode:
            args = ",".join(f"{k}={v:g}" for k, v in f.params().items())
            parts.append(f"{f.family}({args})")
        return ";".join(parts) + f";scale={self.scale:g}"


@dataclass(frozen=True)
class CoreShrinkagePlan:
    """Elementwise soft-thresholding of the core at level ``lam``."""

    lam: float = field(default=0.0)

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("core threshold must be nonnegative")

    def __call__(self, core):
        return np.sign(core) * np.maximum(np.abs(core) - self.lam, 0.0)

    def derivative(self, core):
        return (np.abs(core) > self.lam).astype(np.float64)
