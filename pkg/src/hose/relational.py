"""Shrinkage of interaction effects in multiway proportion data.

Proportions are variance-stabilized with ``sqrt(n) * arcsin(2 Y - 1)``, a
main-effects ANOVA is fitted, and only the residual (interaction) tensor is
shrunk before the pieces are added back together.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .hosvd import hosvd
from .shrinkage import apply_spectral, truncated_hosvd
from .tensor import as_tensor, frobenius_norm_sq
from .tuning import TuningResult, optimize_soft_threshold, select_rank

METHODS = ("msst", "truncated_hosvd")


def _check_props(y, n):
    y = as_tensor(y)
    n = np.broadcast_to(np.asarray(n, dtype=np.float64), y.shape)
    if np.any((y < 0) | (y > 1)):
        raise ValueError("proportions must lie in [0, 1]")
    if np.any(n < 1):
        raise ValueError("counts must be at least 1")
    return y, n


def arcsine_transform(y, n) -> np.ndarray:
    """``sqrt(n) * arcsin(2 y - 1)``; approximately ``N(theta, 1)`` for binomial ``y``."""
    y, n = _check_props(y, n)
    return np.sqrt(n) * np.arcsin(np.clip(2.0 * y - 1.0, -1.0, 1.0))


def inverse_arcsine(theta, n) -> np.ndarray:
    """Map back to proportions, clamping ``theta / sqrt(n)`` to ``[-pi/2, pi/2]``."""
    theta = as_tensor(theta)
    n = np.broadcast_to(np.asarray(n, dtype=np.float64), theta.shape)
    z = np.clip(theta / np.sqrt(n), -np.pi / 2, np.pi / 2)
    return (np.sin(z) + 1.0) / 2.0


@dataclass(frozen=True)
class AnovaDecomposition:
    """``x == mean + sum_k effects[k] (broadcast along mode k) + residual``."""

    mean: float
    effects: tuple
    residual: np.ndarray

    @property
    def dims(self) -> tuple:
        return self.residual.shape

    def main_effects_fit(self) -> np.ndarray:
        out = np.full(self.dims, self.mean)
        for k, e in enumerate(self.effects):
            shape = [1] * len(self.dims)
            shape[k] = -1
            out = out + e.reshape(shape)
        return out


def anova_decompose(x) -> AnovaDecomposition:
    """Least-squares main-effects fit of a ``K >= 2`` way array.

    The residual ``x - sum_k m_k + (K - 1) mean`` (``m_k`` the average over
    every mode but ``k``) has zero sums over all modes but any single one,
    i.e. ``R_(k) 1 = 0``.
    """
    x = as_tensor(x)
    if x.ndim < 2:
        raise ShapeError("ANOVA needs at least two modes")
    mu = float(np.mean(x))
    effects = []
    for k in range(x.ndim):
        others = tuple(j for j in range(x.ndim) if j != k)
        effects.append(np.mean(x, axis=others) - mu)
    dec = AnovaDecomposition(mu, tuple(effects), np.zeros_like(x))
    residual = x - dec.main_effects_fit()
    return AnovaDecomposition(mu, tuple(effects), residual)


@dataclass(frozen=True)
class PipelineResult:
    fitted: np.ndarray
    anova: AnovaDecomposition
    shrunk_residual: np.ndarray
    tuning: TuningResult | None

    @property
    def residual_norm(self) -> float:
        return float(np.sqrt(frobenius_norm_sq(self.anova.residual)))

    @property
    def shrunk_norm(self) -> float:
        return float(np.sqrt(frobenius_norm_sq(self.shrunk_residual)))


def shrink_residual_pipeline(x, method: str = "msst", tau2: float = 1.0,
                             objective: str = "sure") -> PipelineResult:
    """Fit main effects, SURE-shrink the residual, and recombine.

    Parameters
    ----------
    x : array_like
        Data on the (approximately unit-variance) transformed scale.
    method : {"msst", "truncated_hosvd"}
    tau2 : float
        Noise variance of ``x``; 1 after :func:`arcsine_transform`.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    anova = anova_decompose(x)
    fit = anova.main_effects_fit()
    if not np.any(anova.residual):
        return PipelineResult(fit, anova, anova.residual.copy(), None)
    d = hosvd(anova.residual)
    if method == "msst":
        tuned = optimize_soft_threshold(d, tau2, objective=objective)
        shrunk = apply_spectral(d, tuned.plan)
    else:
        tuned = select_rank(d, tau2, objective=objective)
        shrunk = truncated_hosvd(d, tuned.ranks)
    return PipelineResult(fit + shrunk, anova, shrunk, tuned)
