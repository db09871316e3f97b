"""Higher-order spectral estimators, core-element shrinkage and matrix/vector baselines."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import InvalidRank, RankDeficient, ShapeError
from .hosvd import ZERO_ATOL, Hosvd
from .spectral import (
    CoreShrinkagePlan,
    EfronMorris,
    ShrinkagePlan,
    SoftThreshold,
    SpectralFunction,
)
from .tensor import as_tensor, dematricize, frobenius_norm_sq, matricize, scale_modes, tucker_product


def mode_weights(d: Hosvd, plan: ShrinkagePlan) -> list:
    """Per-mode ratios ``f^k(s^k) / s^k``."""
    if len(plan) != d.ndim:
        raise ShapeError(f"plan has {len(plan)} modes, tensor has {d.ndim}")
    return [f(s) / s for f, s in zip(plan.per_mode, d.sigmas)]


def apply_spectral(d: Hosvd, plan: ShrinkagePlan) -> np.ndarray:
    """``c (U_1..U_K) . (f^1(D_1) D_1^{-1}, ..., f^K(D_K) D_K^{-1}) . S``."""
    shrunk = scale_modes(d.core, mode_weights(d, plan))
    return plan.scale * tucker_product(shrunk, list(d.factors))


def truncated_hosvd(d: Hosvd, ranks: Sequence[int]) -> np.ndarray:
    """Zero the core outside its leading ``ranks`` corner and map back."""
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != d.ndim or any(not 1 <= r <= n for r, n in zip(ranks, d.dims)):
        raise InvalidRank(f"ranks {ranks} invalid for dims {d.dims}")
    corner = np.zeros_like(d.core)
    sl = tuple(slice(0, r) for r in ranks)
    corner[sl] = d.core[sl]
    return tucker_product(corner, list(d.factors))


def apply_core_shrinkage(d: Hosvd, plan: CoreShrinkagePlan) -> np.ndarray:
    return tucker_product(plan(d.core), list(d.factors))


def james_stein(x, tau2: float) -> np.ndarray:
    """Positive-part James-Stein estimator with the classical ``(p - 2) tau^2``."""
    x = as_tensor(x)
    if x.size < 3:
        raise ShapeError("James-Stein needs at least 3 entries")
    norm_sq = frobenius_norm_sq(x)
    if norm_sq == 0.0:
        return np.zeros_like(x)
    return max(0.0, 1.0 - (x.size - 2) * tau2 / norm_sq) * x


def matrix_svd(x, mode: int = 0, atol: float = ZERO_ATOL):
    """Thin SVD of the mode-``mode`` unfolding, requiring full row rank."""
    xm = matricize(as_tensor(x), mode)
    if xm.shape[0] > xm.shape[1]:
        raise RankDeficient(f"unfolding of shape {xm.shape} is taller than wide")
    u, s, vt = np.linalg.svd(xm, full_matrices=False)
    if s[0] <= 0.0 or s[-1] <= atol * s[0]:
        raise RankDeficient(f"mode {mode} unfolding is rank deficient")
    return u, s, vt


def matrix_spectral(x, f: SpectralFunction, mode: int = 0) -> np.ndarray:
    """Apply a matrix spectral estimator ``U f(D) V^T`` to one unfolding."""
    x = as_tensor(x)
    u, s, vt = matrix_svd(x, mode)
    est = (u * f(s)) @ vt
    return dematricize(est, mode, x.shape)


def matrix_baseline(x, family: str, lam: float, mode: int = 0) -> np.ndarray:
    """Efron-Morris or soft-thresholding applied to the mode-1 unfolding."""
    if family == "efron_morris":
        f = EfronMorris(lam)
    elif family == "soft_threshold":
        if lam < 0:
            raise ValueError("soft-threshold level must be nonnegative")
        f = SoftThreshold(lam)
    else:
        raise ValueError(f"unknown matrix baseline {family!r}")
    return matrix_spectral(x, f, mode)
