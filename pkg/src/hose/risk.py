"""Closed-form divergences and Stein's unbiased risk estimate (SURE).

All closed forms work in the coordinates of the HOSVD.  With
``phi_k = f^k(s^k) / s^k`` and ``psi_k = J^k(s^k) / (s^k)^2`` (``J^k`` the
derivative, or the Jacobian diagonal for spectrum-wide functions) the
divergence of ``c (U) . (f(D) D^{-1}) . S`` is

    c * [ sum(C * phi_1 x ... x phi_K)
          + sum_k sum(S^2 * phi_1 x .. psi_k .. x phi_K) ]

with ``C`` from :func:`c_array`.  :func:`divergence_fd` is an independent
finite-difference oracle for all of these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .errors import ThresholdAtKink
from .hosvd import Hosvd
from .shrinkage import apply_core_shrinkage, apply_spectral, matrix_svd
from .spectral import CoreShrinkagePlan, ShrinkagePlan, SpectralFunction
from .tensor import as_tensor, frobenius_norm_sq

KINK_RTOL = 1e-12
# GSURE is undefined once 1 - div/p drops to rounding level
GSURE_MARGIN = 1e-9


@dataclass(frozen=True)
class RiskEstimate:
    fit: float
    divergence: float
    sure: float
    gsure: float
    gsure_defined: bool
    tau2: float
    size: int


def risk_estimate(fit: float, divergence: float, tau2: float, size: int) -> RiskEstimate:
    """Assemble SURE ``fit + 2 tau2 div - p tau2`` and GSURE ``fit / (1 - div/p)^2``.

    GSURE is reported as NaN, with ``gsure_defined`` false, when the
    divergence is not below ``p`` (up to a relative ``GSURE_MARGIN``).
    """
    sure = fit + 2.0 * tau2 * divergence - size * tau2
    defined = 1.0 - divergence / size > GSURE_MARGIN
    gsure = fit / (1.0 - divergence / size) ** 2 if defined else math.nan
    return RiskEstimate(fit, divergence, sure, gsure, defined, tau2, size)


def c_array(d: Hosvd) -> np.ndarray:
    """The array ``C`` of the divergence formula (cached on the decomposition)."""
    return d.c_array


def check_kinks(d: Hosvd, plan: ShrinkagePlan) -> None:
    for k, (f, s) in enumerate(zip(plan.per_mode, d.sigmas)):
        lam = f.threshold()
        if lam is not None and np.any(np.abs(s - lam) <= KINK_RTOL * s[0]):
            raise ThresholdAtKink(f"mode {k} threshold {lam!r} sits on a singular value")


def plan_weights(d: Hosvd, plan: ShrinkagePlan):
    """Return ``(phis, psis)`` for ``plan`` at the realized spectra."""
    if len(plan) != d.ndim:
        raise ValueError(f"plan has {len(plan)} modes, tensor has {d.ndim}")
    phis = [f(s) / s for f, s in zip(plan.per_mode, d.sigmas)]
    psis = [f.jacobian_diag(s) / s**2 for f, s in zip(plan.per_mode, d.sigmas)]
    return phis, psis


def _divergence(d: Hosvd, plan: ShrinkagePlan) -> float:
    check_kinks(d, plan)
    phis, psis = plan_weights(d, plan)
    div, _, _ = kernels.spectral_sums(d.core_sq, d.c_array, phis, psis)
    return plan.scale * div


def divergence_spectral(d: Hosvd, plan: ShrinkagePlan) -> float:
    """Divergence of a higher-order spectral estimator with elementwise functions.

    Raises
    ------
    TypeError
        If a mode uses a spectrum-wide function; use
        :func:`divergence_full_spectrum` for those.
    ThresholdAtKink
        If a threshold coincides with a singular value.
    """
    if not plan.elementwise:
        raise TypeError("plan has spectrum-wide functions; use divergence_full_spectrum")
    return _divergence(d, plan)


def divergence_full_spectrum(d: Hosvd, plan: ShrinkagePlan) -> float:
    """Divergence for plans whose functions may use a mode's whole spectrum.

    Only the diagonal of each function's Jacobian enters, so for elementwise
    plans this coincides with :func:`divergence_spectral`.
    """
    return _divergence(d, plan)


def sure_spectral(d: Hosvd, plan: ShrinkagePlan, tau2: float) -> RiskEstimate:
    if not tau2 > 0:
        raise ValueError("tau2 must be positive")
    div = divergence_full_spectrum(d, plan)
    fit = frobenius_norm_sq(apply_spectral(d, plan) - d.data)
    return risk_estimate(fit, div, tau2, d.size)


def divergence_core_shrinkage(d: Hosvd, plan: CoreShrinkagePlan) -> float:
    """Divergence of ``U . g(S)`` for elementwise soft-thresholding ``g`` of the core."""
    core = d.core
    amax = float(np.max(np.abs(core)))
    if np.any(np.abs(np.abs(core) - plan.lam) <= KINK_RTOL * amax):
        raise ThresholdAtKink(f"core threshold {plan.lam!r} sits on a core entry")
    s2 = d.core_sq
    cross = np.ones_like(core)
    gap_sums = np.zeros_like(core)
    for k, s in enumerate(d.sigmas):
        g = kernels.gap_matrix(s)
        cross += np.moveaxis(np.tensordot(g, s2, axes=(1, k)), 0, k)
        shape = [1] * core.ndim
        shape[k] = -1
        gap_sums = gap_sums + g.sum(axis=1).reshape(shape)
    shrunk = plan(core)
    return float(np.sum(core * shrunk * gap_sums + plan.derivative(core) * cross))


def sure_core_shrinkage(d: Hosvd, plan: CoreShrinkagePlan, tau2: float) -> RiskEstimate:
    if not tau2 > 0:
        raise ValueError("tau2 must be positive")
    div = divergence_core_shrinkage(d, plan)
    fit = frobenius_norm_sq(apply_core_shrinkage(d, plan) - d.data)
    return risk_estimate(fit, div, tau2, d.size)


def divergence_fd(x, estimator: Callable[[np.ndarray], np.ndarray], eps: float = 1e-5) -> float:
    """Central finite-difference divergence over the standard basis.

    Makes ``2 p`` calls to ``estimator``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    x = as_tensor(x)
    flat = x.reshape(-1)
    total = 0.0
    for i in range(flat.size):
        up = flat.copy()
        up[i] += eps
        down = flat.copy()
        down[i] -= eps
        hi = np.asarray(estimator(up.reshape(x.shape))).reshape(-1)[i]
        lo = np.asarray(estimator(down.reshape(x.shape))).reshape(-1)[i]
        total += (hi - lo) / (2.0 * eps)
    return float(total)


def matrix_divergence(s: np.ndarray, f: SpectralFunction, n_cols: int) -> float:
    """Divergence of ``X -> U f(D) V^T`` for an ``m x n`` matrix with ``m <= n``.

    ``sum_i f'(s_i) + (n - m) sum_i f(s_i) / s_i
    + 2 sum_{i != j} s_i f(s_i) / (s_i^2 - s_j^2)``
    """
    s = np.asarray(s, dtype=np.float64)
    lam = f.threshold()
    if lam is not None and np.any(np.abs(s - lam) <= KINK_RTOL * s[0]):
        raise ThresholdAtKink(f"threshold {lam!r} sits on a singular value")
    fs = f(s)
    g = kernels.gap_matrix(s)
    return float(
        np.sum(f.jacobian_diag(s))
        + (n_cols - s.size) * np.sum(fs / s)
        + 2.0 * np.sum((s * fs)[:, None] * g)
    )


def sure_matrix(x, f: SpectralFunction, tau2: float, mode: int = 0) -> RiskEstimate:
    """SURE of a matrix spectral estimator applied to one unfolding."""
    if not tau2 > 0:
        raise ValueError("tau2 must be positive")
    x = as_tensor(x)
    u, s, vt = matrix_svd(x, mode)
    div = matrix_divergence(s, f, vt.shape[1])
    fit = float(np.sum((f(s) - s) ** 2))
    return risk_estimate(fit, div, tau2, x.size)
