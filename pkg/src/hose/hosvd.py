"""Higher-order SVD in the reparameterized form X = (U_1..U_K) . (D_1..D_K) . V."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateSpectrum, RankDeficient
from .tensor import as_tensor, matricize, scale_modes, tucker_product

ZERO_ATOL = 1e-10
TIE_RTOL = 1e-10


def _fix_signs(u: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column made positive; argmax picks the lowest row on ties
    rows = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[rows, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs


@dataclass(frozen=True, eq=False)
class Hosvd:
    """HOSVD of a full-multilinear-rank tensor.

    Attributes
    ----------
    factors : tuple of ndarray
        Orthogonal ``p_k x p_k`` matrices ``U_k``.
    sigmas : tuple of ndarray
        Mode-specific singular values, strictly decreasing and positive.
    core : ndarray
        All-orthogonal core ``S = (U_1^T, ..., U_K^T) . X``.
    data : ndarray
        The decomposed tensor itself, kept for residual computations.
    """

    factors: tuple
    sigmas: tuple
    core: np.ndarray
    data: np.ndarray

    @property
    def dims(self) -> tuple:
        return self.core.shape

    @property
    def ndim(self) -> int:
        return self.core.ndim

    @property
    def size(self) -> int:
        return self.core.size

    @cached_property
    def normalized_core(self) -> np.ndarray:
        """``V = (D_1^{-1}, ..., D_K^{-1}) . S``."""
        return scale_modes(self.core, [1.0 / s for s in self.sigmas])

    @cached_property
    def core_sq(self) -> np.ndarray:
        return self.core**2

    @cached_property
    def c_array(self) -> np.ndarray:
        """The divergence weight array; see :func:`hose.risk.c_array`."""
        from .kernels import c_array

        return c_array(self.core, self.sigmas)


def mode_singular_values(t) -> list:
    """Singular values of every unfolding, without any rank checks."""
    t = as_tensor(t)
    return [np.linalg.svd(matricize(t, k), compute_uv=False) for k in range(t.ndim)]


def hosvd(t, atol: float = ZERO_ATOL, rtol: float = TIE_RTOL) -> Hosvd:
    """Compute the HOSVD of ``t``.

    Parameters
    ----------
    t : array_like
        Data tensor; every unfolding must have full row rank.
    atol : float
        A mode is rank deficient when its smallest singular value is
        ``<= atol * sigma_1``.
    rtol : float
        A mode is degenerate when two squared singular values differ by
        ``<= rtol * sigma_1**2``.  Such ties make the divergence undefined.

    Raises
    ------
    RankDeficient, DegenerateSpectrum
    """
    t = as_tensor(t)
    factors, sigmas = [], []
    for k in range(t.ndim):
        xk = matricize(t, k)
        if xk.shape[0] > xk.shape[1]:
            raise RankDeficient(
                f"mode {k} has size {xk.shape[0]} > {xk.shape[1]}, so its unfolding "
                "cannot have full row rank"
            )
        u, s, _ = np.linalg.svd(xk, full_matrices=True)
        if s[0] <= 0.0 or s[-1] <= atol * s[0]:
            raise RankDeficient(
                f"mode {k} smallest singular value {s[-1]:.3e} vs largest {s[0]:.3e}"
            )
        s2 = s**2
        if s.size > 1 and np.min(s2[:-1] - s2[1:]) <= rtol * s2[0]:
            raise DegenerateSpectrum(f"mode {k} has tied singular values")
        factors.append(_fix_signs(u))
        sigmas.append(s)
    core = tucker_product(t, [u.T for u in factors])
    return Hosvd(tuple(factors), tuple(sigmas), core, t)


def reconstruct(d: Hosvd) -> np.ndarray:
    return tucker_product(d.core, list(d.factors))


def multilinear_rank(t, tol: float = 1e-8) -> tuple:
    """Count singular values above ``tol * sigma_1`` in every unfolding."""
    ranks = []
    for s in mode_singular_values(t):
        ranks.append(int(np.sum(s > tol * s[0])) if s[0] > 0 else 0)
    return tuple(ranks)
