"""Pure numpy implementations of the hot kernels.

These are the reference versions; ``_kernels.pyx`` mirrors them loop by loop.
"""

import numpy as np


def gap_matrix(s: np.ndarray) -> np.ndarray:
    """``G[i, j] = 1 / (s_i^2 - s_j^2)`` off the diagonal, 0 on it."""
    s2 = s**2
    diff = s2[:, None] - s2[None, :]
    np.fill_diagonal(diff, 1.0)
    g = 1.0 / diff
    np.fill_diagonal(g, 0.0)
    return g


def _along(v, k, ndim):
    shape = [1] * ndim
    shape[k] = -1
    return v.reshape(shape)


def c_array(core, sigmas):
    """Divergence weight array built from the core and the mode spectra.

    ``C[i] = 1 + sum_k sum_{j != i_k} S[..j..]^2 / (s_{i_k}^2 - s_j^2)
    - S[i]^2 sum_k (1 / s_{i_k}^2 + sum_{m != i_k} 1 / (s_m^2 - s_{i_k}^2))``
    """
    core = np.asarray(core, dtype=np.float64)
    s2 = core**2
    out = np.ones_like(s2)
    for k, s in enumerate(sigmas):
        g = gap_matrix(s)
        out += np.moveaxis(np.tensordot(g, s2, axes=(1, k)), 0, k)
        out -= s2 * _along(1.0 / s**2 - g.sum(axis=1), k, core.ndim)
    return out


def spectral_sums(core_sq, c_arr, phis, psis):
    """Return ``(div, a, b)`` for per-mode weights ``phi_k = f_k / s_k``.

    ``div = sum(C * Phi) + sum_k sum(S^2 * psi_k * prod_{j != k} phi_j)``,
    ``a = sum(Phi^2 * S^2)`` and ``b = sum(Phi * S^2)`` where ``Phi`` is the
    outer product of the ``phi_k``.
    """
    ndim = core_sq.ndim
    outer = np.ones_like(core_sq)
    for k, ph in enumerate(phis):
        outer = outer * _along(ph, k, ndim)
    div = float(np.sum(c_arr * outer))
    for k in range(ndim):
        excl = core_sq * _along(psis[k], k, ndim)
        for j, ph in enumerate(phis):
            if j != k:
                excl = excl * _along(ph, j, ndim)
        div += float(np.sum(excl))
    weighted = outer * core_sq
    return div, float(np.sum(weighted * outer)), float(np.sum(weighted))
