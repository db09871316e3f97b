# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``.

Tensors are walked in first-index-fastest order with an explicit index
counter, so any number of modes is supported.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef tuple _spectra(sigmas):
    cdef Py_ssize_t ndim = len(sigmas)
    offsets = np.zeros(ndim + 1, dtype=np.intp)
    for k in range(ndim):
        offsets[k + 1] = offsets[k] + len(sigmas[k])
    flat = np.concatenate([np.asarray(s, dtype=np.float64) for s in sigmas])
    return flat, offsets


def gap_matrix(s):
    s = np.asarray(s, dtype=np.float64)
    cdef double[:] sv = s
    cdef Py_ssize_t n = s.shape[0], i, j
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, :] g = out
    for i in range(n):
        for j in range(n):
            if i != j:
                g[i, j] = 1.0 / (sv[i] * sv[i] - sv[j] * sv[j])
    return out


def _gap_tables(sigmas):
    # flattened per-mode gap matrices, their offsets, and 1/s^2 - row sums
    gaps = [gap_matrix(s) for s in sigmas]
    offsets = np.zeros(len(gaps) + 1, dtype=np.intp)
    offsets[1:] = np.cumsum([g.size for g in gaps])
    rows = np.concatenate([
        1.0 / np.asarray(s, dtype=np.float64)**2 - g.sum(axis=1)
        for s, g in zip(sigmas, gaps)
    ])
    return np.concatenate([g.ravel() for g in gaps]), offsets, rows


def c_array(core, sigmas):
    core = np.asarray(core, dtype=np.float64)
    cdef Py_ssize_t ndim = core.ndim
    dims_arr = np.asarray(core.shape, dtype=np.intp)
    s2_arr = np.ascontiguousarray((core**2).ravel(order="F"))
    gaps_arr, goff_arr, rows_arr = _gap_tables(sigmas)
    roff_arr = np.zeros(ndim + 1, dtype=np.intp)
    roff_arr[1:] = np.cumsum(core.shape)

    cdef double[:] s2 = s2_arr
    cdef double[:] gaps = gaps_arr
    cdef double[:] rows = rows_arr
    cdef Py_ssize_t[:] dims = dims_arr
    cdef Py_ssize_t[:] goff = goff_arr
    cdef Py_ssize_t[:] roff = roff_arr
    cdef Py_ssize_t p = s2_arr.shape[0]
    out_arr = np.empty(p, dtype=np.float64)
    cdef double[:] out = out_arr

    cdef Py_ssize_t *idx = <Py_ssize_t *> malloc(ndim * sizeof(Py_ssize_t))
    cdef Py_ssize_t *stride = <Py_ssize_t *> malloc(ndim * sizeof(Py_ssize_t))
    cdef Py_ssize_t n_flat, k, j, ik, pk, base, grow
    cdef double val, acc, sq
    try:
        for k in range(ndim):
            idx[k] = 0
            stride[k] = 1 if k == 0 else stride[k - 1] * dims[k - 1]
        for n_flat in range(p):
            sq = s2[n_flat]
            val = 1.0
            for k in range(ndim):
                ik = idx[k]
                pk = dims[k]
                base = n_flat - ik * stride[k]
                grow = goff[k] + ik * pk
                acc = 0.0
                for j in range(pk):
                    acc += gaps[grow + j] * s2[base + j * stride[k]]
                val += acc - sq * rows[roff[k] + ik]
            out[n_flat] = val
            k = 0
            while k < ndim:
                idx[k] += 1
                if idx[k] < dims[k]:
                    break
                idx[k] = 0
                k += 1
    finally:
        free(idx)
        free(stride)
    return out_arr.reshape(core.shape, order="F")


def spectral_sums(core_sq, c_arr, phis, psis):
    core_sq = np.asarray(core_sq, dtype=np.float64)
    cdef Py_ssize_t ndim = core_sq.ndim
    dims_arr = np.asarray(core_sq.shape, dtype=np.intp)
    s2_arr = np.ascontiguousarray(core_sq.ravel(order="F"))
    c_flat = np.ascontiguousarray(np.asarray(c_arr, dtype=np.float64).ravel(order="F"))
    phi_arr, off_arr = _spectra(phis)
    psi_arr, _ = _spectra(psis)

    cdef double[:] s2 = s2_arr
    cdef double[:] cc = c_flat
    cdef double[:] phi = phi_arr
    cdef double[:] psi = psi_arr
    cdef Py_ssize_t[:] dims = dims_arr
    cdef Py_ssize_t[:] off = off_arr
    cdef Py_ssize_t p = s2_arr.shape[0]

    cdef Py_ssize_t *idx = <Py_ssize_t *> malloc(ndim * sizeof(Py_ssize_t))
    cdef double *pre = <double *> malloc((ndim + 1) * sizeof(double))
    cdef double *suf = <double *> malloc((ndim + 1) * sizeof(double))
    cdef Py_ssize_t n_flat, k
    cdef double full, sq, div = 0.0, a = 0.0, b = 0.0, ws
    try:
        for k in range(ndim):
            idx[k] = 0
        for n_flat in range(p):
            sq = s2[n_flat]
            pre[0] = 1.0
            for k in range(ndim):
                pre[k + 1] = pre[k] * phi[off[k] + idx[k]]
            suf[ndim] = 1.0
            for k in range(ndim - 1, -1, -1):
                suf[k] = suf[k + 1] * phi[off[k] + idx[k]]
            full = pre[ndim]
            div += cc[n_flat] * full
            for k in range(ndim):
                div += sq * psi[off[k] + idx[k]] * pre[k] * suf[k + 1]
            ws = full * sq
            a += ws * full
            b += ws
            k = 0
            while k < ndim:
                idx[k] += 1
                if idx[k] < dims[k]:
                    break
                idx[k] = 0
                k += 1
    finally:
        free(idx)
        free(pre)
        free(suf)
    return div, a, b
