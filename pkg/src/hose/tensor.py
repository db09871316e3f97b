"""Dense tensor plumbing: unfoldings, mode products, norms and the ``.ten`` file format.

Tensors are plain ``numpy.ndarray`` objects of float64.  Whenever a tensor is
flattened (``vec``, the ``.ten`` format, covariance conventions) the first
index varies fastest, i.e. Fortran order.  With that convention element
``(i_1, ..., i_K)`` of the mode-``k`` unfolding sits in column
``sum_{n != k} i_n * J_n`` with ``J_n = prod_{m < n, m != k} p_m`` (0-based).

Modes are 0-based throughout the Python API.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from .errors import CapacityError, InvalidMode, ShapeError, TensorFormatError

MAX_ENTRIES = 10**8


def as_tensor(x) -> np.ndarray:
    """Validate and convert ``x`` to a float64 array with at least one mode."""
    t = np.asarray(x, dtype=np.float64)
    if t.ndim == 0:
        t = t.reshape(1)
    if any(n < 1 for n in t.shape):
        raise ShapeError(f"all dimensions must be >= 1, got {t.shape}")
    if t.size > MAX_ENTRIES:
        raise CapacityError(f"tensor has {t.size} entries, limit is {MAX_ENTRIES}")
    return t


def _check_mode(ndim: int, mode: int) -> int:
    if not isinstance(mode, (int, np.integer)) or not 0 <= mode < ndim:
        raise InvalidMode(f"mode {mode} out of range for a {ndim}-way tensor")
    return int(mode)


def vec(t: np.ndarray) -> np.ndarray:
    """Flatten with the first index varying fastest."""
    return np.asarray(t).ravel(order="F")


def unvec(values, dims: Sequence[int]) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    dims = tuple(int(n) for n in dims)
    if values.size != int(np.prod(dims)):
        raise ShapeError(f"{values.size} values cannot fill dims {dims}")
    return values.reshape(dims, order="F")


def matricize(t: np.ndarray, mode: int) -> np.ndarray:
    """Mode-``mode`` unfolding, a ``p_k x (p / p_k)`` matrix."""
    t = np.asarray(t)
    mode = _check_mode(t.ndim, mode)
    return np.moveaxis(t, mode, 0).reshape(t.shape[mode], -1, order="F")


def dematricize(m: np.ndarray, mode: int, dims: Sequence[int]) -> np.ndarray:
    """Fold a mode-``mode`` unfolding back into a tensor of shape ``dims``."""
    dims = tuple(int(n) for n in dims)
    mode = _check_mode(len(dims), mode)
    m = np.asarray(m)
    p = int(np.prod(dims))
    if m.ndim != 2 or m.shape != (dims[mode], p // dims[mode]):
        raise ShapeError(
            f"matrix of shape {m.shape} is not a mode-{mode} unfolding of dims {dims}"
        )
    rest = dims[:mode] + dims[mode + 1:]
    return np.moveaxis(m.reshape((dims[mode],) + rest, order="F"), 0, mode)


def mode_multiply(t: np.ndarray, a: np.ndarray, mode: int) -> np.ndarray:
    """Multiply ``t`` along ``mode`` by the matrix ``a``.

    The result's mode-``mode`` unfolding is ``a @ matricize(t, mode)``.
    """
    t = np.asarray(t)
    a = np.asarray(a)
    mode = _check_mode(t.ndim, mode)
    if a.ndim != 2 or a.shape[1] != t.shape[mode]:
        raise ShapeError(
            f"cannot multiply mode {mode} (size {t.shape[mode]}) by a {a.shape} matrix"
        )
    return np.moveaxis(np.tensordot(a, t, axes=(1, mode)), 0, mode)


def scale_modes(t: np.ndarray, weights: Sequence[np.ndarray]) -> np.ndarray:
    """Tucker product with diagonal matrices, given by their diagonals."""
    out = np.asarray(t)
    shape = [1] * out.ndim
    for k, w in enumerate(weights):
        if w is None:
            continue
        shape[k] = -1
        out = out * np.asarray(w).reshape(shape)
        shape[k] = 1
    return out


def tucker_product(t: np.ndarray, matrices: Sequence[np.ndarray | None]) -> np.ndarray:
    """``(A_1, ..., A_K) . t``; ``None`` entries are treated as identities."""
    t = np.asarray(t)
    if len(matrices) != t.ndim:
        raise ShapeError(f"need {t.ndim} matrices, got {len(matrices)}")
    out = t
    for k, a in enumerate(matrices):
        if a is not None:
            out = mode_multiply(out, a, k)
    return out


def frobenius_norm_sq(t: np.ndarray) -> float:
    t = np.asarray(t, dtype=np.float64)
    return float(np.dot(t.ravel(), t.ravel()))


def format_ten(t: np.ndarray) -> str:
    t = as_tensor(t)
    lines = [str(t.ndim), " ".join(str(n) for n in t.shape)]
    lines.extend(format(float(v), ".17g") for v in vec(t))
    return "\n".join(lines) + "\n"


def write_ten(path: str | os.PathLike, t: np.ndarray) -> None:
    """Write a tensor in the ``.ten`` text format.

    Line 1 holds K, line 2 the K dimensions, then one value per line in
    first-index-fastest order.  Values carry 17 significant digits, so
    reading back is bit exact.
    """
    with open(path, "w") as fh:
        fh.write(format_ten(t))


def parse_ten(text: str) -> np.ndarray:
    tokens = text.split()
    if len(tokens) < 1:
        raise TensorFormatError("empty tensor file")
    try:
        ndim = int(tokens[0])
        dims = tuple(int(tok) for tok in tokens[1:1 + ndim])
    except ValueError as exc:
        raise TensorFormatError(f"bad header: {exc}") from None
    if ndim < 1 or len(dims) != ndim or any(n < 1 for n in dims):
        raise TensorFormatError(f"bad header: K={tokens[0]!r}, dims={dims}")
    p = int(np.prod(dims))
    if p > MAX_ENTRIES:
        raise CapacityError(f"tensor has {p} entries, limit is {MAX_ENTRIES}")
    body = tokens[1 + ndim:]
    if len(body) != p:
        raise TensorFormatError(f"expected {p} values, found {len(body)}")
    try:
        values = np.array([float(tok) for tok in body])
    except ValueError as exc:
        raise TensorFormatError(str(exc)) from None
    return unvec(values, dims)


def read_ten(path: str | os.PathLike) -> np.ndarray:
    with open(path) as fh:
        return parse_ten(fh.read())
