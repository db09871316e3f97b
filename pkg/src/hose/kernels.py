"""Backend selection for the hot kernels.

The compiled ``hose._kernels`` extension is used when it was built; otherwise,
or when ``HOSE_PURE_PYTHON=1`` is set, the numpy versions in
``hose._kernels_py`` are used.  Both expose ``c_array``, ``spectral_sums``
and ``gap_matrix`` with identical semantics.
"""

import os

from . import _kernels_py

if os.environ.get("HOSE_PURE_PYTHON") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "cython" if _impl is not _kernels_py else "python"

c_array = _impl.c_array
spectral_sums = _impl.spectral_sums
gap_matrix = _impl.gap_matrix


def available_backends() -> dict:
    """Map backend name to module, for tests and benchmarks."""
    backends = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        backends["cython"] = _kernels
    return backends
