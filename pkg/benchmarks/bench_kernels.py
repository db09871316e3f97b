"""Time the compiled and pure-Python kernels on the same inputs.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.  The full-tune
rows run the SURE optimizer in a subprocess per backend so that the backend
choice made at import time applies to the whole call chain.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from hose import hosvd
from hose.kernels import available_backends

TUNE_SNIPPET = """
import time, numpy as np
from hose import optimize_soft_threshold, kernels
x = np.random.default_rng(0).standard_normal({dims})
t = time.perf_counter()
for _ in range({repeat}):
    optimize_soft_threshold(x, 1.0)
print(kernels.BACKEND, (time.perf_counter() - t) / {repeat})
"""


def kernel_rows(dims, repeat):
    d = hosvd(np.random.default_rng(1).standard_normal(dims))
    phis = [np.maximum(s - np.median(s), 0) / s for s in d.sigmas]
    psis = [np.where(p > 0, 1.0 / s, 0.0) for p, s in zip(phis, d.sigmas)]
    rows = []
    for name, mod in available_backends().items():
        c = mod.c_array(d.core, d.sigmas)
        t_c = min(timeit.repeat(lambda: mod.c_array(d.core, d.sigmas), number=repeat, repeat=3)) / repeat
        t_s = min(timeit.repeat(lambda: mod.spectral_sums(d.core_sq, c, phis, psis),
                                number=repeat, repeat=3)) / repeat
        rows.append((dims, name, t_c, t_s))
    return rows


def tune_rows(dims, repeat):
    out = []
    for pure in ("0", "1"):
        env = dict(os.environ, HOSE_PURE_PYTHON=pure)
        code = TUNE_SNIPPET.format(dims=dims, repeat=repeat)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        name, secs = res.stdout.split()
        out.append((dims, name, float(secs)))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    print(f"{'dims':<14}{'backend':<9}{'c_array (us)':>14}{'spectral_sums (us)':>20}")
    for dims in [(10, 10, 10), (20, 20, 20), (10, 20, 30)]:
        for dims_, name, t_c, t_s in kernel_rows(dims, args.repeat):
            print(f"{str(dims_):<14}{name:<9}{t_c * 1e6:>14.1f}{t_s * 1e6:>20.1f}")
    print()
    print(f"{'dims':<14}{'backend':<9}{'full tune (ms)':>16}")
    for dims in [(10, 10, 10), (20, 20, 20)]:
        for dims_, name, secs in tune_rows(dims, 3):
            print(f"{str(dims_):<14}{name:<9}{secs * 1e3:>16.1f}")


if __name__ == "__main__":
    main()
