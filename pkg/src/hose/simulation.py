"""Monte Carlo comparison of tensor, matrix and vector shrinkage estimators.

Random numbers come from numpy's PCG64 generator.  Every stream is seeded
by an explicit :class:`numpy.random.SeedSequence` whose spawn key encodes its
role, so a replicate's noise depends only on ``(seed, replicate index)``:

* ``(0,)`` draws the mean tensor (``(0, i)`` when it is redrawn per replicate)
* ``(1, i)`` draws the noise of replicate ``i``
"""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import HoseError, ShapeError, StudyFailed
from .hosvd import Hosvd, hosvd
from .shrinkage import apply_spectral, james_stein, matrix_spectral, truncated_hosvd
from .tensor import dematricize, frobenius_norm_sq, mode_multiply, tucker_product
from .tuning import optimize_soft_threshold, select_rank, tune_efron_morris, tune_matrix_soft

log = logging.getLogger(__name__)

SCENARIOS = ("A", "B", "C", "D", "E", "F")
ESTIMATORS = (
    "identity",
    "james_stein",
    "efron_morris",
    "matrix_soft",
    "msst",
    "truncated_hosvd",
)
MAX_FAILURE_RATE = 0.01


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameters of one simulated mean tensor.

    ``rank`` is the low rank used by scenarios D (mode 1) and F (every mode).
    """

    scenario: str
    dims: tuple = (10, 10, 10)
    target_norm_sq: float = 1000.0
    ar_rho: float = 0.7
    seed: int = 0
    rank: int = 5

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}")
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        if not self.dims or any(n < 1 for n in self.dims):
            raise ShapeError(f"invalid dims {self.dims}")
        if not self.target_norm_sq > 0:
            raise ValueError("target_norm_sq must be positive")
        if self.scenario in ("D", "F") and any(self.rank > n for n in self.dims):
            raise ShapeError(f"rank {self.rank} exceeds dims {self.dims}")


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def ar1_cholesky(n: int, rho: float) -> np.ndarray:
    idx = np.arange(n)
    return np.linalg.cholesky(rho ** np.abs(idx[:, None] - idx[None, :]))


def dispersion_root(n: int) -> np.ndarray:
    """Square root of ``diag(1^2, ..., n^2)``."""
    return np.diag(np.arange(1.0, n + 1.0))


def draw_mean(spec: ScenarioSpec, rng: np.random.Generator) -> np.ndarray:
    """One draw of the scenario's mean tensor before rescaling."""
    dims, sc = spec.dims, spec.scenario
    if sc == "D":
        rest = int(np.prod(dims[1:]))
        u, s, vt = np.linalg.svd(rng.standard_normal((dims[0], rest)), full_matrices=False)
        r = spec.rank
        return dematricize((u[:, :r] * s[:r]) @ vt[:r], 0, dims)
    if sc == "F":
        r = spec.rank
        core = np.zeros((r,) * len(dims))
        core[(np.arange(r),) * len(dims)] = 1.0
        qs = [np.linalg.qr(rng.standard_normal((n, r)))[0] for n in dims]
        return tucker_product(core, qs)
    z = rng.standard_normal(dims, dtype=np.float64)
    if sc == "B":
        return mode_multiply(z, dispersion_root(dims[0]), 0)
    if sc == "C":
        return mode_multiply(z, ar1_cholesky(dims[0], spec.ar_rho), 0)
    if sc == "E":
        for k, n in enumerate(dims):
            z = mode_multiply(z, dispersion_root(n), k)
    return z


def generate_mean(spec: ScenarioSpec, replicate: int | None = None) -> np.ndarray:
    """Draw the mean tensor of ``spec`` rescaled to squared norm ``target_norm_sq``.

    ``replicate`` selects an independent redraw; ``None`` gives the study's
    fixed mean.
    """
    key = (0,) if replicate is None else (0, int(replicate))
    theta = draw_mean(spec, _rng(spec.seed, *key))
    return theta * np.sqrt(spec.target_norm_sq / frobenius_norm_sq(theta))


def add_noise(theta, tau2: float, seed: int, replicate: int = 0) -> np.ndarray:
    """``theta + tau * Z`` with i.i.d. standard normal ``Z`` from stream ``(1, replicate)``."""
    if tau2 < 0:
        raise ValueError("tau2 must be nonnegative")
    theta = np.asarray(theta, dtype=np.float64)
    z = _rng(seed, 1, int(replicate)).standard_normal(theta.shape)
    return theta + np.sqrt(tau2) * z


def _estimate(name: str, x: np.ndarray, d: Hosvd | None, tau2: float) -> np.ndarray:
    if name == "identity":
        return x
    if name == "james_stein":
        return james_stein(x, tau2)
    if name == "efron_morris":
        return matrix_spectral(x, tune_efron_morris(x, tau2).plan.per_mode[0])
    if name == "matrix_soft":
        return matrix_spectral(x, tune_matrix_soft(x, tau2).plan.per_mode[0])
    if name == "msst":
        return apply_spectral(d, optimize_soft_threshold(d, tau2).plan)
    if name == "truncated_hosvd":
        return truncated_hosvd(d, select_rank(d, tau2).ranks)
    raise ValueError(f"unknown estimator {name!r}")


@dataclass
class StudyResult:
    """Losses (and optionally selected ranks) from a Monte Carlo study.

    ``losses[name]`` and ``ranks`` are aligned with ``replicates``, the
    indices of replicates that completed.  ``failures`` lists
    ``(replicate, estimator, error code)`` of skipped replicates.
    """

    spec: ScenarioSpec
    tau2: float
    estimators: tuple
    replicates: list
    losses: dict
    failures: list = field(default_factory=list)
    ranks: np.ndarray | None = None

    def summary(self) -> dict:
        out = {}
        for name in self.estimators:
            v = np.asarray(self.losses[name])
            q1, med, q3 = np.percentile(v, [25, 50, 75])
            se = float(np.std(v, ddof=1) / np.sqrt(v.size)) if v.size > 1 else float("nan")
            out[name] = {"mean": float(np.mean(v)), "se": se, "median": float(med),
                         "q1": float(q1), "q3": float(q3), "n": int(v.size)}
        return out

    def rank_frequencies(self) -> dict:
        """Per-mode ``{rank: frequency}`` of the selected ranks."""
        if self.ranks is None:
            raise ValueError("study did not record ranks")
        table = {}
        for k in range(self.ranks.shape[1]):
            vals, counts = np.unique(self.ranks[:, k], return_counts=True)
            table[k] = {int(v): c / self.ranks.shape[0] for v, c in zip(vals, counts)}
        return table

    def joint_frequency(self, ranks: Sequence[int]) -> float:
        if self.ranks is None:
            raise ValueError("study did not record ranks")
        return float(np.mean(np.all(self.ranks == np.asarray(ranks), axis=1)))

    def write_losses_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["replicate", "estimator", "loss"])
            for j, rep in enumerate(self.replicates):
                for name in self.estimators:
                    w.writerow([rep, name, repr(float(self.losses[name][j]))])

    def write_summary_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["estimator", "n", "mean", "se", "median", "q1", "q3"])
            for name, row in self.summary().items():
                w.writerow([name, row["n"], row["mean"], row["se"], row["median"], row["q1"], row["q3"]])

    def write_ranks_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["mode", "rank", "frequency"])
            for k, freq in self.rank_frequencies().items():
                for r, f in sorted(freq.items()):
                    w.writerow([k, r, f])


def _replicate(args):
    spec, theta, tau2, estimators, rep, redraw, want_ranks = args
    if redraw:
        theta = generate_mean(spec, rep)
    x = add_noise(theta, tau2, spec.seed, rep)
    losses, ranks, stage = {}, None, "hosvd"
    try:
        d = hosvd(x) if {"msst", "truncated_hosvd"} & set(estimators) or want_ranks else None
        for stage in estimators:
            losses[stage] = frobenius_norm_sq(_estimate(stage, x, d, tau2) - theta)
        if want_ranks:
            stage = "select_rank"
            ranks = select_rank(d, tau2).ranks
    except HoseError as exc:
        return rep, None, None, (stage, exc.code, str(exc))
    return rep, losses, ranks, None


def default_workers() -> int:
    """Worker count from ``HOSE_THREADS`` (default 1, i.e. serial)."""
    try:
        return max(1, int(os.environ.get("HOSE_THREADS", "1")))
    except ValueError:
        return 1


def _run(spec, tau2, estimators, n_reps, redraw, want_ranks, workers) -> StudyResult:
    if n_reps < 1:
        raise ValueError("n_reps must be at least 1")
    estimators = tuple(estimators)
    for name in estimators:
        if name not in ESTIMATORS:
            raise ValueError(f"unknown estimator {name!r}")
    workers = default_workers() if workers is None else max(1, int(workers))
    theta = generate_mean(spec)
    jobs = [(spec, theta, tau2, estimators, i, redraw, want_ranks) for i in range(n_reps)]
    if workers == 1:
        results = [_replicate(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replicate, jobs, chunksize=max(1, n_reps // (4 * workers))))
    kept, failures, ranks = [], [], []
    losses = {name: [] for name in estimators}
    for rep, rep_losses, rep_ranks, err in results:
        if err is not None:
            log.warning("replicate %d skipped: %s failed with %s: %s", rep, *err)
            failures.append((rep, err[0], err[1]))
            continue
        kept.append(rep)
        for name in estimators:
            losses[name].append(rep_losses[name])
        if want_ranks:
            ranks.append(rep_ranks)
    if len(failures) >= max(1, MAX_FAILURE_RATE * n_reps) and failures:
        raise StudyFailed(f"{len(failures)} of {n_reps} replicates failed")
    return StudyResult(
        spec, tau2, estimators, kept,
        {k: np.asarray(v) for k, v in losses.items()}, failures,
        np.asarray(ranks, dtype=int) if want_ranks else None,
    )


def run_study(spec: ScenarioSpec, estimators: Sequence[str] = ESTIMATORS, n_reps: int = 200,
              tau2: float = 1.0, redraw_theta: bool = False,
              workers: int | None = None) -> StudyResult:
    """Squared-error losses of ``estimators`` over ``n_reps`` noisy copies.

    The mean tensor is drawn once and kept fixed unless ``redraw_theta``.
    Tuned estimators pick their parameters by SURE with the true ``tau2``.
    A replicate where some estimator raises is skipped; the study fails
    when 1% or more of the replicates are skipped.
    """
    return _run(spec, tau2, estimators, n_reps, redraw_theta, False, workers)


def rank_recovery_study(spec: ScenarioSpec, n_reps: int = 200, tau2: float = 1.0,
                        redraw_theta: bool = False, workers: int | None = None) -> StudyResult:
    """Multilinear ranks chosen by SURE over ``n_reps`` replicates of scenario D or F."""
    if spec.scenario not in ("D", "F"):
        raise ValueError("rank recovery is defined for scenarios D and F")
    return _run(spec, tau2, (), n_reps, redraw_theta, True, workers)


def loss_of(estimator: Callable[[np.ndarray], np.ndarray], theta, x) -> float:
    return frobenius_norm_sq(np.asarray(estimator(x)) - theta)
