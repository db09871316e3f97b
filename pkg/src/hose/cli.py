"""Command-line interface: ``hose <subcommand> ...``.

Exit status is 0 on success, 2 on usage errors and 1 on computation errors,
which are reported on stderr as ``ERROR <code>: <message>``.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from typing import Sequence

import numpy as np

from .errors import GsureUndefined, HoseError
from .hosvd import hosvd
from .relational import METHODS as PIPELINE_METHODS
from .relational import arcsine_transform, inverse_arcsine, shrink_residual_pipeline
from .risk import sure_spectral
from .shrinkage import apply_spectral, james_stein, matrix_spectral, truncated_hosvd
from .simulation import ESTIMATORS, SCENARIOS, ScenarioSpec, rank_recovery_study, run_study
from .spectral import ShrinkagePlan
from .tensor import read_ten, write_ten
from .tuning import (
    optimize_soft_threshold,
    select_rank,
    tune_efron_morris,
    tune_matrix_soft,
)

DENOISE_METHODS = ("msst", "truncated_hosvd", "james_stein", "efron_morris", "matrix_soft", "identity")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _floats(text: str) -> list:
    return [float(t) for t in text.replace(",", " ").split()]


def _ints(text: str) -> list:
    return [int(t) for t in text.replace(",", " ").split()]


def _input(path: str, flag: str = "--in"):
    if not os.path.isfile(path):
        raise UsageError(f"argument {flag}: file not found: {path}")
    return read_ten(path)


def _tuning_flags(p, seed=False):
    p.add_argument("--tau2", type=_positive, default=1.0, help="noise variance (default 1)")
    p.add_argument("--objective", choices=("sure", "gsure"), default="sure")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; tuning is deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hose", description="Higher-order spectral shrinkage with SURE tuning.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("hosvd", help="decompose a tensor and report mode-specific singular values")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--spectra", help="CSV of mode,index,value")
    p.add_argument("--core", help="write the core tensor here")

    p = sub.add_parser("denoise", help="apply a SURE-tuned estimator")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=DENOISE_METHODS, default="msst")
    _tuning_flags(p)
    p.add_argument("--max-sweeps", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("tune", help="SURE-tune mode-specific soft-thresholding")
    p.add_argument("--in", dest="inp", required=True)
    _tuning_flags(p, seed=True)
    p.add_argument("--max-sweeps", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--trace", help="CSV of the descent trace")

    p = sub.add_parser("rank", help="estimate the multilinear rank by SURE")
    p.add_argument("--in", dest="inp", required=True)
    _tuning_flags(p, seed=True)

    p = sub.add_parser("sure", help="risk estimate of a fixed plan")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--tau2", type=_positive, default=1.0)
    p.add_argument("--objective", choices=("sure", "gsure"), default="sure")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--lam", type=_floats, help="soft thresholds, one per mode")
    g.add_argument("--ranks", type=_ints, help="truncation ranks, one per mode")
    p.add_argument("--scale", type=_positive, default=1.0)

    p = sub.add_parser("simulate", help="Monte Carlo study of one scenario")
    p.add_argument("--scenario", choices=SCENARIOS, required=True)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--tau2", type=_positive, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", type=_ints, default=[10, 10, 10])
    p.add_argument("--estimators", type=lambda s: s.split(","), default=list(ESTIMATORS))
    p.add_argument("--rank-study", action="store_true", help="tabulate SURE-selected ranks instead of losses")
    p.add_argument("--redraw-theta", action="store_true")
    p.add_argument("--workers", type=int, default=None, help="default: HOSE_THREADS or 1")
    p.add_argument("--out", required=True, help="losses CSV (replicate,estimator,loss) or rank CSV")
    p.add_argument("--summary", help="per-estimator summary CSV")

    p = sub.add_parser("relational", help="arc-sin + ANOVA + residual shrinkage")
    p.add_argument("--props", required=True)
    p.add_argument("--counts", required=True)
    p.add_argument("--method", choices=PIPELINE_METHODS, default="msst")
    _tuning_flags(p)
    p.add_argument("--out", required=True, help="fitted values on the transformed scale")
    p.add_argument("--probabilities", help="fitted values mapped back to proportions")
    return parser


def _cmd_hosvd(a):
    d = hosvd(_input(a.inp))
    for k, s in enumerate(d.sigmas):
        print(f"mode {k}: " + " ".join(f"{v:.6g}" for v in s))
    if a.spectra:
        with open(a.spectra, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["mode", "index", "value"])
            for k, s in enumerate(d.sigmas):
                for i, v in enumerate(s):
                    w.writerow([k, i, repr(float(v))])
    if a.core:
        write_ten(a.core, d.core)


def denoise(x, method: str, tau2: float, objective: str = "sure", max_sweeps: int = 50,
            tol: float = 1e-8) -> np.ndarray:
    """The estimate written by ``hose denoise``."""
    if method == "identity":
        return np.array(x, dtype=np.float64)
    if method == "james_stein":
        return james_stein(x, tau2)
    if method == "efron_morris":
        return matrix_spectral(x, tune_efron_morris(x, tau2, objective).plan.per_mode[0])
    if method == "matrix_soft":
        return matrix_spectral(x, tune_matrix_soft(x, tau2, objective).plan.per_mode[0])
    d = hosvd(x)
    if method == "truncated_hosvd":
        return truncated_hosvd(d, select_rank(d, tau2, objective).ranks)
    res = optimize_soft_threshold(d, tau2, objective, max_sweeps=max_sweeps, rtol=tol)
    return apply_spectral(d, res.plan)


def _cmd_denoise(a):
    x = _input(a.inp)
    write_ten(a.out, denoise(x, a.method, a.tau2, a.objective, a.max_sweeps, a.tol))


def _cmd_tune(a):
    res = optimize_soft_threshold(_input(a.inp), a.tau2, a.objective, max_sweeps=a.max_sweeps, rtol=a.tol)
    lams = [f.lam for f in res.plan.per_mode]
    print("lambda: " + " ".join(repr(v) for v in lams))
    print(f"scale: {res.plan.scale!r}")
    print(f"{a.objective}: {res.objective_value!r}")
    if a.objective != "sure":
        print(f"sure: {res.sure_value!r}")
    print(f"converged: {str(res.converged).lower()}")
    if a.trace:
        with open(a.trace, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step"] + [f"lambda_{k}" for k in range(len(lams))] + ["scale", a.objective])
            for i, (ls, c, v) in enumerate(res.trace):
                w.writerow([i, *map(repr, ls), repr(c), repr(v)])


def _cmd_rank(a):
    res = select_rank(_input(a.inp), a.tau2, a.objective)
    print("rank: " + " ".join(str(r) for r in res.ranks))
    print(f"{a.objective}: {res.objective_value!r}")


def _cmd_sure(a):
    d = hosvd(_input(a.inp))
    if a.lam is not None:
        plan = ShrinkagePlan.soft(a.lam, a.scale)
    else:
        plan = ShrinkagePlan.truncation(a.ranks).with_scale(a.scale)
    if len(plan) != d.ndim:
        raise UsageError(f"argument --lam/--ranks: need {d.ndim} values, got {len(plan)}")
    r = sure_spectral(d, plan, a.tau2)
    if a.objective == "gsure" and not r.gsure_defined:
        raise GsureUndefined(f"divergence {r.divergence!r} is not below p = {r.size}")
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["plan", "fit", "divergence", "sure", "gsure"])
    w.writerow([plan.describe(), repr(r.fit), repr(r.divergence), repr(r.sure), repr(r.gsure)])


def _cmd_simulate(a):
    unknown = [e for e in a.estimators if e not in ESTIMATORS]
    if unknown:
        raise UsageError(f"argument --estimators: unknown {','.join(unknown)}")
    if a.reps < 1:
        raise UsageError("argument --reps: must be at least 1")
    spec = ScenarioSpec(a.scenario, dims=tuple(a.dims), seed=a.seed)
    if a.rank_study:
        res = rank_recovery_study(spec, a.reps, a.tau2, a.redraw_theta, a.workers)
        res.write_ranks_csv(a.out)
        for k, freq in res.rank_frequencies().items():
            print(f"mode {k}: " + " ".join(f"{r}:{f:.3f}" for r, f in sorted(freq.items())))
        return
    res = run_study(spec, a.estimators, a.reps, a.tau2, a.redraw_theta, a.workers)
    res.write_losses_csv(a.out)
    if a.summary:
        res.write_summary_csv(a.summary)
    for name, row in res.summary().items():
        print(f"{name}: mean {row['mean']:.4g} se {row['se']:.3g} median {row['median']:.4g}")


def _cmd_relational(a):
    y = _input(a.props, "--props")
    n = _input(a.counts, "--counts")
    if y.shape != n.shape:
        raise UsageError(f"argument --counts: dims {n.shape} differ from --props {y.shape}")
    res = shrink_residual_pipeline(arcsine_transform(y, n), a.method, a.tau2, a.objective)
    write_ten(a.out, res.fitted)
    if a.probabilities:
        write_ten(a.probabilities, inverse_arcsine(res.fitted, n))
    print(f"residual norm: {res.residual_norm:.6g}")
    print(f"shrunk residual norm: {res.shrunk_norm:.6g}")


COMMANDS = {
    "hosvd": _cmd_hosvd,
    "denoise": _cmd_denoise,
    "tune": _cmd_tune,
    "rank": _cmd_rank,
    "sure": _cmd_sure,
    "simulate": _cmd_simulate,
    "relational": _cmd_relational,
}


def run_cli(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ERROR UsageError: {exc}", file=sys.stderr)
        return 2
    except HoseError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
