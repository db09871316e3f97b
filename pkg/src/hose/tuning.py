"""Choosing tuning parameters by minimizing SURE (or GSURE).

Mode-specific soft-thresholding is tuned by cyclic coordinate descent:
each threshold is optimized with a bounded Brent minimizer run separately on
every interval between consecutive singular values of its mode (SURE is
smooth inside those intervals and jumps across them), then the overall scale
is updated in closed form.  The scale is also profiled out in closed form
inside every threshold search; without this the descent crawls along the
ridge where a larger threshold is offset by a larger scale.  The truncated HOSVD is tuned by exhaustive
search over all multilinear ranks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels
from .errors import EmptyActiveSet, NonFinite
from .hosvd import Hosvd, hosvd
from .risk import GSURE_MARGIN, KINK_RTOL, RiskEstimate, plan_weights, risk_estimate, sure_matrix, sure_spectral
from .shrinkage import matrix_svd
from .spectral import EfronMorris, ShrinkagePlan, SoftThreshold
from .tensor import scale_modes

OBJECTIVES = ("sure", "gsure")
# finite stand-in for an undefined GSURE so Brent's interpolation stays finite
_CAP = 1e100


@dataclass
class TuningResult:
    """Outcome of a SURE/GSURE search.

    ``sure_value`` is always recomputed with the risk module at the returned
    plan; ``objective_value`` is the minimized criterion.
    """

    plan: ShrinkagePlan
    risk: RiskEstimate
    objective: str
    objective_value: float
    trace: list = field(default_factory=list)
    converged: bool = True
    ranks: tuple | None = None

    @property
    def sure_value(self) -> float:
        return self.risk.sure


def _criterion(objective: str, fit: float, div: float, tau2: float, p: int) -> float:
    if objective == "sure":
        return fit + 2.0 * tau2 * div - p * tau2
    if 1.0 - div / p <= GSURE_MARGIN:
        return math.inf
    return fit / (1.0 - div / p) ** 2


def _check_objective(objective: str, tau2) -> None:
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}")
    if objective == "sure" and not (tau2 is not None and tau2 > 0):
        raise ValueError("tau2 must be positive for the sure objective")


def _as_hosvd(x) -> Hosvd:
    return x if isinstance(x, Hosvd) else hosvd(x)


def minimize_piecewise(fun: Callable[[float], float], breakpoints: Sequence[float],
                       lo: float, hi: float, xatol: float, maxiter: int = 200):
    """Minimize ``fun`` on ``[lo, hi]`` with bounded Brent on every piece.

    ``breakpoints`` split the interval where ``fun`` may be discontinuous.
    Returns ``(x, fun(x))`` of the best piece minimum.
    """
    cuts = sorted({float(b) for b in breakpoints if lo < b < hi})
    edges = [lo] + cuts + [hi]
    best_x, best_f = None, math.inf
    for left, right in zip(edges[:-1], edges[1:]):
        if right - left <= 2 * xatol:
            xm = 0.5 * (left + right)
            fm = fun(xm)
        else:
            res = minimize_scalar(fun, bounds=(left, right), method="bounded",
                                  options={"xatol": xatol, "maxiter": maxiter})
            xm, fm = float(res.x), float(res.fun)
        if fm < best_f:
            best_x, best_f = xm, fm
    return best_x, best_f


class _SoftObjective:
    """Fast SURE/GSURE of mode-specific soft-thresholding at ``(lams, c)``."""

    def __init__(self, d: Hosvd, tau2, objective: str):
        self.d = d
        self.tau2 = tau2 if tau2 is not None else 1.0
        self.objective = objective
        self.norm_sq = float(np.sum(d.core_sq))
        self.p = d.size
        self.evaluations = 0

    def nudge(self, k: int, lam: float) -> float:
        s = self.d.sigmas[k]
        tol = KINK_RTOL * s[0]
        hit = np.abs(s - lam) <= tol
        if np.any(hit):
            lam = float(s[hit][0]) - 2.0 * tol
        return lam

    def terms(self, lams):
        phis, psis = [], []
        for s, lam in zip(self.d.sigmas, lams):
            active = s > lam
            phis.append(np.where(active, (s - lam) / s, 0.0))
            psis.append(active / s**2)
        return kernels.spectral_sums(self.d.core_sq, self.d.c_array, phis, psis)

    def __call__(self, lams, c: float) -> float:
        self.evaluations += 1
        div1, a, b = self.terms(lams)
        if self.objective == "sure":
            fit = c * c * a - 2.0 * c * b + self.norm_sq
            value = _criterion("sure", fit, c * div1, self.tau2, self.p)
        elif 1.0 - c * div1 / self.p <= GSURE_MARGIN:
            # near the identity both numerator and denominator vanish and
            # rounding decides the ratio, so treat the point as undefined
            value = math.inf
        else:
            phis = [np.where(s > lam, (s - lam) / s, 0.0) for s, lam in zip(self.d.sigmas, lams)]
            resid = c * scale_modes(np.ones(self.d.dims), phis) - 1.0
            fit = float(np.sum(resid**2 * self.d.core_sq))
            value = _criterion("gsure", fit, c * div1, self.tau2, self.p)
        if math.isnan(value):
            raise NonFinite(f"objective is NaN at lams={list(lams)}, c={c}")
        return value

    def best_scale(self, lams, c_now: float) -> float:
        """Scale minimizing the objective for fixed thresholds.

        Both criteria have a closed-form stationary point in ``c``: SURE is
        quadratic and GSURE a ratio of quadratics.  ``c_now`` is kept when
        the stationary point is not a valid positive scale.
        """
        div1, a, b = self.terms(lams)
        if a <= 0.0:
            return c_now
        if self.objective == "sure":
            c = (b - self.tau2 * div1) / a
        else:
            u = div1 / self.p
            denom = a - b * u
            c = (b - u * self.norm_sq) / denom if denom > 0 else -1.0
            if 1.0 - c * u <= GSURE_MARGIN:
                c = -1.0
        return c if c > 0 else c_now

    def profiled(self, lams, c_now: float):
        """``(value, c)`` at the better of ``c_now`` and the best scale."""
        c = self.best_scale(lams, c_now)
        value = self(lams, c)
        if c != c_now:
            other = self(lams, c_now)
            if other < value:
                return other, c_now
        return value, c


def optimize_soft_threshold(x, tau2: float | None = 1.0, objective: str = "sure",
                            max_sweeps: int = 50, rtol: float = 1e-8,
                            maxiter: int = 200) -> TuningResult:
    """Tune mode-specific soft-thresholding ``(lambda_1..lambda_K, c)``.

    Parameters
    ----------
    x : array_like or Hosvd
        Data tensor, or its decomposition.
    tau2 : float
        Noise variance; ignored for ``objective="gsure"``.
    objective : {"sure", "gsure"}
    max_sweeps : int
        Maximum number of passes over ``lambda_1, ..., lambda_K, c``.
    rtol : float
        Stop when a full pass lowers the objective by less than
        ``rtol * |objective|``.
    maxiter : int
        Evaluation cap for each bounded Brent run.
    """
    _check_objective(objective, tau2)
    d = _as_hosvd(x)
    obj = _SoftObjective(d, tau2, objective)
    lams = [0.0] * d.ndim
    c = 1.0
    current = obj(lams, c)
    trace = [(tuple(lams), c, current)]
    converged = False
    for _ in range(max_sweeps):
        start = current
        for k in range(d.ndim):
            s = d.sigmas[k]
            xatol = 1e-6 * s[0]

            def fun(lam, k=k):
                trial = list(lams)
                trial[k] = obj.nudge(k, lam)
                return min(obj.profiled(trial, c)[0], _CAP)

            lam, val = minimize_piecewise(fun, s, -s[0], s[0], xatol, maxiter)
            if lam - (-s[0]) <= 2 * xatol:
                lam2, val2 = minimize_piecewise(fun, [], -10 * s[0], -s[0], xatol, maxiter)
                if val2 < val:
                    lam, val = lam2, val2
            # thresholds at or above sigma_1 give the zero estimator
            zero_lam = s[0] * (1.0 + 1e-8)
            zero_val = fun(zero_lam)
            if zero_val < val:
                lam, val = zero_lam, zero_val
            if val < current:
                trial = list(lams)
                trial[k] = obj.nudge(k, lam)
                value, c_new = obj.profiled(trial, c)
                if value < current:
                    lams, c, current = trial, c_new, value
                    trace.append((tuple(lams), c, current))
        value, c_new = obj.profiled(lams, c)
        if value < current:
            c, current = c_new, value
            trace.append((tuple(lams), c, current))
        if start - current <= rtol * abs(current):
            converged = True
            break
    plan = ShrinkagePlan.soft(lams, c)
    risk = sure_spectral(d, plan, obj.tau2)
    return TuningResult(plan, risk, objective, current, trace, converged)


def scale_terms(d: Hosvd, plan: ShrinkagePlan, tau2: float) -> dict:
    """The sums ``a, b, d, e`` whose combination ``(b - d - e) / a`` is the best scale.

    ``a = sum Phi^2 S^2``, ``b = sum Phi S^2``, ``d = tau2 sum Phi C`` and
    ``e = tau2 * sum_k sum S^2 phi_1 .. psi_k .. phi_K``, evaluated at unit
    scale.
    """
    phis, psis = plan_weights(d, plan)
    outer = scale_modes(np.ones(d.dims), phis)
    a = float(np.sum(outer**2 * d.core_sq))
    b = float(np.sum(outer * d.core_sq))
    dd = tau2 * float(np.sum(outer * d.c_array))
    e = 0.0
    for k in range(d.ndim):
        w = [psis[j] if j == k else phis[j] for j in range(d.ndim)]
        e += tau2 * float(np.sum(scale_modes(d.core_sq, w)))
    return {"a": a, "b": b, "d": dd, "e": e}


def closed_form_scale(d: Hosvd, plan: ShrinkagePlan, tau2: float) -> float:
    """SURE-minimizing overall scale ``(b - d - e) / a`` for fixed per-mode functions.

    SURE is a convex quadratic in the scale, so this is its global minimizer.
    A nonpositive value means that the zero estimator is preferred.

    Raises
    ------
    EmptyActiveSet
        If the plan removes every core entry (``a == 0``).
    """
    if not plan.elementwise:
        raise TypeError("closed-form scale needs elementwise spectral functions")
    t = scale_terms(d, plan.with_scale(1.0), tau2)
    if t["a"] <= 0.0:
        raise EmptyActiveSet("every core entry is thresholded away")
    return (t["b"] - t["d"] - t["e"]) / t["a"]


def rank_table(d: Hosvd, tau2: float | None = 1.0, objective: str = "sure") -> np.ndarray:
    """Objective of the truncated HOSVD for every rank tuple.

    Entry ``[r_1 - 1, ..., r_K - 1]`` holds the value for ranks ``(r_1..r_K)``.
    """
    _check_objective(objective, tau2)
    tau2 = tau2 if tau2 is not None else 1.0
    inv = [1.0 / s**2 for s in d.sigmas]
    # divergence weight of a retained core entry: C plus the derivative terms
    weight = d.c_array.copy()
    for k in range(d.ndim):
        w = [inv[k] if j == k else None for j in range(d.ndim)]
        weight = weight + scale_modes(d.core_sq, w)
    div = weight
    kept = d.core_sq
    for k in range(d.ndim):
        div = np.cumsum(div, axis=k)
        kept = np.cumsum(kept, axis=k)
    fit = np.maximum(float(np.sum(d.core_sq)) - kept, 0.0)
    p = d.size
    if objective == "sure":
        return fit + 2.0 * tau2 * div - p * tau2
    with np.errstate(divide="ignore", invalid="ignore"):
        table = fit / (1.0 - div / p) ** 2
    table[1.0 - div / p <= GSURE_MARGIN] = np.inf
    return table


def argmin_smallest(table: np.ndarray) -> tuple:
    """Index of the minimum; ties go to the smallest index sum, then lexicographic order."""
    ties = np.argwhere(table == np.min(table))
    return min((int(np.sum(t)), tuple(int(v) for v in t)) for t in ties)[1]


def select_rank(x, tau2: float | None = 1.0, objective: str = "sure") -> TuningResult:
    """Pick the truncated-HOSVD multilinear rank with the smallest SURE.

    All ``prod(p_k)`` rank tuples are evaluated.  Exact ties go to the
    smallest ``sum(r_k)``, then to the lexicographically smallest tuple.
    """
    d = _as_hosvd(x)
    table = rank_table(d, tau2, objective)
    best = np.min(table)
    if not np.isfinite(best):
        raise NonFinite("no rank tuple has a finite objective")
    ranks = tuple(v + 1 for v in argmin_smallest(table))
    plan = ShrinkagePlan.truncation(ranks)
    risk = sure_spectral(d, plan, tau2 if tau2 is not None else 1.0)
    return TuningResult(plan, risk, objective, float(best), [], True, ranks)


def tune_matrix_soft(x, tau2: float | None = 1.0, objective: str = "sure",
                     mode: int = 0) -> TuningResult:
    """Matrix soft-thresholding of one unfolding with a SURE-chosen threshold."""
    _check_objective(objective, tau2)
    tau2 = tau2 if tau2 is not None else 1.0
    _, s, _ = matrix_svd(x, mode)
    tol = KINK_RTOL * s[0]

    def fun(lam):
        if np.any(np.abs(s - lam) <= tol):
            lam -= 2 * tol
        r = sure_matrix(x, SoftThreshold(lam), tau2, mode)
        return min(_criterion(objective, r.fit, r.divergence, tau2, r.size), _CAP)

    lam, val = minimize_piecewise(fun, s, 0.0, s[0], 1e-6 * s[0])
    zero_val = fun(s[0] * (1.0 + 1e-8))
    if zero_val < val:
        lam, val = s[0] * (1.0 + 1e-8), zero_val
    f = SoftThreshold(lam)
    risk = sure_matrix(x, f, tau2, mode)
    return TuningResult(ShrinkagePlan((f,)), risk, objective, val)


def tune_efron_morris(x, tau2: float | None = 1.0, objective: str = "sure",
                      mode: int = 0) -> TuningResult:
    """Efron-Morris shrinkage of one unfolding with a SURE-chosen ``lambda >= 0``.

    For an ``m x n`` unfolding SURE is a quadratic in ``lambda`` minimized at
    ``(n - m - 1) tau2``; GSURE is minimized numerically.
    """
    _check_objective(objective, tau2)
    tau2 = tau2 if tau2 is not None else 1.0
    _, s, vt = matrix_svd(x, mode)
    m, n = s.size, vt.shape[1]
    if objective == "sure":
        lam = max(0.0, (n - m - 1) * tau2)
    else:
        def fun(lam):
            r = sure_matrix(x, EfronMorris(lam), tau2, mode)
            return min(_criterion(objective, r.fit, r.divergence, tau2, r.size), _CAP)

        lam, _ = minimize_piecewise(fun, [], 0.0, float(s[-1] ** 2), 1e-9 * s[-1] ** 2)
    f = EfronMorris(lam)
    risk = sure_matrix(x, f, tau2, mode)
    value = _criterion(objective, risk.fit, risk.divergence, tau2, risk.size)
    return TuningResult(ShrinkagePlan((f,)), risk, objective, value)
