"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL | details`` line (also
collected in the pytest terminal summary) and then asserts.
"""

import time

import numpy as np
import pytest

from conftest import midpoints, separated_tensor
from hose import (
    AdaptiveTrace,
    CoreShrinkagePlan,
    EfronMorris,
    Identity,
    ScenarioSpec,
    ShrinkagePlan,
    SoftThreshold,
    Stein,
    Truncation,
    add_noise,
    anova_decompose,
    apply_core_shrinkage,
    apply_spectral,
    arcsine_transform,
    closed_form_scale,
    dematricize,
    divergence_core_shrinkage,
    divergence_fd,
    divergence_full_spectrum,
    frobenius_norm_sq,
    generate_mean,
    hosvd,
    matricize,
    matrix_spectral,
    mode_singular_values,
    rank_recovery_study,
    reconstruct,
    run_study,
    sure_spectral,
)

STUDY_SEED = 1
N_REPS = 200


def _plans(d):
    s = d.sigmas
    return {
        "soft": ShrinkagePlan(tuple(SoftThreshold(midpoints(v, 0)) for v in s), 0.9),
        "truncation": ShrinkagePlan((Truncation(1), Truncation(2), Truncation(2))),
        "efron_morris": ShrinkagePlan(tuple(EfronMorris(0.5 * v[-1] ** 2) for v in s)),
        "adaptive": ShrinkagePlan(tuple(AdaptiveTrace(midpoints(v, 1), 1.5) for v in s)),
        "stein": ShrinkagePlan(tuple(Stein(0.4 * np.sum(v**2)) for v in s)),
    }


def test_divergence_matches_finite_differences(report):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst, count = 0.0, 0
    for i in range(20):
        x = separated_tensor(rng, (3, 3, 3) if i % 2 == 0 else (3, 4, 5))
        d = hosvd(x)
        for plan in _plans(d).values():
            closed = divergence_full_spectrum(d, plan)
            fd = divergence_fd(x, lambda y, plan=plan: apply_spectral(hosvd(y), plan))
            worst = max(worst, abs(closed - fd) / abs(fd))
            count += 1
        a = np.sort(np.abs(d.core).ravel())
        core_plan = CoreShrinkagePlan(0.5 * (a[a.size // 2] + a[a.size // 2 + 1]))
        closed = divergence_core_shrinkage(d, core_plan)
        fd = divergence_fd(x, lambda y: apply_core_shrinkage(hosvd(y), core_plan))
        worst = max(worst, abs(closed - fd) / abs(fd))
        count += 1
    elapsed = time.perf_counter() - start
    ok = worst < 1e-5 and elapsed < 60
    report(1, ok, f"{count} divergences on 20 tensors, max rel err {worst:.2e} (< 1e-5), {elapsed:.1f}s (< 60s)")
    assert ok


def test_sure_is_unbiased(report):
    start = time.perf_counter()
    spec = ScenarioSpec("F", seed=STUDY_SEED)
    theta = generate_mean(spec)
    plan = ShrinkagePlan.soft([9.0, 9.0, 9.0], 1.0)
    diffs = []
    for rep in range(500):
        x = add_noise(theta, 1.0, 99, rep)
        d = hosvd(x)
        loss = np.sum((apply_spectral(d, plan) - theta) ** 2)
        diffs.append(sure_spectral(d, plan, 1.0).sure - loss)
    diffs = np.asarray(diffs)
    gap, se = abs(diffs.mean()), diffs.std(ddof=1) / np.sqrt(diffs.size)
    elapsed = time.perf_counter() - start
    ok = gap <= 3 * se and elapsed < 120
    report(2, ok, f"|mean(SURE - loss)| = {gap:.3f} vs 3 SE = {3 * se:.3f}, 500 reps, {elapsed:.1f}s (< 120s)")
    assert ok


def test_identity_and_zero_reductions(report):
    rng = np.random.default_rng(3)
    errs, exact = [], True
    for dims, tau2 in [((10, 10, 10), 1.0), ((3, 4, 5), 0.37), ((2, 3, 2, 3), 4.0)]:
        x = rng.standard_normal(dims)
        d = hosvd(x)
        p = x.size
        r = sure_spectral(d, ShrinkagePlan.identity(len(dims)), tau2)
        errs += [abs(r.divergence - p) / p, abs(r.sure - p * tau2) / (p * tau2)]
        z = sure_spectral(d, ShrinkagePlan.soft([2 * s[0] for s in d.sigmas]), tau2)
        exact &= z.sure == frobenius_norm_sq(x) - p * tau2 and z.divergence == 0.0
    ok = max(errs) < 1e-8 and exact
    report(3, ok, f"identity max rel err {max(errs):.1e} (< 1e-8); zero plan SURE == ||x||^2 - p tau2 exactly: {exact}")
    assert ok


def test_rank_recovery(report):
    start = time.perf_counter()
    f = rank_recovery_study(ScenarioSpec("F", seed=STUDY_SEED), N_REPS)
    dd = rank_recovery_study(ScenarioSpec("D", seed=STUDY_SEED), N_REPS)
    elapsed = time.perf_counter() - start
    hit_f = f.joint_frequency((5, 5, 5))
    hit_d = dd.rank_frequencies()[0].get(5, 0.0)
    ok = hit_f >= 0.85 and hit_d >= 0.90 and elapsed < 900
    report(4, ok, f"F: (5,5,5) in {hit_f:.3f} (>= 0.85); D: mode-1 rank 5 in {hit_d:.3f} (>= 0.90); {elapsed:.1f}s")
    assert ok


@pytest.fixture(scope="module")
def loss_studies():
    return {sc: run_study(ScenarioSpec(sc, seed=STUDY_SEED), n_reps=N_REPS) for sc in ("F", "A")}


def test_loss_ordering(report, loss_studies):
    f = loss_studies["F"].summary()
    a = loss_studies["A"].summary()
    mean = {k: v["mean"] for k, v in f.items()}
    matrix = ("matrix_soft", "efron_morris", "james_stein")
    order = mean["truncated_hosvd"] <= mean["msst"] <= min(mean[k] for k in matrix)
    ratio = min(mean[k] for k in ("matrix_soft", "efron_morris")) / mean["msst"]
    ratio_ok = 1.5 <= ratio <= 3.0
    near_js = abs(a["msst"]["mean"] - a["james_stein"]["mean"]) <= 0.10 * a["james_stein"]["mean"]
    ident = all(abs(s["identity"]["mean"] - 1000) <= 3 * s["identity"]["se"] for s in (f, a))
    ok = order and ratio_ok and near_js and ident
    detail = (
        "F means " + ", ".join(f"{k} {v:.1f}" for k, v in mean.items())
        + f"; ordering {order}; best matrix/msst {ratio:.2f} in [1.5, 3]: {ratio_ok}"
        + f"; A msst {a['msst']['mean']:.1f} vs JS {a['james_stein']['mean']:.1f} within 10%: {near_js}"
        + f"; identity within 3 SE of 1000: {ident}"
    )
    report(5, ok, detail)
    assert ok


def test_closed_form_scale_beats_grid(report):
    rng = np.random.default_rng(6)
    grid = np.linspace(0.01, 2.0, 200)
    wins, worst = 0, -np.inf
    for _ in range(20):
        d = hosvd(separated_tensor(rng, (4, 4, 4)))
        plan = ShrinkagePlan.soft([midpoints(s, rng.integers(1, 3)) for s in d.sigmas])
        c = closed_form_scale(d, plan, 0.1)
        best = sure_spectral(d, plan.with_scale(c), 0.1).sure
        grid_min = min(sure_spectral(d, plan.with_scale(g), 0.1).sure for g in grid)
        worst = max(worst, best - grid_min)
        wins += c > 0 and best <= grid_min + 1e-9 * abs(grid_min)
    ok = wins == 20
    report(6, ok, f"closed-form scale beat the 200-point grid on {wins}/20 instances (max excess {worst:.2e})")
    assert ok


def test_two_mode_reduction(report):
    rng = np.random.default_rng(7)
    x3 = rng.standard_normal((6, 2, 3))
    m = matricize(x3, 0)
    u, s, vt = np.linalg.svd(m)
    lam = midpoints(s, 2)
    d = hosvd(m)
    plan = ShrinkagePlan((SoftThreshold(lam), Identity()))
    tensor_est = apply_spectral(d, plan)
    direct = (u * np.maximum(s - lam, 0)) @ vt
    elem = np.max(np.abs(tensor_est - direct))
    closed = divergence_full_spectrum(d, plan)
    fd = divergence_fd(m, lambda y: matrix_spectral(y, SoftThreshold(lam)))
    rel = abs(closed - fd) / fd
    back = dematricize(tensor_est, 0, x3.shape)
    ok = elem < 1e-10 and rel < 1e-5 and back.shape == x3.shape
    report(7, ok, f"max elementwise gap {elem:.1e} (< 1e-10); divergence rel err {rel:.1e} (< 1e-5)")
    assert ok


def test_structural_invariants(report):
    rng = np.random.default_rng(8)
    checks = {}
    t = rng.standard_normal((4, 5, 6))
    d = hosvd(t)
    checks["orthogonal factors"] = max(np.max(np.abs(u.T @ u - np.eye(len(u)))) for u in d.factors) < 1e-10
    checks["all-orthogonality"] = max(
        np.linalg.norm(matricize(d.core, k) @ matricize(d.core, k).T - np.diag(s**2)) / np.linalg.norm(s**2)
        for k, s in enumerate(d.sigmas)
    ) < 1e-8
    checks["reconstruction"] = np.linalg.norm(reconstruct(d) - t) / np.linalg.norm(t) < 1e-10
    checks["energy"] = all(abs(np.sum(s**2) - np.sum(t**2)) < 1e-10 * np.sum(t**2) for s in mode_singular_values(t))
    u = rng.standard_normal((5, 4, 3, 2))
    checks["matricization round trips"] = all(
        np.array_equal(dematricize(matricize(u, k), k, u.shape), u) for k in range(4)
    )
    r = anova_decompose(rng.standard_normal((4, 3, 2, 3))).residual
    checks["zero-margin residual"] = all(np.max(np.abs(matricize(r, k).sum(axis=1))) < 1e-10 for k in range(4))
    ends = arcsine_transform(np.array([0.0, 0.5, 1.0]), 4)
    checks["arcsine endpoints"] = np.allclose(ends, [-np.pi, 0.0, np.pi], atol=1e-15)
    ok = all(checks.values())
    report(8, ok, "; ".join(f"{k}: {v}" for k, v in checks.items()))
    assert ok


def _dispersion(s):
    s = s / s.sum()
    return float(np.var(s))


def test_dispersion_direction(report):
    x = np.random.default_rng(9).standard_normal((10, 10, 10))
    d = hosvd(x)
    lams = [0.55 * d.sigmas[0][0], 0.0, -10.0 * d.sigmas[2][0]]
    out = mode_singular_values(apply_spectral(d, ShrinkagePlan.soft(lams)))
    before = [_dispersion(s) for s in d.sigmas]
    after = [_dispersion(s) for s in out]
    ok = after[0] > before[0] and after[2] < before[2]
    report(9, ok, "normalized spectrum variance before/after: "
           + ", ".join(f"mode {k} {b:.2e}->{a:.2e}" for k, (b, a) in enumerate(zip(before, after))))
    assert ok
