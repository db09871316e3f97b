import numpy as np
import pytest

from hose import (
    AdaptiveTrace,
    CoreShrinkagePlan,
    EfronMorris,
    HardThreshold,
    Identity,
    ImprovedEfronMorris,
    ShrinkagePlan,
    SoftThreshold,
    Stein,
    Truncation,
    apply_core_shrinkage,
    apply_spectral,
    hosvd,
    james_stein,
    matricize,
    matrix_baseline,
    multilinear_rank,
    truncated_hosvd,
    tucker_product,
)
from hose.errors import InvalidRank, RankDeficient, ShapeError
from hose.spectral import FAMILIES

S = np.array([5.0, 3.0, 2.0, 0.5])


def test_family_values():
    np.testing.assert_array_equal(Identity()(S), S)
    np.testing.assert_array_equal(Truncation(2)(S), [5, 3, 0, 0])
    np.testing.assert_array_equal(SoftThreshold(2.5)(S), [2.5, 0.5, 0, 0])
    np.testing.assert_array_equal(SoftThreshold(-1.0)(S), S + 1)
    np.testing.assert_array_equal(HardThreshold(2.0)(S), [5, 3, 2, 0])
    np.testing.assert_allclose(EfronMorris(1.0)(S), S - 1 / S)
    np.testing.assert_allclose(Stein(19.125)(S), 0.5 * S)
    np.testing.assert_allclose(AdaptiveTrace(2.0, 1.0)(S), np.maximum(S - 2.0, 0))
    np.testing.assert_allclose(ImprovedEfronMorris(0.0, 1.0)(S), EfronMorris(1.0)(S))
    assert set(FAMILIES) == {"identity", "truncation", "soft_threshold", "hard_threshold",
                             "efron_morris", "adaptive_trace", "stein", "improved_em"}


@pytest.mark.parametrize("f", [Identity(), Truncation(2), SoftThreshold(2.5), HardThreshold(2.5),
                               EfronMorris(0.7), AdaptiveTrace(1.5, 2.0), Stein(3.0),
                               ImprovedEfronMorris(2.0, 0.4)])
def test_jacobian_diagonal_by_differences(f):
    h = 1e-6
    for i in range(S.size):
        e = np.zeros_like(S)
        e[i] = h
        fd = (f(S + e)[i] - f(S - e)[i]) / (2 * h)
        assert f.jacobian_diag(S)[i] == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_plan_validation():
    with pytest.raises(ValueError):
        ShrinkagePlan((Identity(),), scale=0.0)
    with pytest.raises(ValueError):
        CoreShrinkagePlan(-1.0)
    with pytest.raises(ValueError):
        AdaptiveTrace(-1.0, 1.0)
    plan = ShrinkagePlan.soft([1, 2, 3], 0.5)
    assert len(plan) == 3 and plan.scale == 0.5 and plan.elementwise
    assert not ShrinkagePlan((Stein(1.0), Identity())).elementwise
    assert "soft_threshold(lam=2)" in plan.describe()


def test_identity_and_zero(rng):
    x = rng.standard_normal((4, 5, 6))
    d = hosvd(x)
    np.testing.assert_allclose(apply_spectral(d, ShrinkagePlan.identity(3)), x, rtol=1e-12, atol=1e-12)
    big = d.sigmas[1][0] * 1.01
    assert not np.any(apply_spectral(d, ShrinkagePlan.soft([0, big, 0])))


def test_scale_linearity(rng):
    d = hosvd(rng.standard_normal((3, 4, 5)))
    plan = ShrinkagePlan.soft([0.3, 0.1, -0.5])
    np.testing.assert_allclose(apply_spectral(d, plan.with_scale(2.5)), 2.5 * apply_spectral(d, plan), rtol=1e-14)


def test_truncation_forms_agree(rng):
    d = hosvd(rng.standard_normal((4, 4, 4)))
    for ranks in [(1, 2, 3), (4, 4, 4), (2, 2, 2)]:
        a = truncated_hosvd(d, ranks)
        b = apply_spectral(d, ShrinkagePlan.truncation(ranks))
        np.testing.assert_allclose(a, b, atol=1e-12)
        assert all(r <= q for r, q in zip(multilinear_rank(a), ranks))
    np.testing.assert_allclose(truncated_hosvd(d, (4, 4, 4)), d.data, atol=1e-12)
    with pytest.raises(InvalidRank):
        truncated_hosvd(d, (0, 1, 1))
    with pytest.raises(InvalidRank):
        truncated_hosvd(d, (5, 1, 1))


def test_truncation_recovers_low_rank(rng):
    core = rng.standard_normal((5, 5, 5))
    qs = [np.linalg.qr(rng.standard_normal((10, 5)))[0] for _ in range(3)]
    t = tucker_product(core, qs)
    # hosvd needs full rank and separated spectra, so perturb slightly
    x = t + 1e-4 * rng.standard_normal(t.shape)
    err = np.linalg.norm(truncated_hosvd(hosvd(x), (5, 5, 5)) - t)
    assert err < 0.6 * np.linalg.norm(x - t)


def test_soft_threshold_norm_monotone(rng):
    d = hosvd(rng.standard_normal((4, 5, 6)))
    for k in range(3):
        grid = np.linspace(-2 * d.sigmas[k][0], 1.1 * d.sigmas[k][0], 40)
        norms = []
        for lam in grid:
            lams = [0.2, 0.2, 0.2]
            lams[k] = lam
            norms.append(np.linalg.norm(apply_spectral(d, ShrinkagePlan.soft(lams))))
        assert np.all(np.diff(norms) <= 1e-12)


def test_core_shrinkage(rng):
    d = hosvd(rng.standard_normal((3, 4, 5)))
    np.testing.assert_allclose(apply_core_shrinkage(d, CoreShrinkagePlan(0.0)), d.data, atol=1e-12)
    big = np.max(np.abs(d.core))
    assert not np.any(apply_core_shrinkage(d, CoreShrinkagePlan(big)))
    lam = np.median(np.abs(d.core))
    shrunk = CoreShrinkagePlan(lam)(d.core)
    assert np.sum(shrunk == 0) == np.sum(np.abs(d.core) <= lam)


def test_james_stein(rng):
    x = rng.standard_normal((2, 3, 4))
    tau2 = np.sum(x**2) / (x.size - 2)
    assert not np.any(james_stein(x, tau2))
    np.testing.assert_allclose(james_stein(x, 1e-300), x)
    assert not np.any(james_stein(np.zeros((2, 2)), 1.0))
    factor = 1 - 22 * 0.1 / np.sum(x**2)
    np.testing.assert_allclose(james_stein(x, 0.1), factor * x)
    with pytest.raises(ShapeError):
        james_stein(np.ones(2), 1.0)


def test_matrix_baseline(rng):
    x = rng.standard_normal((4, 3, 5))
    np.testing.assert_allclose(matrix_baseline(x, "soft_threshold", 0.0), x, atol=1e-12)
    np.testing.assert_allclose(matrix_baseline(x, "efron_morris", 0.0), x, atol=1e-12)
    m = matricize(x, 0)
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    assert not np.any(matrix_baseline(x, "soft_threshold", s[0]))
    lam = 0.5 * (s[1] + s[2])
    direct = (u * np.maximum(s - lam, 0)) @ vt
    np.testing.assert_allclose(matricize(matrix_baseline(x, "soft_threshold", lam), 0), direct, atol=1e-10)
    with pytest.raises(ValueError):
        matrix_baseline(x, "soft_threshold", -1.0)
    with pytest.raises(ValueError):
        matrix_baseline(x, "nope", 1.0)
    with pytest.raises(RankDeficient):
        matrix_baseline(rng.standard_normal((30, 2, 2)), "soft_threshold", 0.1)


def test_orthogonal_equivariance(rng):
    x = rng.standard_normal((4, 7))
    w = np.linalg.qr(rng.standard_normal((4, 4)))[0]
    z = np.linalg.qr(rng.standard_normal((7, 7)))[0]
    lam = 1.0
    lhs = matrix_baseline(w @ x @ z.T, "soft_threshold", lam)
    rhs = w @ matrix_baseline(x, "soft_threshold", lam) @ z.T
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)
