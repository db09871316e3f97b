import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hose import hosvd, matricize, mode_singular_values, multilinear_rank, reconstruct, tucker_product
from hose.errors import DegenerateSpectrum, RankDeficient
from hose.tensor import scale_modes


def test_random_decomposition_invariants(rng):
    t = rng.standard_normal((4, 5, 6))
    d = hosvd(t)
    assert np.linalg.norm(reconstruct(d) - t) / np.linalg.norm(t) < 1e-10
    for k, (u, s) in enumerate(zip(d.factors, d.sigmas)):
        assert u.shape == (t.shape[k],) * 2
        np.testing.assert_allclose(u.T @ u, np.eye(u.shape[0]), atol=1e-10)
        sk = matricize(d.core, k)
        gram = sk @ sk.T
        assert np.linalg.norm(gram - np.diag(s**2)) / np.linalg.norm(s**2) < 1e-8
        assert np.all(np.diff(s) < 0) and s[-1] > 0
        np.testing.assert_allclose(s, np.linalg.svd(matricize(t, k), compute_uv=False), rtol=1e-10)
        assert np.sum(s**2) == pytest.approx(np.sum(t**2), rel=1e-12)


def test_normalized_core_form(rng):
    t = rng.standard_normal((3, 4, 5))
    d = hosvd(t)
    back = tucker_product(scale_modes(d.normalized_core, d.sigmas), list(d.factors))
    np.testing.assert_allclose(back, t, atol=1e-10)


def test_sign_convention_and_determinism(rng):
    t = rng.standard_normal((3, 4, 5))
    a, b = hosvd(t), hosvd(t.copy())
    for ua, ub in zip(a.factors, b.factors):
        assert np.array_equal(ua, ub)
        rows = np.argmax(np.abs(ua), axis=0)
        assert np.all(ua[rows, np.arange(ua.shape[1])] > 0)


def test_rotation_invariant_spectra(rng):
    t = rng.standard_normal((3, 4, 5))
    qs = [np.linalg.qr(rng.standard_normal((n, n)))[0] for n in t.shape]
    for s1, s2 in zip(mode_singular_values(t), mode_singular_values(tucker_product(t, qs))):
        np.testing.assert_allclose(s1, s2, rtol=1e-8)


def test_scalar_tensor():
    d = hosvd(np.full((1, 1, 1), 2.5))
    assert [u.item() for u in d.factors] == [1.0, 1.0, 1.0]
    assert [s.item() for s in d.sigmas] == [2.5, 2.5, 2.5]
    assert d.core.item() == 2.5


def test_rank_one_rejected(rng):
    t = np.einsum("i,j,k->ijk", *[rng.standard_normal(n) for n in (3, 3, 3)])
    with pytest.raises(RankDeficient):
        hosvd(t)


def test_oversized_mode_rejected(rng):
    with pytest.raises(RankDeficient):
        hosvd(rng.standard_normal((7, 2, 3)))


def test_tied_spectrum_rejected():
    with pytest.raises(DegenerateSpectrum):
        hosvd(np.eye(3).reshape(3, 3, 1))


def test_multilinear_rank(rng):
    core = rng.standard_normal((5, 5, 5))
    qs = [np.linalg.qr(rng.standard_normal((10, 5)))[0] for _ in range(3)]
    assert multilinear_rank(tucker_product(core, qs)) == (5, 5, 5)
    assert multilinear_rank(rng.standard_normal((10, 10, 10)), 1e-8) == (10, 10, 10)
    assert multilinear_rank(np.zeros((2, 2))) == (0, 0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dims=st.sampled_from([(2, 2, 2), (3, 3, 3), (2, 3, 4), (3, 4, 5), (2, 2, 2, 2)]))
def test_reconstruction_property(seed, dims):
    t = np.random.default_rng(seed).standard_normal(dims)
    d = hosvd(t)
    np.testing.assert_allclose(reconstruct(d), t, atol=1e-10 * np.linalg.norm(t))
