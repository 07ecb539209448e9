import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shearmix.rng import generator
from shearmix.spectral_fields import (KernelTable, ScalarField, SparseInitialData, grid_points, iter_pullback,
                                      neg_norm_kernel_mc, pullback, relative_deviation, resolution_check,
                                      sobolev_norm, sobolev_norm_sq, synthesize, wavenumbers)
from shearmix.torus_maps import MapSequence, ShearMapStep, TranslationStep, step_params


def test_sin_x_negative_norm():
    f = ScalarField.from_function(lambda x, y: np.sin(x), 64)
    assert sobolev_norm(f, -1.0) == pytest.approx(0.5, abs=1e-10)
    assert sobolev_norm(f, 0.0) ** 2 == pytest.approx(0.5, abs=1e-12)


def test_parseval():
    rng = np.random.default_rng(0)
    f = ScalarField(rng.standard_normal((32, 32)))
    assert sobolev_norm_sq(f, 0.0) == pytest.approx(np.mean(f.values ** 2), rel=1e-12)
    assert abs(sobolev_norm_sq(f, 0.0) - f.l2_norm() ** 2) < 1e-10


def test_wavenumbers_layout():
    K1, K2 = wavenumbers(8)
    assert K1[1, 0] == 1 and K1[7, 0] == -1 and K2[0, 3] == 3
    X, Y = grid_points(8)
    assert X[1, 0] == pytest.approx(np.pi / 4) and Y[1, 0] == 0.0


def test_coefficient_and_subsample():
    f = ScalarField.from_function(lambda x, y: np.cos(2 * x + 3 * y), 32)
    assert f.coefficient((2, 3)) == pytest.approx(0.5)
    assert f.coefficient((-2, -3)) == pytest.approx(0.5)
    g = f.subsample(2)
    assert g.N == 16 and g.coefficient((2, 3)) == pytest.approx(0.5)


def test_sparse_data_canonical_and_exact_norm():
    d = SparseInitialData.cosine((3, 4))
    assert d.sobolev_norm(0.0) ** 2 == pytest.approx(0.5)
    assert d.sobolev_norm(-1.0) ** 2 == pytest.approx(0.5 / 26)
    e = SparseInitialData(np.array([[-3, -4]]), np.array([0.5]))
    assert np.array_equal(e.ks, d.ks) and np.allclose(e.amps, d.amps)
    f = d.to_field(32)
    assert sobolev_norm(f, -1.0) == pytest.approx(d.sobolev_norm(-1.0), rel=1e-12)
    assert synthesize(d, (0.0, 0.0)) == pytest.approx(1.0)


def test_sparse_data_mean_and_validation():
    d = SparseInitialData(np.array([[0, 0], [1, 0]]), np.array([2.0, 0.5]))
    assert not d.is_mean_zero and d.without_mean().is_mean_zero
    with pytest.raises(ValueError):
        SparseInitialData(np.array([[0, 0]]), np.array([1j]))
    with pytest.raises(ValueError):
        SparseInitialData.from_modes([((1, 0), 1.0), ((-1, 0), 2.0)])
    m = SparseInitialData.from_modes([((1, 0), 0.5), ((-1, 0), 0.5)])
    assert m.sobolev_norm(0.0) ** 2 == pytest.approx(0.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 8), st.integers(1, 12))
def test_random_data_matches_grid(seed, n_modes, kmax):
    d = SparseInitialData.random(generator(seed, "t"), n_modes, kmax)
    assert d.is_mean_zero
    f = d.to_field(32)
    assert abs(f.mean()) < 1e-12
    assert sobolev_norm(f, -0.5) == pytest.approx(d.sobolev_norm(-0.5), rel=1e-10)
    assert np.allclose(d.scaled(2.0)(0.3, 0.4), 2 * d(0.3, 0.4))


def test_pullback_identity_and_translation():
    d = SparseInitialData.cosine((2, 1))
    f0 = d.to_field(32)
    f = pullback(d, MapSequence.repeat(ShearMapStep.identity(), 5), 32)
    assert np.allclose(f.values, f0.values, atol=1e-14)
    g = pullback(d, MapSequence([TranslationStep(0.3, 0.2)]), 32)
    # translation keeps every Sobolev norm
    assert sobolev_norm(g, -0.7) == pytest.approx(sobolev_norm(f0, -0.7), rel=1e-12)


def test_pullback_is_measure_preserving():
    d = SparseInitialData.cosine((1, 0))
    f = pullback(d, MapSequence.sample(1, 0, 3), 256)
    assert abs(f.mean()) < 1e-10
    assert f.l2_norm() == pytest.approx(np.sqrt(0.5), rel=1e-3)


def test_iter_pullback_paths():
    d = SparseInitialData.cosine((1, 1))
    params = step_params(4, 0, 3)
    fwd = list(iter_pullback(d, params, 32, "forward"))
    assert len(fwd) == 4
    assert np.allclose(fwd[-1].values, pullback(d, MapSequence.from_params(params), 32).values, atol=1e-12)
    rev = list(iter_pullback(d, params, 32, "reversed"))
    assert np.allclose(rev[-1].values, pullback(d, MapSequence.from_params(params[::-1]), 32).values, atol=1e-12)
    with pytest.raises(ValueError):
        list(iter_pullback(d, params, 32, "sideways"))


def test_resolution_check_grows_with_time():
    d = SparseInitialData.cosine((1, 0))
    seq = MapSequence.sample(2, 0, 10)
    early = resolution_check(d, seq[:1], -0.05, 64)
    late = resolution_check(d, seq, -0.25, 128)
    assert early < 1e-6
    assert late < 0.05
    assert relative_deviation(0.0, 0.0) == 0.0


def test_kernel_at_origin():
    k = KernelTable(2.5, 1)
    assert float(k(0.0, 0.0)) == pytest.approx(1.9637069, abs=1e-6)
    assert float(k.direct(0.0, 0.0)) == pytest.approx(float(k(0.0, 0.0)), abs=1e-12)
    assert k.mean_removed().mean == 0.0
    with pytest.raises(ValueError):
        KernelTable(1.0, 4)


def test_kernel_nufft_matches_direct():
    k = KernelTable(2.5, 6)
    z = np.random.default_rng(1).random((2, 50)) * 2 * np.pi
    assert np.allclose(k(*z), k.direct(*z), atol=1e-12)


def test_kernel_mc_matches_spectral():
    d = SparseInitialData.cosine((1, 0))
    seq = MapSequence.sample(1, 0, 2)
    exact = sobolev_norm_sq(pullback(d, seq, 256), -2.5)
    est, se = neg_norm_kernel_mc(d, seq, 2.5, 20000, generator(1, "t"), K=32)
    assert abs(est - exact) < 4 * se + 1e-4
    assert neg_norm_kernel_mc(SparseInitialData(), seq, 2.5, 10, generator(1, "t")) == (0.0, 0.0)
