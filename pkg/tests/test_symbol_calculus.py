import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shearmix.cocycle_stats import PsiGrid
from shearmix.rng import generator
from shearmix.spectral_fields import ScalarField, SparseInitialData, sobolev_norm_sq
from shearmix.symbol_calculus import (Multiplier, bessel_multiplier, build_partition, build_symbol, bump_weights,
                                      cutoff, egorov_decompose, mollify, quadratic_form, quantize_apply,
                                      quantize_apply_complex, real_trig_coeffs, seminorm_estimate, symbol_eval)
from shearmix.torus_maps import MapSequence, ShearMapStep, TranslationStep


@pytest.fixture(scope="module")
def wavy_psi():
    return PsiGrid.from_function(lambda x, y, t: 1.0 + 0.3 * np.cos(x) * np.sin(y) + 0.2 * np.cos(2 * t), 16, 32, p=0.1)


def test_partition_identity():
    P = build_partition(256)
    z = np.linspace(0, 256, 20001)
    assert np.max(np.abs(P.total(z) - 1.0)) < 1e-12
    for N in P.shells:
        chi = P.chi(N, z)
        assert np.all(chi >= -1e-15) and np.all(chi <= 1 + 1e-15)
        assert np.all(chi[(z < N / 2) | (z > 2 * N)] == 0)
    assert cutoff(0.5) == 1.0 and cutoff(2.5) == 0.0
    with pytest.raises(ValueError):
        build_partition(12)


@settings(max_examples=30)
@given(st.floats(0.0, 64.0))
def test_partition_pointwise(z):
    assert abs(build_partition(64).total(z) - 1.0) < 1e-12


def test_bump_weights():
    w = bump_weights(0.5, 0.1)
    assert w.sum() == pytest.approx(1.0) and np.all(w >= 0) and len(w) == 11
    assert bump_weights(0.05, 0.1) is None


@settings(max_examples=10, deadline=None)
@given(st.floats(0.05, 1.0), st.integers(0, 1000))
def test_mollifier_sandwich(h, seed):
    vals = 0.5 + np.random.default_rng(seed).random((8, 8, 16))
    m = mollify(vals, h)
    assert vals.min() - 1e-12 <= m.values.min() and m.values.max() <= vals.max() + 1e-12


def test_mollifier_skips_coarse_axes():
    m = mollify(np.ones((8, 8, 64)), 0.5)
    assert m.unsmoothed_axes == (0, 1)
    assert mollify(np.ones((8, 8, 8)), 0.3).below_resolution


def test_trig_interpolant_matches_nodes():
    v = np.random.default_rng(2).random(8)
    c = real_trig_coeffs(v)
    m = np.arange(-4, 5)
    t = np.arange(8) * 2 * np.pi / 8
    assert np.allclose((np.exp(1j * np.outer(t, m)) @ c), v, atol=1e-13)


def test_constant_psi_symbol_is_power():
    S = build_symbol(PsiGrid.constant(8, 16, 0.1), 0.1, 0.2, 64)
    k = np.array([2.0, 3.0, 10.0, 40.0])
    assert np.allclose(symbol_eval(S, (0.3, 1.0), (k, 0 * k)), k ** -0.1, atol=1e-12)
    # inside the lowest shell the symbol is switched off
    assert symbol_eval(S, (0.0, 0.0), (1.0, 0.0)) == 0.0
    f = ScalarField.from_function(lambda x, y: np.cos(4 * x), 32)
    assert quadratic_form(S, f) == pytest.approx(0.5 * 4 ** -0.1, abs=1e-12)


def test_symbol_positive_and_even(wavy_psi):
    S = build_symbol(wavy_psi, 0.1, 0.2, 64)
    rng = np.random.default_rng(0)
    x = rng.random((2, 200)) * 2 * np.pi
    ang = rng.random(200) * 2 * np.pi
    r = 2 + rng.random(200) * 50
    a = S(x[0], x[1], r * np.cos(ang), r * np.sin(ang))
    b = S(x[0], x[1], -r * np.cos(ang), -r * np.sin(ang))
    assert np.all(a > 0) and np.allclose(a, b, atol=1e-12)


def test_model_quantization_matches_pointwise(wavy_psi):
    S = build_symbol(wavy_psi, 0.1, 0.2, 32)
    d = SparseInitialData.random(generator(3, "t"), 6, 10)
    f = d.to_field(64)
    fast = quantize_apply_complex(S, f)
    slow = quantize_apply_complex(lambda x, y, k1, k2: S(x, y, k1 + 0 * x, k2 + 0 * x), f)
    assert np.max(np.abs(fast - slow)) < 1e-10


def test_multiplier_oracle():
    f = SparseInitialData.random(generator(1, "t"), 8, 12).to_field(64)
    g = quantize_apply(bessel_multiplier(-1.0), f)
    ref = np.fft.ifft2(np.fft.fft2(f.values) * (1 + np.add.outer(np.fft.fftfreq(64, 1 / 64) ** 2,
                                                                   np.fft.fftfreq(64, 1 / 64) ** 2)) ** -0.5).real
    assert np.max(np.abs(g.values - ref)) < 1e-10
    assert quadratic_form(bessel_multiplier(-0.6), f) == pytest.approx(sobolev_norm_sq(f, -0.3), rel=1e-10)


def test_multiplication_operator_oracle():
    f = SparseInitialData.random(generator(2, "t"), 5, 6).to_field(32)
    mult = lambda x, y, k1, k2: np.cos(x) + 2.0 + 0 * k1
    g = quantize_apply(mult, f)
    X, Y = np.meshgrid(np.arange(32) * 2 * np.pi / 32, np.arange(32) * 2 * np.pi / 32, indexing="ij")
    assert np.max(np.abs(g.values - (np.cos(X) + 2) * f.values)) < 1e-10


def test_quadratic_form_homogeneous(wavy_psi):
    S = build_symbol(wavy_psi, 0.1, 0.2, 32)
    f = SparseInitialData.random(generator(4, "t"), 6, 8).to_field(64)
    assert quadratic_form(S, ScalarField(2 * f.values)) == pytest.approx(4 * quadratic_form(S, f), rel=1e-12)


def test_seminorm_of_power_symbol():
    a = Multiplier(lambda k1, k2: (1 + k1 ** 2 + k2 ** 2) ** -0.05)
    val = seminorm_estimate(a, 2, -0.1, 1.0, n_x=4, n_xi=32)
    assert 0.5 < val < 3.0
    with pytest.raises(ValueError):
        seminorm_estimate(a, 3, 0, 1)


def test_egorov_translation_has_no_remainder(wavy_psi):
    S = build_symbol(wavy_psi, 0.1, 0.2, 32)
    d = SparseInitialData.random(generator(5, "t"), 4, 6)
    main, rem = egorov_decompose(S, MapSequence([TranslationStep(0.7, 1.9)]), d, N=64, M=128)
    assert np.max(np.abs(rem.values)) < 1e-10 * np.max(np.abs(main.values))
    main, rem = egorov_decompose(S, ShearMapStep.identity(), d, N=64, M=128)
    assert np.max(np.abs(rem.values)) < 1e-10
    with pytest.raises(ValueError):
        egorov_decompose(S, MapSequence.sample(1, 0, 2), d)
