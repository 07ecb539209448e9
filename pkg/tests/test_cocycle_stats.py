import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shearmix.cocycle_stats import (EstimatorWarning, PsiGrid, eigen_residual, lambda_curve, moment_lyapunov_direct,
                                    projective_log_gains, psi_power_iteration, top_lyapunov, twisted_apply)
from shearmix.torus_maps import ShearMapStep, step_params


def test_identity_lyapunov_is_zero():
    est = top_lyapunov(200, 20, 1, kind="identity")
    assert est.value == 0.0 and est.stderr == 0.0


def test_hyperbolic_fixed_point():
    # (0, 0) is fixed by A = A' = 2 with zero phases; D phi = [[1, 2], [2, 5]]
    est = top_lyapunov(400, 4, 1, step=ShearMapStep(2.0, 2.0, 0.0, 0.0), x0=(0.0, 0.0))
    assert est.value == pytest.approx(np.log(3 + 2 * np.sqrt(2)), abs=1e-10)


def test_short_run_warns():
    with pytest.warns(EstimatorWarning):
        top_lyapunov(20, 4, 1)


def test_lyapunov_positive_small():
    est = top_lyapunov(200, 100, 3)
    lo, hi = est.ci()
    assert lo > 0 and 0.25 < est.value < 0.45


def test_log_gains_shape():
    params = np.stack([step_params(1, i, 5) for i in range(3)])
    g = projective_log_gains(params, np.zeros(3), np.zeros(3), np.zeros(3))
    assert g.shape == (3, 5) and np.all(np.isfinite(g))


def test_moment_direct_edge_cases():
    assert moment_lyapunov_direct(0.0, 10, 10, 1) == (0.0, 0.0)
    assert moment_lyapunov_direct(0.3, 10, 10, 1, kind="identity") == (0.0, 0.0)
    with pytest.raises(ValueError):
        moment_lyapunov_direct(1.5, 10, 10, 1)


def test_moment_direct_between_zero_and_p_lambda():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EstimatorWarning)
        val, se = moment_lyapunov_direct(0.1, 50, 2000, 2)
    # concavity with Lambda(0) = 0 puts Lambda(p) below p * lambda_1
    assert 0 < val < 0.1 * 0.4 and se > 0


def test_twisted_identity_preserves_constants():
    psi = np.ones((8, 8, 8))
    out = twisted_apply(psi, step_params(1, 0, 5, "identity"), 0.3)
    assert np.array_equal(out, psi)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(0, 1000))
def test_twisted_p0_is_markov(p, seed):
    # at p = 0 constants are fixed for every map; for p > 0 values stay positive
    params = step_params(seed, 0, 3)
    out0 = twisted_apply(np.full((8, 8, 8), 2.0), params, 0.0)
    assert np.allclose(out0, 2.0, atol=1e-12)
    out = twisted_apply(np.ones((8, 8, 8)), params, p)
    assert np.all(out > 0)


def test_psi_grid_interpolation():
    g = PsiGrid.constant(8, 8)
    assert np.array_equal(g(np.array([0.3, 7.0]), 1.0, 2.0), np.ones(2))
    f = PsiGrid.from_function(lambda x, y, t: 1 + 0 * x + np.cos(t) ** 2, 8, 16)
    nodes = np.arange(16) * (2 * np.pi / 16)
    assert np.allclose(f(0.0, 0.0, nodes), 1 + np.cos(nodes) ** 2)
    assert f.with_values(np.ones((8, 8, 16))).eigenvalue == 1.0


def test_power_iteration_identity():
    psi = psi_power_iteration(0.2, 8, 8, 5, 4, 1, kind="identity")
    assert psi.lambda_p == 0.0 and np.array_equal(psi.values, np.ones((8, 8, 8)))
    assert eigen_residual(psi, 5, 1, kind="identity") == 0.0


def test_power_iteration_small_run():
    psi = psi_power_iteration(0.1, 8, 16, 40, 12, 1)
    assert psi.values.min() > 0 and psi.values.max() == 1.0
    assert 0.0 < psi.lambda_p < 0.1
    assert psi.increments[-1] < psi.increments[0]
    with pytest.raises(ValueError):
        psi_power_iteration(0.1, 4, 16, 4, 4, 1)


def test_lambda_curve_shape_and_zero():
    c = lambda_curve((0.0, 0.05, 0.1), nx=8, ntheta=16, n_maps_per_iter=30, n_iters=6)
    assert c.value[0] == 0.0
    assert len(c.second_differences) == 1 and c.secant_slope > 0
    with pytest.raises(ValueError):
        lambda_curve((0.1, 0.05))
