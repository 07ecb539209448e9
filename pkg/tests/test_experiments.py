import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shearmix.cocycle_stats import PsiGrid
from shearmix.experiments import (EnsembleConfig, fit_exponential_rate, fit_window, garding_calibrate,
                                  garding_penalty, garding_validate, lasota_yorke_terms, parse_initial_data,
                                  quenched_constants, run_annealed_mixing, run_full_pipeline, run_lasota_yorke,
                                  run_low_freq_decay, run_mixing_ensemble, run_quenched, run_two_point,
                                  two_point_window)
from shearmix.symbol_calculus import build_symbol

TINY = dict(n_samples=8, n_steps=6, N=32, n_burn=1, psi_nx=8, psi_ntheta=16, psi_maps=10, psi_iters=4,
            p_list=(0.0, 0.1), lyap_steps=100, lyap_samples=20, moment_steps=20, moment_samples=200,
            symbol_grid=32, N_max=16, seminorm_x=4, seminorm_xi=16, garding_calib=4, garding_fields=6,
            ly_calib=3, ly_fields=3, ly_maps=4, egorov_K=(4, 8), egorov_grid=64, two_point_pairs=8,
            kernel_K=8, mc_pairs=50, mc_steps=(0, 2), separations=(math.pi / 4, math.pi))


def tiny(**kw):
    return EnsembleConfig(**{**TINY, **kw})


def test_fit_exact_exponential():
    n = np.arange(21)
    f = fit_exponential_rate(n, np.exp(-0.5 * n))
    assert abs(f.rate - 0.5) < 1e-10 and abs(f.r2 - 1) < 1e-10
    assert fit_exponential_rate(n, np.full(21, 3.0)).rate == pytest.approx(0.0, abs=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_fit_noisy_exponential(seed):
    n = np.arange(30)
    noise = 1 + 0.01 * np.random.default_rng(seed).standard_normal(30)
    assert 0.28 <= fit_exponential_rate(n, np.exp(-0.3 * n) * noise).rate <= 0.32


def test_fit_truncates_nonpositive():
    with pytest.warns(RuntimeWarning):
        f = fit_exponential_rate(np.arange(6), [1.0, 0.5, 0.25, 0.0, 0.1, 0.1])
    assert f.n_used == 3 and f.rate == pytest.approx(math.log(2))


def test_config_defaults_and_validation():
    cfg = EnsembleConfig()
    assert cfg.delta == 0.05 and cfg.s_low == 2.5
    assert cfg.replace(p=0.2).delta == pytest.approx(0.1)
    assert cfg.replace(delta=0.3, p=0.2).delta == 0.3
    for bad, key in [(dict(p=2.0), "p"), (dict(n_samples=0), "n_samples"), (dict(s_low=1.0), "s_low"),
                     (dict(N=100), "N"), (dict(f0="wave:1"), "f0")]:
        with pytest.raises(ValueError, match=f"^{key}:"):
            EnsembleConfig(**bad)


def test_parse_initial_data():
    d = parse_initial_data("cos:1,0+sin:0,2,3")
    assert d.sobolev_norm(0) ** 2 == pytest.approx(0.5 + 4.5)
    r = parse_initial_data("random:4,5", seed=3)
    assert r.is_mean_zero and len(r) == 4
    assert np.array_equal(r.ks, parse_initial_data("random:4,5", seed=3).ks)
    assert parse_initial_data("cos:0,0").is_mean_zero
    with pytest.raises(ValueError):
        parse_initial_data("cos:1")


def test_fit_window():
    count = np.array([10, 10, 10, 6, 4, 10])
    assert list(fit_window(count, 10, 1, 0.5)) == [1, 2, 3]
    assert len(fit_window(count, 10, 5, 0.5)) == 1


def test_identity_mixing_is_flat():
    cfg = tiny(kind="identity")
    tr = run_annealed_mixing(cfg)
    assert np.allclose(tr.mean, tr.mean[0], rtol=0, atol=1e-15)
    assert abs(tr.rate) < 1e-12 and tr.max_deviation < 1e-12
    low = run_low_freq_decay(cfg)
    assert np.allclose(low.trace.mean, low.trace.mean[0], atol=1e-15)
    q = run_quenched(cfg, 0.0)
    assert np.all(q.K_full == 1.0)


def test_zero_initial_data_low_freq():
    low = run_low_freq_decay(tiny(f0="cos:0,0", f0_family="cos:0,0"))
    assert np.all(low.trace.mean == 0) and low.kernel_checks == []


def test_mixing_norms_nonnegative_and_decaying():
    tr = run_annealed_mixing(tiny(n_samples=12, N=64))
    assert np.all(tr.mean[np.isfinite(tr.mean)] >= 0) and np.all(tr.stderr[np.isfinite(tr.stderr)] >= 0)
    assert tr.mean[-1] < tr.mean[0]


def test_workers_do_not_change_results():
    a = run_mixing_ensemble(tiny(workers=1))
    b = run_mixing_ensemble(tiny(workers=4))
    assert np.array_equal(a.norms_delta, b.norms_delta) and np.array_equal(a.caps, b.caps)


def test_two_point_identity_and_window():
    rows = run_two_point(tiny(kind="identity"))
    for r in rows:
        assert np.allclose(r.mean, r.mean[0])
    assert list(two_point_window(np.array([0.1, 0.5, 0.2, 0.01]), np.full(4, 0.01))) == [1, 2]


def test_quenched_constants():
    norms = np.array([[1.0, 0.5, 0.25], [4.0, 4.0, 4.0]])
    K = quenched_constants(norms, np.array([3, 2]), 0.0, 2)
    assert np.array_equal(K, [1.0, 1.0])
    assert quenched_constants(norms, np.array([3, 3]), math.log(2), 2)[0] == pytest.approx(1.0)


def test_garding_penalty_and_identity_inequalities():
    assert garding_penalty(0.1, 2.5) == pytest.approx(5 ** 2.45)
    cfg = tiny(kind="identity")
    S = build_symbol(PsiGrid.constant(8, 16, 0.1), 0.1, 0.2, 16)
    g = garding_validate(S, cfg, garding_calibrate(S, cfg))
    assert g.passes == g.total and g.c > 0
    ly = run_lasota_yorke(cfg, S, 0.0)
    assert ly.passes == len(ly.validation)
    for r in ly.rows:
        assert r.lhs == pytest.approx(r.contracted, rel=1e-12)


def test_lasota_yorke_scaling():
    cfg = tiny()
    S = build_symbol(PsiGrid.constant(8, 16, 0.1), 0.1, 0.2, 16)
    d = parse_initial_data("cos:3,1")
    a = lasota_yorke_terms(S, d, cfg, 0.05)
    b = lasota_yorke_terms(S, d.scaled(2.0), cfg, 0.05)
    for x, y in zip(a, b):
        assert y == pytest.approx(4 * x, rel=1e-12)


def test_identity_pipeline_trivial():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = run_full_pipeline(tiny(kind="identity"))
    assert rep.lyapunov.value == 0.0 and rep.psi.lambda_p == 0.0
    assert np.all(rep.psi.values == 1.0)
    assert max(r for _, r in rep.egorov) <= 1e-9
    assert rep.flags["garding"] and rep.flags["lasota_yorke"] and rep.flags["quenched_K_at_least_one"]
