"""Ensemble drivers: mixing traces, inequality checks and rate fits.

Every driver is a deterministic function of an :class:`EnsembleConfig`.
Samples own their random streams (see :mod:`shearmix.rng`) and results are
reduced in sample-index order, so outputs do not depend on ``workers``.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np
from scipy import stats

from .cocycle_stats import (PsiGrid, eigen_residual, lambda_curve, moment_lyapunov_direct,
                            psi_power_iteration, top_lyapunov)
from .rng import generator, uniform_blocks
from .spectral_fields import (KernelTable, ScalarField, SparseInitialData, grid_points,
                              neg_norm_kernel_mc, relative_deviation, sobolev_norm_sq)
from .symbol_calculus import (bessel_multiplier, build_symbol, egorov_decompose, quadratic_form,
                              seminorm_estimate)
from .torus_maps import TWO_PI, MapSequence, shear_forward, shear_inverse, step_params

Z99 = 2.5758293035489004
QUENCHED_Q = (0.5, 1.0, 1.5)


# -- configuration ------------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleConfig:
    n_samples: int = 200
    n_steps: int = 25
    N: int = 256
    p: float = 0.1
    eps: float = 0.2
    delta: float | None = None
    s_low: float = 2.5
    seed: int = 1
    f0: str = "cos:1,0"
    f0_family: str = "cos:1,0;cos:6,0;cos:12,0"
    kind: str = "pierrehumbert"
    n_burn: int = 5
    workers: int = 1
    res_tol: float = 0.05
    min_fraction: float = 0.5
    psi_nx: int = 16
    psi_ntheta: int = 64
    psi_maps: int = 200
    psi_iters: int = 40
    p_list: tuple = (0.0, 0.05, 0.1, 0.2)
    lyap_steps: int = 1000
    lyap_samples: int = 1000
    moment_steps: int = 200
    moment_samples: int = 10000
    symbol_grid: int = 128
    N_max: int = 256
    rank_tol: float = 1e-3
    seminorm_x: int = 32
    seminorm_xi: int = 256
    garding_calib: int = 10
    garding_fields: int = 100
    ly_calib: int = 10
    ly_fields: int = 20
    ly_maps: int = 64
    egorov_K: tuple = (4, 8, 16, 32)
    egorov_grid: int = 1024
    separations: tuple = (math.pi / 64, math.pi / 16, math.pi / 4, math.pi)
    two_point_pairs: int = 64
    kernel_K: int = 64
    mc_pairs: int = 2000
    mc_steps: tuple = (0, 5)

    def __post_init__(self):
        if self.delta is None:
            object.__setattr__(self, "delta", self.p / 2.0)
        for name in ("p_list", "egorov_K", "separations", "mc_steps"):
            v = getattr(self, name)
            if not isinstance(v, tuple):
                object.__setattr__(self, name, tuple(v))
        validate_config(self)

    def replace(self, **kw) -> "EnsembleConfig":
        if "p" in kw and "delta" not in kw and self.delta == self.p / 2.0:
            kw["delta"] = None
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return asdict(self)


def validate_config(cfg: EnsembleConfig) -> None:
    """Raise ``ValueError('<key>: reason')`` for out-of-range parameters."""
    def bad(key, why):
        raise ValueError(f"{key}: {why}")

    for key in ("n_samples", "n_steps", "workers", "psi_maps", "psi_iters", "lyap_steps", "lyap_samples",
                "moment_steps", "moment_samples", "seminorm_x", "seminorm_xi", "garding_calib",
                "garding_fields", "ly_calib", "ly_fields", "ly_maps", "two_point_pairs", "mc_pairs", "kernel_K"):
        if int(getattr(cfg, key)) < 1:
            bad(key, "must be >= 1")
    if cfg.n_burn < 0:
        bad("n_burn", "must be >= 0")
    if not 0.0 <= cfg.p <= 1.0:
        bad("p", "must lie in [0, 1]")
    if not 0.0 < cfg.eps < 0.25:
        bad("eps", "must lie in (0, 1/4)")
    if not cfg.delta > 0.0:
        bad("delta", "must be > 0")
    if not cfg.s_low > 1.0:
        bad("s_low", "must be > 1")
    if cfg.seed < 0 or cfg.seed >= 2 ** 64:
        bad("seed", "must be an unsigned 64-bit integer")
    for key in ("N", "symbol_grid", "egorov_grid", "N_max"):
        v = int(getattr(cfg, key))
        if v < 8 or v & (v - 1):
            bad(key, "must be a power of two >= 8")
    if cfg.kind not in ("pierrehumbert", "identity"):
        bad("kind", "must be 'pierrehumbert' or 'identity'")
    if cfg.psi_nx < 8 or cfg.psi_ntheta < 8 or cfg.psi_ntheta % 2:
        bad("psi_nx" if cfg.psi_nx < 8 else "psi_ntheta", "grid sizes must be >= 8 (ntheta even)")
    if not 0.0 < cfg.res_tol:
        bad("res_tol", "must be > 0")
    if not 0.0 < cfg.min_fraction <= 1.0:
        bad("min_fraction", "must lie in (0, 1]")
    if not 0.0 < cfg.rank_tol < 1.0:
        bad("rank_tol", "must lie in (0, 1)")
    if any(not 0.0 <= q <= 0.5 for q in cfg.p_list) or list(cfg.p_list) != sorted(set(cfg.p_list)):
        bad("p_list", "must be increasing within [0, 0.5]")
    if any(not 0.0 < d <= math.pi for d in cfg.separations):
        bad("separations", "must lie in (0, pi]")
    for spec in [cfg.f0] + cfg.f0_family.split(";"):
        try:
            parse_initial_data(spec, cfg.seed)
        except ValueError as exc:
            bad("f0" if spec == cfg.f0 else "f0_family", str(exc))


def parse_initial_data(spec: str, seed: int = 0) -> SparseInitialData:
    """Parse ``cos:k1,k2[,amp]``, ``sin:k1,k2[,amp]`` or ``random:n,kmax[,kmin]``, joined by ``+``.

    The result is projected to mean zero.
    """
    ks, amps = [], []
    for j, item in enumerate(s.strip() for s in spec.split("+")):
        kind, _, rest = item.partition(":")
        try:
            nums = [float(t) for t in rest.split(",")] if rest else []
        except ValueError:
            raise ValueError(f"bad initial data item {item!r}") from None
        if kind in ("cos", "sin") and len(nums) in (2, 3):
            amp = nums[2] if len(nums) == 3 else 1.0
            ks.append((int(nums[0]), int(nums[1])))
            amps.append(amp / 2.0 if kind == "cos" else -0.5j * amp)
        elif kind == "random" and len(nums) in (2, 3):
            d = SparseInitialData.random(generator(seed, "f0-random", j), int(nums[0]), int(nums[1]),
                                         int(nums[2]) if len(nums) == 3 else 1)
            ks.extend(map(tuple, d.ks))
            amps.extend(d.amps)
        else:
            raise ValueError(f"bad initial data item {item!r}")
    return SparseInitialData(np.array(ks, dtype=np.int64).reshape(-1, 2), np.array(amps)).without_mean()


# -- fitting --------------------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    rate: float
    intercept: float
    r2: float
    rate_se: float
    n_used: int
    window: tuple = (0, 0)


def fit_exponential_rate(n, value, stderr=None) -> RateFit:
    """Weighted least squares for ``log value = intercept - rate * n``.

    Weights are ``(value / stderr)^2`` (the inverse variance of ``log value``);
    without usable standard errors the fit is unweighted.  The window is cut
    at the first non-positive value.  ``R^2`` is computed on the log scale.
    """
    n = np.asarray(n, dtype=np.float64)
    v = np.asarray(value, dtype=np.float64)
    bad = np.nonzero(~(v > 0))[0]
    if bad.size:
        warnings.warn(f"non-positive value at n={n[bad[0]]:g}; fit window truncated", RuntimeWarning, stacklevel=2)
        n, v = n[:bad[0]], v[:bad[0]]
        stderr = None if stderr is None else np.asarray(stderr)[:bad[0]]
    if len(n) < 2:
        return RateFit(float("nan"), float("nan"), float("nan"), float("nan"), len(n))
    y = np.log(v)
    if stderr is not None and np.all(np.asarray(stderr) > 0):
        w = (v / np.asarray(stderr, dtype=np.float64)) ** 2
    else:
        w = np.ones_like(y)
    W = w.sum()
    nbar = np.sum(w * n) / W
    ybar = np.sum(w * y) / W
    sxx = np.sum(w * (n - nbar) ** 2)
    slope = np.sum(w * (n - nbar) * (y - ybar)) / sxx
    icept = ybar - slope * nbar
    res = y - (icept + slope * n)
    ss_res = float(np.sum(w * res * res))
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = len(n) - 2
    se = math.sqrt(ss_res / dof / sxx) if dof > 0 else float("nan")
    return RateFit(float(-slope), float(icept), float(r2), se, len(n), (float(n[0]), float(n[-1])))


# -- traces ---------------------------------------------------------------------------

@dataclass
class MixingTrace:
    """Ensemble statistics of a squared norm per step with the per-sample horizon."""

    name: str
    n: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    count: np.ndarray
    caps: np.ndarray
    fit: RateFit | None = None
    rate_se_jackknife: float = float("nan")
    max_deviation: float = 0.0
    qform_mean: np.ndarray | None = None
    qform_stderr: np.ndarray | None = None
    early_fit: RateFit | None = None  # diagnostic fit over n <= n_burn

    @property
    def rate(self) -> float:
        return self.fit.rate if self.fit else float("nan")

    @property
    def mu(self) -> float:
        """Decay exponent of the norm itself (half the squared-norm rate)."""
        return 0.5 * self.rate

    @property
    def rate_se(self) -> float:
        """Sample-jackknife SE when available (it accounts for correlation across n)."""
        if np.isfinite(self.rate_se_jackknife):
            return self.rate_se_jackknife
        return self.fit.rate_se if self.fit else float("nan")

    def rows(self):
        return [(int(n), float(m), float(s), int(c)) for n, m, s, c in zip(self.n, self.mean, self.stderr, self.count)]


def _reduce(values: np.ndarray, valid: np.ndarray):
    """Column means, SEs and counts of ``values[sample, n]`` over valid entries, in sample order."""
    count = valid.sum(axis=0)
    mean = np.full(values.shape[1], np.nan)
    se = np.full(values.shape[1], np.nan)
    for j in range(values.shape[1]):
        col = values[valid[:, j], j]
        if col.size:
            mean[j] = col.mean()
            se[j] = col.std(ddof=1) / math.sqrt(col.size) if col.size > 1 else 0.0
    return mean, se, count


def fit_window(count: np.ndarray, n_samples: int, n_burn: int, min_fraction: float) -> np.ndarray:
    """Steps ``n >= n_burn`` up to the last one (contiguously) with enough surviving samples."""
    ok = count >= math.ceil(min_fraction * n_samples)
    idx = []
    for j in range(n_burn, len(count)):
        if not ok[j]:
            break
        idx.append(j)
    return np.array(idx, dtype=int)


def _trace_from_samples(name, values, caps, cfg, jackknife=True, groups=20) -> MixingTrace:
    n_samples, width = values.shape
    n = np.arange(width)
    valid = n[None, :] < caps[:, None]
    mean, se, count = _reduce(values, valid)
    win = fit_window(count, n_samples, cfg.n_burn, cfg.min_fraction)
    tr = MixingTrace(name, n, mean, se, count, caps)
    if not np.any(np.nan_to_num(mean) != 0):
        # zero data: nothing to fit
        tr.fit = RateFit(float("nan"), float("nan"), float("nan"), float("nan"), 0)
        return tr
    if len(win) >= 2:
        tr.fit = fit_exponential_rate(n[win], mean[win], se[win])
        if jackknife and n_samples >= 4:
            G = min(groups, n_samples)
            labels = np.arange(n_samples) % G
            rates = []
            for g in range(G):
                keep = labels != g
                m, s, _ = _reduce(values[keep], valid[keep])
                rates.append(fit_exponential_rate(n[win], m[win], s[win]).rate)
            rates = np.array(rates)
            tr.rate_se_jackknife = float(np.sqrt((G - 1) / G * np.sum((rates - rates.mean()) ** 2)))
    else:
        tr.fit = RateFit(float("nan"), float("nan"), float("nan"), float("nan"), len(win))
    early = fit_window(count[:cfg.n_burn + 1], n_samples, 0, cfg.min_fraction)
    if len(early) >= 2:
        tr.early_fit = fit_exponential_rate(n[early], mean[early], se[early])
    return tr


def _map_samples(cfg: EnsembleConfig, func, samples):
    """Evaluate ``func(i)`` for each sample, in parallel if requested; results in sample order."""
    samples = list(samples)
    if cfg.workers <= 1:
        return [func(i) for i in samples]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(func, samples))


# -- annealed mixing -----------------------------------------------------------------

@dataclass
class MixingEnsemble:
    """Per-sample squared norms for several initial data sharing the same maps."""

    specs: list
    norms_delta: np.ndarray  # (n_f0, n_samples, n_steps + 1)
    norms_low: np.ndarray
    deviations: np.ndarray   # (n_f0, n_samples, n_steps + 1) worst of the two orders
    caps: np.ndarray         # (n_f0, n_samples) first step failing the resolution check
    qforms: np.ndarray | None = None


def _mixing_sample(cfg: EnsembleConfig, datas, i: int, symbol=None, path: str = "reversed"):
    """Squared norms along one sample path, stopping each f0 at its first resolution failure."""
    params = step_params(cfg.seed, i, cfg.n_steps, cfg.kind, label="maps")
    X, Y = grid_points(2 * cfg.N)
    nf = len(datas)
    width = cfg.n_steps + 1
    hd = np.zeros((nf, width))
    hl = np.zeros((nf, width))
    dev = np.zeros((nf, width))
    qf = np.zeros((nf, width)) if symbol is not None else None
    caps = np.full(nf, width)
    active = list(range(nf))
    x, y = X, Y
    for n in range(width):
        if n > 0:
            if path == "reversed":
                x, y = shear_inverse(*params[n - 1], x, y, reduce=False)
            else:
                x, y = X, Y
                for row in params[n - 1::-1]:
                    x, y = shear_inverse(*row, x, y, reduce=False)
        still = []
        for j in active:
            fine = ScalarField(datas[j](x, y))
            coarse = fine.subsample(2)
            worst = 0.0
            for s, store in ((-cfg.delta, hd), (-cfg.s_low, hl)):
                nf2, nc2 = sobolev_norm_sq(fine, s), sobolev_norm_sq(coarse, s)
                worst = max(worst, relative_deviation(math.sqrt(nf2), math.sqrt(nc2)))
                store[j, n] = nc2
            dev[j, n] = worst
            if worst > cfg.res_tol:
                caps[j] = n
                continue
            if symbol is not None:
                qf[j, n] = quadratic_form(symbol, coarse)
            still.append(j)
        active = still
        if not active:
            break
    return hd, hl, dev, caps, qf


def run_mixing_ensemble(cfg: EnsembleConfig, specs=None, symbol=None, path: str = "reversed") -> MixingEnsemble:
    """Shared-map ensemble over several initial data.

    ``path="reversed"`` composes inverses incrementally (one step per n); at each
    fixed n this has the law of the forward composition, which is all an
    ensemble mean needs.  ``path="forward"`` follows the true trajectory.
    """
    specs = cfg.f0_family.split(";") if specs is None else list(specs)
    datas = [parse_initial_data(s, cfg.seed) for s in specs]
    for s, d in zip(specs, datas):
        if not len(d):
            continue
        if not d.is_mean_zero:
            raise ValueError(f"initial data {s!r} must be mean-zero")
    out = _map_samples(cfg, lambda i: _mixing_sample(cfg, datas, i, symbol, path), range(cfg.n_samples))
    hd = np.stack([o[0] for o in out], axis=1)
    hl = np.stack([o[1] for o in out], axis=1)
    dev = np.stack([o[2] for o in out], axis=1)
    caps = np.stack([o[3] for o in out], axis=1)
    qf = np.stack([o[4] for o in out], axis=1) if symbol is not None else None
    return MixingEnsemble(specs, hd, hl, dev, caps, qf)


def _ensemble_trace(cfg, ens: MixingEnsemble, j: int, which: str, name: str) -> MixingTrace:
    vals = ens.norms_delta[j] if which == "delta" else ens.norms_low[j]
    tr = _trace_from_samples(name, vals, ens.caps[j], cfg)
    width = vals.shape[1]
    valid = np.arange(width)[None, :] < ens.caps[j][:, None]
    tr.max_deviation = float(np.max(ens.deviations[j][valid])) if valid.any() else 0.0
    if ens.qforms is not None:
        tr.qform_mean, tr.qform_stderr, _ = _reduce(ens.qforms[j], valid)
    return tr


def run_annealed_mixing(cfg: EnsembleConfig, ensemble: MixingEnsemble | None = None, spec: str | None = None) -> MixingTrace:
    """Trace of ``E ||f_n||^2_{H^-delta}`` with its fitted rate (``mu = rate / 2``)."""
    spec = cfg.f0 if spec is None else spec
    if ensemble is None or spec not in ensemble.specs:
        ensemble = run_mixing_ensemble(cfg, [spec])
    return _ensemble_trace(cfg, ensemble, ensemble.specs.index(spec), "delta", "mix")


@dataclass
class LowFreqReport:
    trace: MixingTrace
    kernel_checks: list  # (n, spectral mean, spectral se, kernel mean, kernel se, z)

    @property
    def kernel_agrees(self) -> bool:
        return all(abs(z) <= 3.0 for *_, z in self.kernel_checks)


def kernel_mc_series(cfg: EnsembleConfig, spec: str, n: int) -> tuple[float, float]:
    """Ensemble kernel estimate of ``E ||f_n||^2_{H^-s_low}`` over the configured samples."""
    data = parse_initial_data(spec, cfg.seed)

    def one(i):
        seq = MapSequence.from_params(step_params(cfg.seed, i, n, cfg.kind, label="maps"))
        return neg_norm_kernel_mc(data, seq, cfg.s_low, cfg.mc_pairs, generator(cfg.seed, "kernel-mc", i), cfg.kernel_K)[0]

    vals = np.array(_map_samples(cfg, one, range(cfg.n_samples)))
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0


def run_low_freq_decay(cfg: EnsembleConfig, ensemble: MixingEnsemble | None = None, spec: str | None = None) -> LowFreqReport:
    """Trace of ``E ||f_n||^2_{H^-s_low}``, fitted rate alpha, and kernel Monte-Carlo cross-checks."""
    spec = cfg.f0 if spec is None else spec
    if ensemble is None or spec not in ensemble.specs:
        ensemble = run_mixing_ensemble(cfg, [spec])
    tr = _ensemble_trace(cfg, ensemble, ensemble.specs.index(spec), "low", "low_freq")
    checks = []
    if len(parse_initial_data(spec, cfg.seed)):
        for n in cfg.mc_steps:
            if n > cfg.n_steps:
                continue
            km, ks = kernel_mc_series(cfg, spec, n)
            sm, ss = tr.mean[n], tr.stderr[n]
            z = (km - sm) / math.hypot(ks, ss) if math.hypot(ks, ss) > 0 else (0.0 if km == sm else math.inf)
            checks.append((n, float(sm), float(ss), km, ks, float(z)))
    return LowFreqReport(tr, checks)


# -- two-point decorrelation ------------------------------------------------------

@dataclass
class TwoPointRow:
    d0: float
    mean: np.ndarray
    stderr: np.ndarray
    fit: RateFit
    prefactor: float = float("nan")


def _two_point_sample(cfg, kern, i):
    params = step_params(cfg.seed, i, cfg.n_steps, cfg.kind, label="two-point")
    u = uniform_blocks(cfg.seed, "two-point-init", i, cfg.two_point_pairs)
    x, y, ang = u[:, 0] * TWO_PI, u[:, 1] * TWO_PI, u[:, 2] * TWO_PI
    out = np.empty((len(cfg.separations), cfg.n_steps + 1))
    for s, d0 in enumerate(cfg.separations):
        x1, y1 = x, y
        x2, y2 = np.mod(x + d0 * np.cos(ang), TWO_PI), np.mod(y + d0 * np.sin(ang), TWO_PI)
        out[s, 0] = kern(x1 - x2, y1 - y2).mean()
        for n in range(cfg.n_steps):
            x1, y1 = shear_forward(*params[n], x1, y1)
            x2, y2 = shear_forward(*params[n], x2, y2)
            out[s, n + 1] = kern(x1 - x2, y1 - y2).mean()
    return out


def two_point_window(mean: np.ndarray, se: np.ndarray) -> np.ndarray:
    """From the peak of ``|mean|`` to the last contiguous step with ``|mean| >= 3 SE``."""
    a = np.abs(mean)
    start = int(np.argmax(a))
    idx = [start]
    for j in range(start + 1, len(a)):
        if se[j] > 0 and a[j] < 3.0 * se[j]:
            break
        idx.append(j)
    return np.array(idx, dtype=int)


def run_two_point(cfg: EnsembleConfig, separations=None) -> list[TwoPointRow]:
    """``|E K_x(phi^n x, phi^n y)|`` for pairs at distance ``d0``; fitted decay per ``d0``.

    The prefactor of each row is ``max_n |E K_x| e^{alpha_ref n}`` over its
    significant steps, with ``alpha_ref`` fitted at the largest separation.
    """
    if separations is not None:
        cfg = cfg.replace(separations=tuple(separations))
    kern = KernelTable(cfg.s_low, cfg.kernel_K, mean_free=True)
    out = np.stack(_map_samples(cfg, lambda i: _two_point_sample(cfg, kern, i), range(cfg.n_samples)))
    rows = []
    n = np.arange(cfg.n_steps + 1)
    for s, d0 in enumerate(cfg.separations):
        vals = out[:, s]
        mean = vals.mean(axis=0)
        se = vals.std(axis=0, ddof=1) / math.sqrt(len(vals)) if len(vals) > 1 else np.zeros_like(mean)
        win = two_point_window(mean, se)
        fit = fit_exponential_rate(n[win], np.abs(mean[win]), se[win]) if len(win) >= 2 else \
            RateFit(float("nan"), float("nan"), float("nan"), float("nan"), len(win))
        rows.append(TwoPointRow(float(d0), mean, se, fit))
    ref = max(rows, key=lambda r: r.d0).fit.rate
    ref = ref if np.isfinite(ref) else 0.0
    for r in rows:
        win = two_point_window(r.mean, r.stderr)
        r.prefactor = float(np.max(np.abs(r.mean[win]) * np.exp(ref * n[win])))
    return rows


# -- quenched ----------------------------------------------------------------------------

@dataclass
class QuenchedReport:
    K_half: np.ndarray
    K_full: np.ndarray
    horizons: tuple
    moments_half: dict
    moments_full: dict
    caps: np.ndarray
    mu_hat: float

    @property
    def stabilization(self) -> float:
        """Relative change of ``E K`` between half and full horizon."""
        return abs(self.moments_full[1.0] - self.moments_half[1.0]) / self.moments_half[1.0]


def quenched_constants(norms: np.ndarray, caps: np.ndarray, mu_hat: float, horizon: int) -> np.ndarray:
    """``K = max_{n <= horizon} e^{mu n / 2} ||f_n|| / ||f_0||`` per sample (squared norms in)."""
    out = np.empty(norms.shape[0])
    for i in range(norms.shape[0]):
        last = min(horizon, int(caps[i]) - 1)
        r = np.sqrt(norms[i, :last + 1] / norms[i, 0])
        out[i] = float(np.max(np.exp(0.5 * mu_hat * np.arange(last + 1)) * r))
    return out


def run_quenched(cfg: EnsembleConfig, mu_hat: float, ensemble: MixingEnsemble | None = None) -> QuenchedReport:
    """Per-sample constants along true trajectories at horizons ``n_steps/2`` and ``n_steps``."""
    if ensemble is None:
        ensemble = run_mixing_ensemble(cfg, [cfg.f0], path="forward")
    norms = ensemble.norms_delta[0]
    caps = ensemble.caps[0]
    h = (cfg.n_steps // 2, cfg.n_steps)
    Kh = quenched_constants(norms, caps, mu_hat, h[0])
    Kf = quenched_constants(norms, caps, mu_hat, h[1])
    mom = lambda K: {q: float(np.mean(K ** q)) for q in QUENCHED_Q}
    return QuenchedReport(Kh, Kf, h, mom(Kh), mom(Kf), caps, float(mu_hat))


# -- psi, symbol and inequalities -----------------------------------------------------------

def build_psi(cfg: EnsembleConfig, p: float | None = None) -> PsiGrid:
    p = cfg.p if p is None else p
    return psi_power_iteration(p, cfg.psi_nx, cfg.psi_ntheta, cfg.psi_maps, cfg.psi_iters, cfg.seed, cfg.kind)


def random_field(seed: int, label: str, index: int, kmax_cap: int = 32) -> SparseInitialData:
    """Mean-zero random data with a random mode count, band and spectral slope."""
    rng = generator(seed, label, index)
    n_modes = int(rng.integers(1, 33))
    kmax = int(rng.integers(1, kmax_cap + 1))
    slope = float(rng.uniform(0.0, 2.0))
    return SparseInitialData.random(rng, n_modes, kmax, 1, slope)


@dataclass
class GardingResult:
    c: float
    C: float
    calib_upper: np.ndarray
    calib_lower: np.ndarray
    passes: int = 0
    total: int = 0
    lower_margin: np.ndarray = field(default_factory=lambda: np.zeros(0))
    upper_margin: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _garding_terms(symbol, d: SparseInitialData, N: int, p: float, s_low: float):
    f = d.to_field(N)
    return quadratic_form(symbol, f), sobolev_norm_sq(f, -p / 2.0), sobolev_norm_sq(f, -s_low)


def garding_penalty(p: float, s_low: float, k_elliptic: float = 2.0) -> float:
    """Smallest ``C`` with ``C <k>^{-2 s_low} >= <k>^{-p}`` for ``|k| <= k_elliptic``.

    The symbol vanishes for ``|xi| <= 1`` and is only partly switched on below
    ``|xi| = 2``, so the low-order penalty has to absorb those modes.
    """
    return (1.0 + k_elliptic ** 2) ** ((2.0 * s_low - p) / 2.0)


def garding_calibrate(symbol, cfg: EnsembleConfig, level: float = 0.999) -> GardingResult:
    """Fit the constants on ``garding_calib`` random fields.

    ``C`` is the larger of the low-mode penalty and a one-sided normal
    prediction bound on ``Q / ||f||^2_{H^{-p/2}}``; ``c`` is a lower prediction
    bound on ``log((Q + C ||f||^2_{H^-s_low}) / ||f||^2_{H^{-p/2}})``.
    """
    rows = [_garding_terms(symbol, random_field(cfg.seed, "garding-calib", i), cfg.symbol_grid, cfg.p, cfg.s_low)
            for i in range(cfg.garding_calib)]
    Q, hp, hl = map(np.array, zip(*rows))
    n = len(Q)
    t = stats.t.ppf(level, n - 1) * math.sqrt(1.0 + 1.0 / n) if n > 1 else 0.0
    sd = lambda v: v.std(ddof=1) if len(v) > 1 else 0.0
    up = Q / hp
    C = max(float(up.mean() + t * sd(up)), garding_penalty(cfg.p, cfg.s_low))
    low = (Q + C * hl) / hp
    if np.any(low <= 0):
        return GardingResult(0.0, C, up, low)
    c = float(np.exp(np.log(low).mean() - t * sd(np.log(low))))
    return GardingResult(c, C, up, low)


def garding_validate(symbol, cfg: EnsembleConfig, res: GardingResult) -> GardingResult:
    lo, hi = [], []
    for i in range(cfg.garding_fields):
        Q, hp, hl = _garding_terms(symbol, random_field(cfg.seed, "garding-valid", i), cfg.symbol_grid, cfg.p, cfg.s_low)
        lo.append(Q - (res.c * hp - res.C * hl))
        hi.append(res.C * hp - Q)
    lo, hi = np.array(lo), np.array(hi)
    res.lower_margin, res.upper_margin = lo, hi
    res.total = len(lo)
    res.passes = int(np.sum((lo >= 0) & (hi >= 0)))
    return res


@dataclass
class LasotaYorkeRow:
    role: str
    lhs: float
    lhs_se: float
    contracted: float   # e^{-Lambda} <Op(a) f0, f0>
    norm: float         # ||f0||^2_{H^{-(p+eps)/2}}
    residual: float     # lhs - contracted
    holds: bool = True


@dataclass
class LasotaYorkeReport:
    C: float
    lambda_p: float
    rows: list

    @property
    def validation(self) -> list:
        return [r for r in self.rows if r.role == "valid"]

    @property
    def passes(self) -> int:
        return sum(r.holds for r in self.validation)


def lasota_yorke_terms(symbol, d: SparseInitialData, cfg: EnsembleConfig, lambda_p: float):
    """``(E <Op f_1, f_1>, SE, e^{-Lambda} <Op f_0, f_0>, ||f_0||^2_{H^{-(p+eps)/2}})``."""
    N = cfg.symbol_grid
    X, Y = grid_points(N)
    f0 = ScalarField(d(X, Y))
    q0 = quadratic_form(symbol, f0)

    def one(j):
        A, Ap, g, gp = step_params(cfg.seed, j, 1, cfg.kind, label="ly-maps")[0]
        x, y = shear_inverse(A, Ap, g, gp, X, Y, reduce=False)
        return quadratic_form(symbol, ScalarField(d(x, y)))

    q1 = np.array(_map_samples(cfg, one, range(cfg.ly_maps)))
    se = float(q1.std(ddof=1) / math.sqrt(len(q1))) if len(q1) > 1 else 0.0
    return float(q1.mean()), se, math.exp(-lambda_p) * q0, sobolev_norm_sq(f0, -(cfg.p + cfg.eps) / 2.0)


def run_lasota_yorke(cfg: EnsembleConfig, symbol, lambda_p: float) -> LasotaYorkeReport:
    """Calibrate ``C`` on ``ly_calib`` fields, then test
    ``E<Op f1, f1> - 3 SE <= e^{-Lambda}<Op f0, f0> + C ||f0||^2`` on ``ly_fields`` fresh ones.

    The first validation field is the single mode ``cos(16 x)``.
    """
    rows = []
    for i in range(cfg.ly_calib):
        lhs, se, con, nrm = lasota_yorke_terms(symbol, random_field(cfg.seed, "ly-calib", i, 16), cfg, lambda_p)
        rows.append(LasotaYorkeRow("calib", lhs, se, con, nrm, lhs - con))
    C = max([0.0] + [r.residual / r.norm for r in rows if r.norm > 0])
    for i in range(cfg.ly_fields):
        d = SparseInitialData.cosine((16, 0)) if i == 0 else random_field(cfg.seed, "ly-valid", i, 16)
        lhs, se, con, nrm = lasota_yorke_terms(symbol, d, cfg, lambda_p)
        rhs = con + C * nrm
        rows.append(LasotaYorkeRow("valid", lhs, se, con, nrm, lhs - con,
                                   bool(lhs - 3.0 * se <= rhs + 1e-12 * max(abs(rhs), 1.0))))
    return LasotaYorkeReport(float(C), float(lambda_p), rows)


def egorov_scaling(cfg: EnsembleConfig, Ks=None, symbol=None) -> list[tuple[int, float]]:
    """``||remainder|| / ||main||`` for a random step and data banded in ``K/2 < |k|_inf <= K``."""
    Ks = cfg.egorov_K if Ks is None else Ks
    a = bessel_multiplier(-cfg.p) if symbol is None else symbol
    seq = MapSequence.sample(cfg.seed, 0, 1, cfg.kind, label="egorov")
    out = []
    for K in Ks:
        d = SparseInitialData.random(generator(cfg.seed, "egorov-field", int(K)), 8, int(K), int(K) // 2 + 1)
        N = max(64, 4 * int(K))
        main, rem = egorov_decompose(a, seq, d, N=N, M=cfg.egorov_grid)
        out.append((int(K), rem.l2_norm() / main.l2_norm()))
    return out


# -- pipeline ---------------------------------------------------------------------------------

@dataclass
class PipelineReport:
    cfg: EnsembleConfig
    lyapunov: object
    moment_direct: tuple
    curve: object
    psi: PsiGrid
    psi_residual: float
    symbol: object
    seminorm: tuple
    garding: GardingResult
    egorov: list
    lasota_yorke: LasotaYorkeReport
    two_point: list
    mixing: dict
    low_freq: LowFreqReport
    quenched: QuenchedReport
    flags: dict


def _lambda_at(curve, p):
    for q, v, s, g in zip(curve.p, curve.value, curve.stderr, curve.psis):
        if abs(q - p) < 1e-15:
            return v, s, g
    return None


def run_full_pipeline(cfg: EnsembleConfig) -> PipelineReport:
    flags = {}
    lyap = top_lyapunov(cfg.lyap_steps, cfg.lyap_samples, cfg.seed, cfg.kind)
    flags["lyapunov_positive"] = lyap.value - Z99 * lyap.stderr > 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        direct = moment_lyapunov_direct(cfg.p, cfg.moment_steps, cfg.moment_samples, cfg.seed, cfg.kind)
    curve = lambda_curve(cfg.p_list, cfg.psi_nx, cfg.psi_ntheta, cfg.psi_maps, cfg.psi_iters, cfg.seed, cfg.kind)
    hit = _lambda_at(curve, cfg.p)
    if hit is None:
        psi = build_psi(cfg)
        lam, lam_se = psi.lambda_p, psi.stderr
    else:
        lam, lam_se, psi = hit
    flags["secant_matches_lyapunov"] = abs(curve.secant_slope - lyap.value) <= 3 * math.hypot(curve.secant_stderr, lyap.stderr)
    flags["lambda_concave"] = curve.concave
    flags["direct_matches_power"] = abs(direct[0] - lam) <= 3 * math.hypot(direct[1], lam_se)
    flags["psi_positive"] = bool(psi.values.min() > 0)
    flags["psi_cauchy"] = bool(psi.increments[-1] < 0.05)
    resid = eigen_residual(psi, cfg.psi_maps, cfg.seed, cfg.kind)
    flags["psi_residual_small"] = resid <= 0.1

    symbol = build_symbol(psi, cfg.p, cfg.eps, cfg.N_max, cfg.rank_tol)
    sn1 = seminorm_estimate(symbol, 2, -cfg.p, 1 - cfg.eps, cfg.seminorm_x, cfg.seminorm_xi,
                            generator(cfg.seed, "seminorm", 0))
    sn2 = seminorm_estimate(symbol, 2, -cfg.p, 1 - cfg.eps, 2 * cfg.seminorm_x, 2 * cfg.seminorm_xi,
                            generator(cfg.seed, "seminorm", 1))
    flags["seminorm_stable"] = abs(sn2 - sn1) <= 0.1 * max(sn1, sn2)

    gard = garding_validate(symbol, cfg, garding_calibrate(symbol, cfg))
    flags["garding"] = gard.passes >= math.ceil(0.99 * gard.total)
    ego = egorov_scaling(cfg)
    ratios = [r for _, r in ego]
    flags["egorov_decreasing"] = all(b < a for a, b in zip(ratios, ratios[1:])) if cfg.kind != "identity" \
        else max(ratios) <= 1e-9
    ly = run_lasota_yorke(cfg, symbol, lam)
    flags["lasota_yorke"] = ly.passes == len(ly.validation)

    tp = run_two_point(cfg)
    big = max(tp, key=lambda r: r.d0)
    flags["two_point_decay"] = big.fit.rate - Z99 * big.fit.rate_se > 0

    ens = run_mixing_ensemble(cfg, sorted(set([cfg.f0] + cfg.f0_family.split(";")), key=lambda s: s))
    mixing = {s: run_annealed_mixing(cfg, ens, s) for s in ens.specs}
    main = mixing[cfg.f0]
    flags["mixing_rate_positive"] = main.mu - Z99 * 0.5 * main.rate_se > 0 and main.fit.r2 > 0.9
    mus = np.array([mixing[s].mu for s in cfg.f0_family.split(";")])
    flags["rate_independent"] = bool(np.all(np.isfinite(mus)) and (mus.max() - mus.min()) <= 0.3 * abs(mus.mean()))
    early = np.array([mixing[s].early_fit.rate if mixing[s].early_fit else np.nan for s in cfg.f0_family.split(";")])
    flags["rate_independent_early"] = bool(np.all(np.isfinite(early)) and np.ptp(early) <= 0.3 * abs(early.mean()))
    low = run_low_freq_decay(cfg, ens, cfg.f0)
    flags["low_freq_dominates"] = low.trace.rate >= main.mu - 2 * 0.5 * main.rate_se
    flags["kernel_agrees"] = low.kernel_agrees
    flags["resolution_ok"] = all(t.max_deviation < cfg.res_tol for t in mixing.values())

    qens = run_mixing_ensemble(cfg, [cfg.f0], path="forward")
    quen = run_quenched(cfg, main.mu if np.isfinite(main.mu) else 0.0, qens)
    flags["quenched_K_at_least_one"] = bool(np.all(quen.K_full >= 1 - 1e-12))
    flags["quenched_stable"] = quen.stabilization <= 0.2
    return PipelineReport(cfg, lyap, direct, curve, psi, resid, symbol, (sn1, sn2), gard, ego, ly, tp,
                          mixing, low, quen, {k: bool(v) for k, v in flags.items()})


def predicted_rate(lambda_p: float, alpha0: float) -> float:
    """``min(Lambda(p) / 2, alpha_0)``."""
    return min(lambda_p / 2.0, alpha0)


CONFIG_FIELDS = [f.name for f in fields(EnsembleConfig)]
