"""Command line entry point: config parsing, run dispatch and CSV output.

Exit codes: 0 success, 2 usage, 3 validation, 4 I/O.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import warnings
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .cocycle_stats import PsiGrid, eigen_residual, lambda_curve, moment_lyapunov_direct, top_lyapunov
from .experiments import (QUENCHED_Q, Z99, EnsembleConfig, MixingTrace, RateFit, build_psi, egorov_scaling,
                          garding_calibrate, garding_validate, parse_initial_data, run_annealed_mixing,
                          run_full_pipeline, run_lasota_yorke, run_low_freq_decay, run_mixing_ensemble,
                          run_quenched, run_two_point)
from .rng import generator
from .spectral_fields import ScalarField, grid_points
from .symbol_calculus import build_symbol, seminorm_estimate
from .torus_maps import shear_inverse, step_params

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 2, 3, 4

SUBCOMMANDS = ("lyapunov", "moment-lyapunov", "psi-p", "symbol", "garding", "egorov", "lasota-yorke",
               "two-point", "low-freq", "mix", "quenched", "full")

FIELD_TYPES = {f.name: f.type for f in fields(EnsembleConfig)}
TUPLE_FIELDS = {"p_list": float, "egorov_K": int, "separations": float, "mc_steps": int}
INT_FIELDS = {n for n, t in FIELD_TYPES.items() if t == "int"}
FLOAT_FIELDS = {n for n, t in FIELD_TYPES.items() if t in ("float", "float | None")}
STR_FIELDS = {n for n, t in FIELD_TYPES.items() if t == "str"}

# short flags whose target depends on the subcommand
ALIASES = {"samples": "n_samples", "steps": "n_steps", "grid": "N"}
SUBCOMMAND_ALIASES = {
    "lyapunov": {"samples": "lyap_samples", "steps": "lyap_steps"},
    "moment-lyapunov": {"samples": "moment_samples", "steps": "moment_steps"},
}
KNOWN_KEYS = set(ALIASES) | set(FIELD_TYPES)


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    subcommand: str
    overrides: dict = field(default_factory=dict)  # canonical field name -> raw string
    config_path: str | None = None
    out: str = "out"
    seed: int | None = None
    workers: int | None = None

    @property
    def samples(self):
        return self._get("samples")

    @property
    def steps(self):
        return self._get("steps")

    def _get(self, alias):
        target = resolve_key(alias, self.subcommand)
        return convert_value(target, self.overrides[target]) if target in self.overrides else None


def resolve_key(key: str, subcommand: str | None = None) -> str:
    """Map a flag or file key (dashes or underscores) to an :class:`EnsembleConfig` field."""
    k = key.strip().replace("-", "_")
    if subcommand in SUBCOMMAND_ALIASES and k in SUBCOMMAND_ALIASES[subcommand]:
        return SUBCOMMAND_ALIASES[subcommand][k]
    return ALIASES.get(k, k)


def convert_value(name: str, raw: str):
    """Parse a raw string into the type of field ``name``; ``CliError(3)`` names the key on failure."""
    raw = raw.strip()
    try:
        if name in TUPLE_FIELDS:
            return tuple(TUPLE_FIELDS[name](_number(t)) for t in raw.split(",") if t.strip())
        if name in INT_FIELDS:
            v = _number(raw)
            if v != int(v):
                raise ValueError
            return int(v)
        if name in FLOAT_FIELDS:
            return float(raw)
        return raw
    except (ValueError, OverflowError):
        raise CliError(EXIT_VALIDATION, f"{name}: cannot parse {raw!r}") from None


def _number(t: str):
    t = t.strip()
    try:
        return int(t)
    except ValueError:
        return float(t)


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, tuple):
        return ",".join(format_value(x) for x in v)
    return str(v)


# -- parsing -------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--out", metavar="DIR", default="out")
    for flag in ("seed", "samples", "steps", "grid", "p", "eps", "delta", "workers"):
        common.add_argument(f"--{flag}", dest=flag, metavar="VALUE")
    for name in FIELD_TYPES:
        if name in ("seed", "p", "eps", "delta", "workers"):
            continue
        common.add_argument(f"--{name.replace('_', '-')}", dest=name, metavar="VALUE", help=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="shearmix", description="Random shear-map mixing experiments.")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def parse_cli(argv) -> RunConfig:
    """Parse ``argv`` (without the program name); usage errors raise ``CliError(2)``."""
    parser = _parser()
    argv = list(argv)
    if not argv:
        raise CliError(EXIT_USAGE, parser.format_usage() + "error: a subcommand is required")
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse has already printed the usage text
        raise CliError(EXIT_USAGE if exc.code else EXIT_OK, "") from None
    if ns.subcommand is None:
        raise CliError(EXIT_USAGE, parser.format_usage() + "error: a subcommand is required")
    overrides = {}
    for key in ["samples", "steps", "grid"] + list(FIELD_TYPES):
        raw = getattr(ns, key, None)
        if raw is not None:
            overrides[resolve_key(key, ns.subcommand)] = raw
    rc = RunConfig(ns.subcommand, overrides, ns.config, ns.out)
    if "seed" in overrides:
        rc.seed = convert_value("seed", overrides["seed"])
    if "workers" in overrides:
        rc.workers = convert_value("workers", overrides["workers"])
    return rc


def load_config(path: str, subcommand: str | None = None) -> dict:
    """Read a flat ``key = value`` file (``#`` comments); keys are flag names."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read config {path}: {exc.strerror}") from None
    out, unknown = {}, []
    for lineno, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        key, sep, value = text.partition("=")
        if not sep or not key.strip() or not value.strip():
            raise CliError(EXIT_VALIDATION, f"{path}:{lineno}: expected 'key = value'")
        k = key.strip().replace("-", "_")
        if k not in KNOWN_KEYS:
            unknown.append(key.strip())
            continue
        out[resolve_key(k, subcommand)] = value.strip()
    if unknown:
        raise CliError(EXIT_VALIDATION, "unknown config keys: " + ", ".join(unknown))
    return out


def effective_config(rc: RunConfig) -> EnsembleConfig:
    """Defaults, then the config file, then command-line flags."""
    raw = load_config(rc.config_path, rc.subcommand) if rc.config_path else {}
    raw.update(rc.overrides)
    values = {k: convert_value(k, v) for k, v in raw.items()}
    try:
        return EnsembleConfig(**values)
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, str(exc)) from None
    except TypeError as exc:
        raise CliError(EXIT_VALIDATION, str(exc)) from None


def config_map(cfg: EnsembleConfig) -> dict:
    return {k: format_value(v) for k, v in cfg.as_dict().items()}


# -- results and output ----------------------------------------------------------------

@dataclass
class RunResult:
    """Named tables to write; each value is ``(header or None, comment lines, rows)``."""

    name: str
    tables: dict = field(default_factory=dict)

    def trace(self, name: str, tr: MixingTrace | None = None, rows=None):
        rows = tr.rows() if tr is not None else rows
        self.tables[f"{name}_trace.csv"] = (("n", "mean", "stderr", "count"), [], rows)

    def report(self, name: str, items):
        self.tables[f"{name}_report.csv"] = (("key", "value"), [], list(items))

    def table(self, filename: str, header, rows, comments=()):
        self.tables[filename] = (tuple(header), list(comments), rows)


def manifest_text(cfg: EnsembleConfig, subcommand: str) -> str:
    lines = [f"# shearmix {__version__}", f"# subcommand: {subcommand}"]
    lines += [f"{k} = {v}" for k, v in config_map(cfg).items()]
    return "\n".join(lines) + "\n"


def _csv(header, comments, rows) -> str:
    buf = io.StringIO()
    buf.writelines(f"# {c}\n" for c in comments)
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    w.writerows([format_value(v) for v in row] for row in rows)
    return buf.getvalue()


def write_outputs(result: RunResult, out_dir: str, cfg: EnsembleConfig) -> list[str]:
    """Write the manifest then every table (sorted by name); returns the paths written."""
    paths = []
    try:
        os.makedirs(out_dir, exist_ok=True)
        items = [("manifest.txt", manifest_text(cfg, result.name))]
        items += [(name, _csv(*result.tables[name])) for name in sorted(result.tables)]
        for name, text in items:
            path = os.path.join(out_dir, name)
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            paths.append(path)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write to {out_dir}: {exc.strerror or exc}") from None
    return paths


# -- report builders -----------------------------------------------------------------

def fit_items(prefix: str, fit: RateFit | None):
    fit = fit or RateFit(math.nan, math.nan, math.nan, math.nan, 0)
    return [(f"{prefix}rate", fit.rate), (f"{prefix}rate_se", fit.rate_se), (f"{prefix}intercept", fit.intercept),
            (f"{prefix}r2", fit.r2), (f"{prefix}n_used", fit.n_used)]


def trace_items(tr: MixingTrace):
    items = fit_items("", tr.fit)
    items += [("rate_se_jackknife", tr.rate_se_jackknife), ("mu", tr.mu), ("max_deviation", tr.max_deviation),
              ("min_cap", int(tr.caps.min()) if len(tr.caps) else 0)]
    items += fit_items("early_", tr.early_fit)
    return items


def psi_table(res: RunResult, psi: PsiGrid, name: str = "psi"):
    v = psi.values
    rows = [(ix, iy, it, v[ix, iy, it]) for ix in range(v.shape[0]) for iy in range(v.shape[1])
            for it in range(v.shape[2])]
    comments = [f"p={format_value(float(psi.p))} nx={psi.nx} ntheta={psi.ntheta} "
                f"lambda_p={format_value(float(psi.lambda_p))}"]
    res.table(f"{name}.csv", ("ix", "iy", "itheta", "value"), rows, comments)


def symbol_table(res: RunResult, symbol, nx: int = 8, kmax: int = 8):
    xs = np.arange(nx) * (2 * np.pi / nx)
    ks = np.arange(-kmax, kmax + 1)
    IX, IY, K1, K2 = np.meshgrid(np.arange(nx), np.arange(nx), ks, ks, indexing="ij")
    vals = symbol(xs[IX], xs[IY], K1.astype(float), K2.astype(float))
    rows = list(zip(IX.ravel().tolist(), IY.ravel().tolist(), K1.ravel().tolist(), K2.ravel().tolist(),
                    vals.ravel().tolist()))
    res.table("symbol.csv", ("ix", "iy", "k1", "k2", "value"), rows)


def field_table(res: RunResult, f: ScalarField, seed: int, n_steps: int, name: str):
    N = f.N
    X, Y = grid_points(N)
    I, J = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    rows = zip(I.ravel().tolist(), J.ravel().tolist(), X.ravel().tolist(), Y.ravel().tolist(), f.values.ravel().tolist())
    res.table(f"{name}.csv", ("i", "j", "x", "y", "value"), list(rows), [f"N={N} seed={seed} n_steps={n_steps}"])


def final_field(cfg: EnsembleConfig, spec: str, n: int, sample: int = 0) -> ScalarField:
    """``f_n`` for one sample on the N grid (true trajectory)."""
    data = parse_initial_data(spec, cfg.seed)
    params = step_params(cfg.seed, sample, cfg.n_steps, cfg.kind, label="maps")
    x, y = grid_points(cfg.N)
    for row in params[n - 1::-1] if n > 0 else []:
        x, y = shear_inverse(*row, x, y, reduce=False)
    return ScalarField(data(x, y))


def _lyapunov(cfg, res):
    est = top_lyapunov(cfg.lyap_steps, cfg.lyap_samples, cfg.seed, cfg.kind)
    lo, hi = est.ci(Z99)
    res.report("lyapunov", [("lambda", est.value), ("stderr", est.stderr), ("ci99_low", lo), ("ci99_high", hi),
                            ("n_steps", est.n_steps), ("n_samples", est.n_samples)])
    return est


def _moment(cfg, res):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        direct = moment_lyapunov_direct(cfg.p, cfg.moment_steps, cfg.moment_samples, cfg.seed, cfg.kind)
    curve = lambda_curve(cfg.p_list, cfg.psi_nx, cfg.psi_ntheta, cfg.psi_maps, cfg.psi_iters, cfg.seed, cfg.kind)
    items = [("p", cfg.p), ("direct", direct[0]), ("direct_stderr", direct[1])]
    for q, v, s in zip(curve.p, curve.value, curve.stderr):
        items += [(f"lambda_p{format_value(float(q))}", v), (f"lambda_p{format_value(float(q))}_stderr", s)]
    items += [("secant_slope", curve.secant_slope), ("secant_stderr", curve.secant_stderr), ("concave", curve.concave)]
    res.report("moment_lyapunov", items)
    res.table("lambda_curve.csv", ("p", "lambda", "stderr"), list(zip(curve.p, curve.value, curve.stderr)))


def _psi(cfg, res):
    psi = build_psi(cfg)
    resid = eigen_residual(psi, cfg.psi_maps, cfg.seed, cfg.kind)
    res.report("psi_p", [("p", psi.p), ("lambda_p", psi.lambda_p), ("stderr", psi.stderr),
                         ("final_increment", psi.increments[-1]), ("min_psi", psi.values.min()),
                         ("max_psi", psi.values.max()), ("eigen_residual", resid)])
    res.table("psi_increments.csv", ("iteration", "sup_increment", "log_factor"),
              list(zip(range(1, len(psi.increments) + 1), psi.increments, psi.log_factors)))
    psi_table(res, psi)
    return psi


def _symbol(cfg, res, psi=None):
    psi = psi if psi is not None else build_psi(cfg)
    S = build_symbol(psi, cfg.p, cfg.eps, cfg.N_max, cfg.rank_tol)
    sn = [seminorm_estimate(S, 2, -cfg.p, 1 - cfg.eps, m * cfg.seminorm_x, m * cfg.seminorm_xi,
                            generator(cfg.seed, "seminorm", j)) for j, m in enumerate((1, 2))]
    res.report("symbol", [("p", cfg.p), ("eps", cfg.eps), ("n_shells", len(S.terms)),
                          ("max_rank", max((t.rank for t in S.terms), default=0)),
                          ("seminorm", sn[0]), ("seminorm_doubled", sn[1]),
                          ("seminorm_rel_change", abs(sn[1] - sn[0]) / max(sn))])
    psi_table(res, psi)
    symbol_table(res, S)
    return psi, S


def _garding(cfg, res, S=None):
    S = S if S is not None else build_symbol(build_psi(cfg), cfg.p, cfg.eps, cfg.N_max, cfg.rank_tol)
    g = garding_validate(S, cfg, garding_calibrate(S, cfg))
    res.report("garding", [("c", g.c), ("C", g.C), ("passes", g.passes), ("total", g.total),
                           ("min_lower_margin", g.lower_margin.min()), ("min_upper_margin", g.upper_margin.min())])
    return g


def _egorov(cfg, res, S=None):
    rows = egorov_scaling(cfg, symbol=S)
    res.table("egorov.csv", ("K", "ratio"), rows)
    ratios = [r for _, r in rows]
    res.report("egorov", [("decreasing", all(b < a for a, b in zip(ratios, ratios[1:])))]
               + [(f"ratio_K{k}", r) for k, r in rows])
    return rows


def _lasota_yorke(cfg, res, psi=None, S=None):
    psi = psi if psi is not None else build_psi(cfg)
    S = S if S is not None else build_symbol(psi, cfg.p, cfg.eps, cfg.N_max, cfg.rank_tol)
    ly = run_lasota_yorke(cfg, S, psi.lambda_p)
    res.report("lasota_yorke", [("lambda_p", psi.lambda_p), ("C", ly.C), ("passes", ly.passes),
                                ("total", len(ly.validation))])
    res.table("lasota_yorke_fields.csv", ("index", "role", "lhs", "lhs_stderr", "contracted", "norm", "residual", "holds"),
              [(i, r.role, r.lhs, r.lhs_se, r.contracted, r.norm, r.residual, r.holds) for i, r in enumerate(ly.rows)])
    return ly


def _two_point(cfg, res):
    rows = run_two_point(cfg)
    items = []
    for j, r in enumerate(rows):
        items += [(f"d{j}", r.d0), (f"d{j}_alpha", r.fit.rate), (f"d{j}_alpha_se", r.fit.rate_se),
                  (f"d{j}_r2", r.fit.r2), (f"d{j}_prefactor", r.prefactor)]
        res.trace(f"two_point_d{j}", rows=[(n, m, s, cfg.n_samples) for n, (m, s) in enumerate(zip(r.mean, r.stderr))])
    pre = [r.prefactor for r in sorted(rows, key=lambda r: r.d0)]
    items.append(("prefactor_nonincreasing", all(b <= a for a, b in zip(pre, pre[1:]))))
    res.report("two_point", items)
    return rows


def _low_freq(cfg, res, ens=None):
    low = run_low_freq_decay(cfg, ens, cfg.f0)
    items = trace_items(low.trace)
    for n, sm, ss, km, ks, z in low.kernel_checks:
        items += [(f"n{n}_spectral", sm), (f"n{n}_spectral_se", ss), (f"n{n}_kernel", km), (f"n{n}_kernel_se", ks),
                  (f"n{n}_z", z)]
    items.append(("kernel_agrees", low.kernel_agrees))
    res.trace("low_freq", low.trace)
    res.report("low_freq", items)
    return low


def _mix(cfg, res, ens=None):
    specs = [cfg.f0] + [s for s in cfg.f0_family.split(";") if s != cfg.f0]
    ens = ens if ens is not None else run_mixing_ensemble(cfg, specs)
    traces = {s: run_annealed_mixing(cfg, ens, s) for s in specs}
    main = traces[cfg.f0]
    items = [("f0", cfg.f0)] + trace_items(main)
    items.append(("ci99_excludes_zero", bool(main.rate - Z99 * main.rate_se > 0)))
    res.trace("mix", main)
    for j, s in enumerate(specs[1:], 1):
        res.trace(f"mix_f{j}", traces[s])
        items += [(f"f{j}", s)] + [(f"f{j}_{k}", v) for k, v in trace_items(traces[s])]
    res.report("mix", items)
    last = max(int(main.caps[0]) - 1, 0)
    field_table(res, final_field(cfg, cfg.f0, last), cfg.seed, last, "mix_field")
    return ens, traces


def _quenched(cfg, res, mu_hat=None):
    ens = run_mixing_ensemble(cfg, [cfg.f0], path="forward")
    if mu_hat is None:
        mu_hat = run_annealed_mixing(cfg, ens, cfg.f0).mu
        mu_hat = mu_hat if np.isfinite(mu_hat) else 0.0
    q = run_quenched(cfg, mu_hat, ens)
    items = [("mu_hat", q.mu_hat), ("half_horizon", q.horizons[0]), ("full_horizon", q.horizons[1]),
             ("min_K", q.K_full.min())]
    for qq in QUENCHED_Q:
        items += [(f"EK{format_value(qq)}_half", q.moments_half[qq]), (f"EK{format_value(qq)}_full", q.moments_full[qq])]
    items.append(("stabilization", q.stabilization))
    res.report("quenched", items)
    res.table("quenched_samples.csv", ("sample", "K_half", "K_full", "cap"),
              list(zip(range(len(q.K_full)), q.K_half, q.K_full, q.caps)))
    return q


def _full(cfg, res):
    rep = run_full_pipeline(cfg)
    res.report("lyapunov", [("lambda", rep.lyapunov.value), ("stderr", rep.lyapunov.stderr)])
    c = rep.curve
    res.table("lambda_curve.csv", ("p", "lambda", "stderr"), list(zip(c.p, c.value, c.stderr)))
    psi_table(res, rep.psi)
    symbol_table(res, rep.symbol)
    g = rep.garding
    main = rep.mixing[cfg.f0]
    big = max(rep.two_point, key=lambda r: r.d0)
    items = [("lambda", rep.lyapunov.value), ("lambda_stderr", rep.lyapunov.stderr),
             ("moment_direct", rep.moment_direct[0]), ("moment_direct_stderr", rep.moment_direct[1]),
             ("lambda_p", rep.psi.lambda_p), ("lambda_p_stderr", rep.psi.stderr),
             ("secant_slope", c.secant_slope), ("secant_stderr", c.secant_stderr),
             ("psi_final_increment", rep.psi.increments[-1]), ("psi_min", rep.psi.values.min()),
             ("psi_residual", rep.psi_residual), ("seminorm", rep.seminorm[0]), ("seminorm_doubled", rep.seminorm[1]),
             ("garding_c", g.c), ("garding_C", g.C), ("garding_passes", g.passes), ("garding_total", g.total),
             ("lasota_yorke_C", rep.lasota_yorke.C), ("lasota_yorke_passes", rep.lasota_yorke.passes)]
    items += [(f"egorov_ratio_K{k}", r) for k, r in rep.egorov]
    items += [(f"two_point_d{j}_alpha", r.fit.rate) for j, r in enumerate(rep.two_point)]
    items += [(f"two_point_d{j}_prefactor", r.prefactor) for j, r in enumerate(rep.two_point)]
    for j, (s, tr) in enumerate(rep.mixing.items()):
        items += [(f"mix{j}_f0", s), (f"mix{j}_mu", tr.mu), (f"mix{j}_rate_se", tr.rate_se),
                  (f"mix{j}_r2", tr.fit.r2),
                  (f"mix{j}_early_rate", tr.early_fit.rate if tr.early_fit else math.nan)]
        res.trace(f"mix{j}", tr)
    items += [("low_freq_alpha", rep.low_freq.trace.rate), ("low_freq_alpha_se", rep.low_freq.trace.rate_se)]
    res.trace("low_freq", rep.low_freq.trace)
    items += [("mu_hat", main.mu), ("predicted_mu", min(rep.psi.lambda_p / 2.0, big.fit.rate)),
              ("quenched_stabilization", rep.quenched.stabilization)]
    for qq in QUENCHED_Q:
        items.append((f"quenched_EK{format_value(qq)}", rep.quenched.moments_full[qq]))
    items += [(f"flag_{k}", v) for k, v in rep.flags.items()]
    res.report("full", items)
    return rep


HANDLERS = {
    "lyapunov": _lyapunov, "moment-lyapunov": _moment, "psi-p": _psi, "symbol": _symbol, "garding": _garding,
    "egorov": _egorov, "lasota-yorke": _lasota_yorke, "two-point": _two_point, "low-freq": _low_freq,
    "mix": _mix, "quenched": _quenched, "full": _full,
}


def run(rc: RunConfig) -> tuple[EnsembleConfig, RunResult]:
    cfg = effective_config(rc)
    res = RunResult(rc.subcommand)
    HANDLERS[rc.subcommand](cfg, res)
    return cfg, res


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        rc = parse_cli(argv)
        cfg = effective_config(rc)
        res = RunResult(rc.subcommand)
        HANDLERS[rc.subcommand](cfg, res)
        paths = write_outputs(res, rc.out, cfg)
    except CliError as exc:
        if str(exc):
            print(str(exc), file=sys.stderr)
        return exc.code
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
