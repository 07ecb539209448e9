"""Annealed H^-delta and H^-2.5 decay for several initial data on shared maps.

    python scripts/mixing_rates.py --samples 200 --steps 25
"""
import argparse

from shearmix.experiments import EnsembleConfig, run_annealed_mixing, run_low_freq_decay, run_mixing_ensemble


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--steps", type=int, default=25)
    ap.add_argument("--grid", type=int, default=256)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--family", default="cos:1,0;cos:6,0;cos:12,0")
    args = ap.parse_args()
    cfg = EnsembleConfig(n_samples=args.samples, n_steps=args.steps, N=args.grid, workers=args.workers,
                         f0_family=args.family)
    ens = run_mixing_ensemble(cfg)
    print(f"{'f0':>12} {'mu':>9} {'se':>9} {'R2':>6} {'window':>9} {'early rate':>11} {'alpha(H^-2.5)':>14}")
    for spec in ens.specs:
        tr = run_annealed_mixing(cfg, ens, spec)
        low = run_low_freq_decay(cfg.replace(mc_steps=()), ens, spec).trace
        early = tr.early_fit.rate if tr.early_fit else float("nan")
        w = f"{tr.fit.window[0]:.0f}-{tr.fit.window[1]:.0f}" if tr.fit.n_used >= 2 else "none"
        print(f"{spec:>12} {tr.mu:9.5f} {0.5 * tr.rate_se:9.5f} {tr.fit.r2:6.3f} {w:>9} {early:11.4f} "
              f"{low.rate:14.4f}")


if __name__ == "__main__":
    main()
