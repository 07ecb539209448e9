"""Garding sandwich, one-step Lasota-Yorke bound and Egorov remainder scaling.

    python scripts/inequalities.py
"""
import argparse

from shearmix.experiments import (EnsembleConfig, build_psi, egorov_scaling, garding_calibrate, garding_validate,
                                  run_lasota_yorke)
from shearmix.symbol_calculus import build_symbol


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--p", type=float, default=0.1)
    args = ap.parse_args()
    cfg = EnsembleConfig(seed=args.seed, p=args.p)
    psi = build_psi(cfg)
    S = build_symbol(psi, cfg.p, cfg.eps, cfg.N_max, cfg.rank_tol)
    print(f"Lambda({cfg.p}) = {psi.lambda_p:.5f} +- {psi.stderr:.5f}")

    g = garding_validate(S, cfg, garding_calibrate(S, cfg))
    print(f"Garding: c = {g.c:.4f}, C = {g.C:.3f}, {g.passes}/{g.total} validation fields pass")
    ly = run_lasota_yorke(cfg, S, psi.lambda_p)
    print(f"Lasota-Yorke: C = {ly.C:.4f}, {ly.passes}/{len(ly.validation)} validation fields pass")
    for k, r in egorov_scaling(cfg, symbol=S):
        print(f"Egorov K = {k:3d}: remainder / main = {r:.5f}")


if __name__ == "__main__":
    main()
