#!/usr/bin/env python3
"""Default cost sweep: writes sweep.csv and prints the rate fit.

usage: cost_sweep.py [OUT] [JOBS]
"""
import sys

from degenctrl.costlab import SweepConfig, emit, fit_rate, run_sweep


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "sweep.csv"
    jobs = int(sys.argv[2]) if len(sys.argv) > 2 else 4
    pts = run_sweep(SweepConfig(jobs=jobs))
    emit(pts, out)
    for p in pts:
        print(f"alpha={p.alpha:<5} T={p.T:<5} cost_h1={p.cost_h1:.4e} lower={p.lower_simple:.4e} "
              f"residual={p.residual_max:.1e}")
    fit = fit_rate(pts)
    print(f"log cost = {fit.A:.4g} + {fit.B:.4g} * rate   (r^2 = {fit.r_squared:.3f})")


if __name__ == "__main__":
    main()
