#!/usr/bin/env python3
"""Eigenfunction mass on (0.3, 0.6) divided by 2 - alpha, alpha in {1, 1.1, ..., 1.9, 1.99}."""
from degenctrl.eigenmass import lower_bound_sweep

grid = [1.0 + 0.1 * k for k in range(10)] + [1.99]
sw = lower_bound_sweep(0.3, 0.6, 1.0, grid, 20, jobs=4)
for alpha, r in sorted(sw.min_ratio_by_alpha.items()):
    print(f"alpha = {alpha:.2f}   min_m mass/(2-alpha) = {r:.5f}")
print(f"ODE vs quadrature: max rel diff {sw.max_rel_diff:.2e}; envelope respected: {sw.envelope_ok}")
