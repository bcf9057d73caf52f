#!/usr/bin/env python3
"""Steer Phi_1 to rest at alpha = 1.5 and check the final state three ways."""
from degenctrl.control import InitialData, final_state_boundary, synthesize_boundary
from degenctrl.spectrum import make_operator

op = make_operator(1.5)
mu = InitialData.mode(1)
ctrl = synthesize_boundary(op, mu, 1.0, 6)
print(f"||H||_H1 = {ctrl.norm_h1:.6e}  (precision: {ctrl.family.precision_used})")
for method in ("closed", "quadrature", "ode"):
    fs = final_state_boundary(op, mu, ctrl, N_check=8 if method == "ode" else None, method=method)
    print(f"{method:>10}: max_(n<=N) |beta_n(T)| = {fs.max_controlled:.2e}, tail = {fs.tail_profile[:2]}")
