"""L^2 mass of eigenfunctions on a subinterval (a, b).

With y = j (x/ell)^kappa and K(y) = sqrt(y) J_nu(y) / J_nu'(j), the change of
variable y = j (1 - z) turns the mass into

    int_a^b Phi_m^2 dx = 2 int_{z_b}^{z_a} L(z)^2 dz,
    z_a = 1 - (a/ell)^kappa,  z_b = 1 - (b/ell)^kappa,

where L = -K(j - j z)/sqrt(j) solves

    L'' + (j^2 - (nu^2 - 1/4)/(1-z)^2) L = 0,  L(0) = 0,  L'(0) = j.

``mass_via_L`` integrates that Cauchy problem; ``mass_direct`` integrates
Phi_m^2 in x.  The two paths share nothing except the Bessel zero.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .besselnu import bessel_zero
from .quadrature import integrate_adaptive, inner_product_eigen
from .spectrum import eigenfunction_eval, make_operator


class MassError(RuntimeError):
    pass


@dataclass
class CauchyL:
    nu: float
    m: int
    j: float
    z_max: float
    solution: object = field(repr=False)   # scipy OdeSolution for (L, L')
    t_nodes: np.ndarray = field(repr=False, default=None)

    @property
    def omega(self) -> float:
        # sqrt(j^2 - nu^2 + 1/4); kept for reference, nothing below uses it
        return math.sqrt(self.j ** 2 - self.nu ** 2 + 0.25)

    @property
    def q(self) -> float:
        return self.nu ** 2 - 0.25

    def L(self, z):
        return self._at(z)[0]

    def Lp(self, z):
        return self._at(z)[1]

    def _at(self, z):
        za = np.asarray(z, dtype=float)
        if np.any(za < 0) or np.any(za > self.z_max * (1 + 1e-14)):
            raise ValueError("z outside the integration range")
        return self.solution(np.minimum(za, self.z_max))

    def envelope(self, z):
        """Gronwall bound exp(|nu^2 - 1/4| z / (j (1-z)))."""
        za = np.asarray(z, dtype=float)
        with np.errstate(over="ignore"):      # inf is a valid (vacuous) bound
            return np.exp(abs(self.q) / self.j * za / (1.0 - za))


@dataclass
class MassReport:
    alpha: float
    m: int
    interval: Tuple[float, float, float]
    mass_ode: float
    mass_quad: float
    ratio: float
    bound_ok: bool
    rel_diff: float = 0.0


class IntervalConstants(NamedTuple):
    gamma_lower: float    # gamma_*: gamma_* kappa <= 1 - (b/ell)^kappa
    gamma_upper: float    # gamma^*: 1 - (a/ell)^kappa <= gamma^* kappa
    gamma_under: float    # (1-(a/ell)^kappa) - (1-(b/ell)^kappa) >= gamma_under kappa


@dataclass
class MassSweep:
    rows: List[MassReport]
    min_ratio: float
    max_ratio: float
    min_ratio_by_alpha: dict
    max_rel_diff: float
    envelope_ok: bool

    @property
    def positive(self) -> bool:
        return self.min_ratio > 0


def z_endpoints(op, a: float, b: float) -> Tuple[float, float]:
    """(1 - (b/ell)^kappa, 1 - (a/ell)^kappa) without cancellation."""
    if not (0 < a < b < op.ell):
        raise ValueError("need 0 < a < b < ell")
    zb = -math.expm1(op.kappa * math.log(b / op.ell))
    za = -math.expm1(op.kappa * math.log(a / op.ell))
    return zb, za


def solve_L(nu: float, m: int, z_max: float, tol: float = 1e-11) -> CauchyL:
    if not (0 < z_max < 1):
        raise ValueError("z_max must lie in (0, 1)")
    j = bessel_zero(nu, m)
    q = nu * nu - 0.25

    def rhs(z, y):
        return [y[1], -(j * j - q / (1.0 - z) ** 2) * y[0]]

    sol = solve_ivp(rhs, (0.0, z_max), [0.0, j], method="DOP853", rtol=tol,
                    atol=tol * 1e-3, dense_output=True, max_step=1.0 / j)
    if not sol.success:
        raise MassError(f"Cauchy problem for L failed: {sol.message}")
    return CauchyL(nu, m, j, z_max, sol.sol, sol.t)


def integral_equation_residual(sol: CauchyL, z_grid, tol: float = 1e-12) -> float:
    """max |L(z) - sin(jz) - (1/j) int_0^z q/(1-s)^2 L(s) sin(j(z-s)) ds|."""
    j, q = sol.j, sol.q
    worst = 0.0
    for z in np.atleast_1d(np.asarray(z_grid, dtype=float)):
        if z == 0.0:
            continue
        if q == 0.0:
            conv = 0.0
        else:
            pieces = int(max(1, math.ceil(z * j / math.pi)))
            res = integrate_adaptive(
                lambda s: q / (1.0 - s) ** 2 * sol.L(s) * np.sin(j * (z - s)),
                0.0, z, tol, breakpoints=np.linspace(0.0, z, pieces + 1))
            conv = res.value / j
        worst = max(worst, abs(float(sol.L(z)) - math.sin(j * z) - conv))
    return worst


def envelope_check(sol: CauchyL, samples: int = 513, slack: float = 1e-9) -> bool:
    z = np.union1d(np.linspace(0.0, sol.z_max, samples), sol.t_nodes)
    return bool(np.all(np.abs(sol.L(z)) <= sol.envelope(z) * (1 + slack) + slack))


def _mass_from_sol(sol: CauchyL, zb: float, za: float, tol: float) -> float:
    pieces = int(max(1, math.ceil((za - zb) * sol.j / math.pi)))
    res = integrate_adaptive(lambda z: sol.L(z) ** 2, zb, za, tol * 1e-3, rtol=tol,
                             breakpoints=np.linspace(zb, za, pieces + 1))
    return 2.0 * res.value


def mass_via_L(op, m: int, a: float, b: float, tol: float = 1e-11) -> float:
    zb, za = z_endpoints(op, a, b)
    return _mass_from_sol(solve_L(op.nu, m, za, tol), zb, za, tol)


def mass_direct(op, m: int, a: float, b: float, tol: float = 1e-11) -> float:
    if not (0 <= a < b <= op.ell):
        raise ValueError("need 0 <= a < b <= ell")
    return inner_product_eigen(op, m, lambda x: eigenfunction_eval(op, m, x), a, b, tol)


def interval_constants(a: float, b: float, ell: float = 1.0, alpha=None) -> IntervalConstants:
    """Best constants in the kappa-scaling of the z-interval.

    ``alpha`` may be a number or a grid; without it the supremum over
    [1, 2) is returned.  The map kappa -> (1 - e^(-mu kappa))/kappa is
    decreasing, so the extremes sit at alpha = 1 and at the alpha -> 2 limit.
    """
    if not (0 < a < b < ell):
        raise ValueError("need 0 < a < b < ell")
    mu_a, mu_b = math.log(ell / a), math.log(ell / b)
    if alpha is None:
        kap = np.linspace(0.5, 1e-6, 2001)
    else:
        al = np.atleast_1d(np.asarray(alpha, dtype=float))
        if np.any(al < 1) or np.any(al >= 2):
            raise ValueError("alpha must lie in [1, 2)")
        kap = (2.0 - al) / 2.0
    lo = -np.expm1(-mu_b * kap) / kap
    hi = -np.expm1(-mu_a * kap) / kap
    gap = (np.exp(-mu_b * kap) - np.exp(-mu_a * kap)) / kap
    upper = float(hi.max()) if alpha is not None else mu_a
    under = float(gap.min())
    if alpha is None:
        under = min(under, math.log(b / a))
    return IntervalConstants(float(lo.min()), upper, under)


def interval_limits(a: float, b: float, ell: float = 1.0, alpha: float = 1.999) -> Tuple[float, float, float]:
    """Relative gaps between the scaled endpoints at ``alpha`` and their
    alpha -> 2 limits ln(ell/b), ln(ell/a), ln(b/a)."""
    kap = (2.0 - alpha) / 2.0
    zb = -math.expm1(kap * math.log(b / ell))
    za = -math.expm1(kap * math.log(a / ell))
    lims = (math.log(ell / b), math.log(ell / a), math.log(b / a))
    vals = (zb / kap, za / kap, (za - zb) / kap)
    return tuple(abs(v / l - 1.0) for v, l in zip(vals, lims))


def convexity_bounds(mu, u) -> np.ndarray:
    """Pointwise truth of (1 - e^-mu) u <= 1 - e^(-mu u) <= mu u."""
    mu = np.asarray(mu, dtype=float)
    u = np.asarray(u, dtype=float)
    mid = -np.expm1(-mu * u)
    eps = 1e-15
    return ((-np.expm1(-mu)) * u <= mid + eps) & (mid <= mu * u + eps)


def mass_report(alpha: float, m: int, a: float, b: float, ell: float = 1.0,
                tol: float = 1e-11) -> MassReport:
    op = make_operator(alpha, ell)
    zb, za = z_endpoints(op, a, b)
    sol = solve_L(op.nu, m, za, tol)
    m_ode = _mass_from_sol(sol, zb, za, tol)
    m_quad = mass_direct(op, m, a, b, tol)
    rel = abs(m_ode - m_quad) / abs(m_quad)
    return MassReport(alpha, m, (a, b, ell), m_ode, m_quad, m_ode / (2.0 - alpha),
                      envelope_check(sol), rel)


def _report_args(args):
    return mass_report(*args)


def lower_bound_sweep(a: float, b: float, ell: float, alpha_grid: Sequence[float], m_max: int,
                      tol: float = 1e-11, jobs: int = 1) -> MassSweep:
    for al in alpha_grid:
        if not (1.0 <= al < 2.0):
            raise ValueError("alpha grid must lie in [1, 2)")
    tasks = [(float(al), m, a, b, ell, tol) for al in alpha_grid for m in range(1, m_max + 1)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_report_args, tasks))
    else:
        rows = [_report_args(t) for t in tasks]
    ratios = np.array([r.ratio for r in rows])
    by_alpha = {}
    for r in rows:
        by_alpha[r.alpha] = min(by_alpha.get(r.alpha, math.inf), r.ratio)
    return MassSweep(rows, float(ratios.min()), float(ratios.max()), by_alpha,
                     max(r.rel_diff for r in rows), all(r.bound_ok for r in rows))


MASS_COLUMNS = ("alpha", "m", "mass_ode", "mass_quad", "ratio")


def write_mass_csv(path, rows: Sequence[MassReport]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MASS_COLUMNS)
        for r in rows:
            w.writerow([f"{r.alpha:.17g}", r.m, f"{r.mass_ode:.17g}",
                        f"{r.mass_quad:.17g}", f"{r.ratio:.17g}"])
