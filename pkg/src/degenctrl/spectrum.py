"""Spectral data of A u = -(x^alpha u')' on (0, ell).

Weighted Neumann condition at 0, Dirichlet at ell, 1 <= alpha < 2.  With
nu = (alpha-1)/(2-alpha) and kappa = (2-alpha)/2 the spectrum is

    lambda_n = ell^(alpha-2) kappa^2 j_{nu,n}^2,
    Phi_n(x) = c_n x^((1-alpha)/2) J_nu(j_{nu,n} (x/ell)^kappa),

with c_n = sqrt(2 kappa) / (ell^kappa |J_nu'(j_{nu,n})|).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from .besselnu import bessel_j_prime, bessel_regular, bessel_zero, bessel_zeros


class OperatorDomainError(ValueError):
    pass


class GapVerificationError(RuntimeError):
    pass


@dataclass(frozen=True)
class DegenerateOperator:
    alpha: float
    ell: float
    nu: float
    kappa: float


@dataclass(frozen=True)
class EigenPair:
    n: int
    j: float
    lam: float
    norm_const: float
    r: float       # |r_n| = |(x^alpha Phi_n')(ell)|
    parity: int    # sign of (x^alpha Phi_n')(ell), equal to (-1)^n


@dataclass(frozen=True)
class GapSummary:
    gamma_min: float
    gamma_max: float
    gamma_max_star: float
    n_star: int
    c_underbar: float
    sqrt_gaps: Tuple[float, ...] = ()   # sqrt(lam_{n+1}) - sqrt(lam_n), n = 0..n_max-1
    verified: bool = True


def make_operator(alpha: float, ell: float = 1.0) -> DegenerateOperator:
    alpha = float(alpha)
    ell = float(ell)
    if not (1.0 <= alpha < 2.0):
        raise OperatorDomainError(f"alpha must lie in [1, 2), got {alpha}")
    if not (ell > 0 and math.isfinite(ell)):
        raise OperatorDomainError(f"ell must be positive, got {ell}")
    nu = (alpha - 1.0) / (2.0 - alpha)
    # alpha = 1.9 gives 8.99999999999999 in floating point; snap such values so
    # that floor(nu) and the half-integer closed forms come out right
    half = round(2.0 * nu) / 2.0
    if abs(nu - half) <= 1e-12 * max(1.0, nu):
        nu = half
    return DegenerateOperator(alpha, ell, nu, (2.0 - alpha) / 2.0)


def zero_of(op: DegenerateOperator, n: int) -> float:
    return bessel_zero(op.nu, n)


def eigenvalue(op: DegenerateOperator, n: int) -> float:
    if n < 1:
        raise OperatorDomainError("mode index must be >= 1")
    j = zero_of(op, n)
    return op.ell ** (op.alpha - 2.0) * (op.kappa * j) ** 2


def eigenvalues(op: DegenerateOperator, n_max: int, include_zero: bool = False) -> np.ndarray:
    """lambda_1..lambda_{n_max}, preceded by the artificial lambda_0 = 0 if asked."""
    j = bessel_zeros(op.nu, n_max)
    lam = op.ell ** (op.alpha - 2.0) * (op.kappa * j) ** 2
    return np.concatenate([[0.0], lam]) if include_zero else lam


@lru_cache(maxsize=4096)
def _log_norm(nu: float, kappa: float, ell: float, n: int) -> float:
    j = bessel_zero(nu, n)
    jp = abs(bessel_j_prime(nu, j))
    return 0.5 * math.log(2.0 * kappa) - kappa * math.log(ell) - math.log(jp)


def norm_const(op: DegenerateOperator, n: int) -> float:
    return math.exp(_log_norm(op.nu, op.kappa, op.ell, n))


def _log_regular_scale(op: DegenerateOperator, n: int) -> float:
    # Phi_n(x) = exp(this) * F(j (x/ell)^kappa), since the powers of x cancel
    j = zero_of(op, n)
    out = _log_norm(op.nu, op.kappa, op.ell, n) + 0.5 * (1.0 - op.alpha) * math.log(op.ell)
    if op.nu > 0:
        out += op.nu * math.log(j / 2.0) - math.lgamma(op.nu + 1.0)
    return out


def eigenfunction_regular(op: DegenerateOperator, n: int, z) -> np.ndarray:
    """Phi_n as a function of z = (x/ell)^kappa, z in [0, 1]."""
    j = zero_of(op, n)
    f, _ = bessel_regular(op.nu, j * np.asarray(z, dtype=float), _log_regular_scale(op, n))
    return f


def eigenfunction_eval(op: DegenerateOperator, n: int, x):
    """Normalized eigenfunction Phi_n at x in (0, ell]."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0) or np.any(xa > op.ell * (1 + 1e-15)):
        raise OperatorDomainError("eigenfunctions are evaluated on (0, ell]")
    z = np.minimum(xa / op.ell, 1.0) ** op.kappa
    out = eigenfunction_regular(op, n, z)
    return float(out) if np.ndim(x) == 0 else out


def eigenfunction_derivatives(op: DegenerateOperator, n: int, x):
    """(Phi, Phi', Phi'') at x > 0; Phi'' comes from the Bessel equation."""
    xa = np.asarray(x, dtype=float)
    j = zero_of(op, n)
    k = op.kappa
    y = j * (xa / op.ell) ** k
    f, fp = bessel_regular(op.nu, y, _log_regular_scale(op, n))
    # regular part solves F'' + (2 nu + 1)/y F' + F = 0
    fpp = -(2.0 * op.nu + 1.0) / y * fp - f
    dy = k * y / xa
    d2y = k * (k - 1.0) * y / xa ** 2
    return f, fp * dy, fpp * dy ** 2 + fp * d2y


def flux_coefficient(op: DegenerateOperator, n: int) -> float:
    """|r_n| = |(x^alpha Phi_n')(ell)| = sqrt(2 kappa) ell^((alpha-1)/2) sqrt(lambda_n)."""
    lam = eigenvalue(op, n)
    return math.sqrt(2.0) * op.ell ** (0.5 * (op.alpha - 1.0)) * math.sqrt(op.kappa) * math.sqrt(lam)


def flux_parity(n: int) -> int:
    # J_nu' at its n-th positive zero has sign (-1)^n
    return -1 if n % 2 else 1


def flux_coefficients(op: DegenerateOperator, n_max: int, signed: bool = False) -> np.ndarray:
    lam = eigenvalues(op, n_max)
    r = math.sqrt(2.0 * op.kappa) * op.ell ** (0.5 * (op.alpha - 1.0)) * np.sqrt(lam)
    if signed:
        r = r * np.array([flux_parity(n) for n in range(1, n_max + 1)])
    return r


def eigenpair(op: DegenerateOperator, n: int) -> EigenPair:
    return EigenPair(n, zero_of(op, n), eigenvalue(op, n), norm_const(op, n),
                     flux_coefficient(op, n), flux_parity(n))


def gap_summary(op: DegenerateOperator, n_max: int, check: bool = True) -> GapSummary:
    """Gap constants of the sqrt-spectrum (lambda_0 = 0 included) and their check.

    gamma_min uses the smallest gap of the extended sequence, gamma_max bounds
    the gaps for n >= 1 and gamma_max_star those with n >= N* = floor(nu) + 1.
    """
    n_star = int(math.floor(op.nu)) + 1
    if n_max < n_star + 2:
        raise OperatorDomainError(f"n_max must be at least N*+2 = {n_star + 2}")
    j = bessel_zeros(op.nu, n_max)
    scale = op.ell ** (0.5 * op.alpha - 1.0) * op.kappa
    if op.nu <= 0.5:
        c_under = min(j[1] - j[0], j[0])
        gmax = scale * math.pi
    else:
        c_under = min(math.pi, j[0])
        gmax = scale * (j[1] - j[0])
    gmin = scale * c_under
    gstar = 2.0 * math.pi * scale
    root = np.sqrt(eigenvalues(op, n_max, include_zero=True))
    gaps = np.diff(root)
    slack = 1e-9 * scale
    ok_min = bool(np.all(gaps >= gmin - slack))
    ok_max = bool(np.all(gaps[1:] <= gmax + slack))
    ok_star = bool(np.all(gaps[n_star:] <= gstar + slack))
    verified = ok_min and ok_max and ok_star
    if check and not verified:
        raise GapVerificationError(
            f"gap bounds violated (min {ok_min}, max {ok_max}, star {ok_star}) for alpha={op.alpha}")
    return GapSummary(gmin, gmax, gstar, n_star, c_under, tuple(float(g) for g in gaps), verified)


def concentration_profile(alphas, n: int = 1, ell: float = 1.0) -> List[Tuple[float, float]]:
    """(alpha, lambda_{n+1} - lambda_n) for each alpha."""
    out = []
    for a in alphas:
        op = make_operator(a, ell)
        lam = eigenvalues(op, n + 1)
        out.append((float(a), float(lam[n] - lam[n - 1])))
    return out
