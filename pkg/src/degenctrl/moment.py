"""Finite biorthogonal families to exponentials and the bound shapes.

Families are written in the shifted basis e_k(t) = exp(-lambda_k (T - t)),
whose Gram matrix on (0, T) is

    G[j, k] = (1 - exp(-(lambda_j + lambda_k) T)) / (lambda_j + lambda_k)

(T on a zero sum).  Biorthogonality to exp(lambda_n t) reads
G c_m = exp(-lambda_m T) e_m, so the minimal L2 norm family is
C = diag(exp(-lambda T)) G^{-1} with ||sigma_m||^2 = exp(-lambda_m T) C[m, m].

The Gram matrix is violently ill-conditioned, so the solve climbs a precision
ladder (double, double-double, mpmath) until a residual computed in high
precision from the stored coefficients meets the tolerance.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Optional

import mpmath as mp
import numpy as np

from .ddarith import DD, dd_exp, dd_ldlt_solve
from .spectrum import DegenerateOperator, eigenvalues, gap_summary

PRECISION_LADDER = ("double", "double-double", "multiprecision")
MP_DPS_LADDER = (50, 100, 200, 400)
DEFAULT_MAX_SIZE = 16


class CertificationError(RuntimeError):
    def __init__(self, message, family=None):
        super().__init__(message)
        self.family = family


class UnsupportedBranchError(ValueError):
    pass


@dataclass(frozen=True)
class ExponentialSystem:
    lambdas: tuple
    horizon: float
    include_zero: bool = True

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("need a nonempty list of exponents")
        if np.any(lam < 0) or np.any(np.diff(lam) <= 0):
            raise ValueError("exponents must be >= 0 and strictly increasing")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.include_zero and lam[0] != 0.0:
            raise ValueError("include_zero requires lambda_0 = 0")
        object.__setattr__(self, "lambdas", tuple(float(v) for v in lam))

    @property
    def lam(self) -> np.ndarray:
        return np.array(self.lambdas)

    @property
    def size(self) -> int:
        return len(self.lambdas)


def make_system(op: DegenerateOperator, T: float, N: int, include_zero: bool = True) -> ExponentialSystem:
    """lambda_0 = 0 (optional) followed by lambda_1..lambda_N of the operator."""
    return ExponentialSystem(tuple(eigenvalues(op, N, include_zero=include_zero)), float(T), include_zero)


@dataclass
class BiorthogonalFamily:
    lambdas: np.ndarray
    T: float
    coeffs: np.ndarray                 # float view of C, sigma_m = sum_k C[m,k] e_k
    coeffs_lo: np.ndarray              # low parts when solved in double-double
    residuals: np.ndarray              # |int sigma_m exp(lambda_n t) dt - delta_mn|
    residual_max: float
    norms: np.ndarray                  # ||sigma_m||_{L2(0,T)}
    precision_used: str
    tol: float
    certified: bool
    include_zero: bool = True
    dps_used: int = 0
    coeffs_mp: Optional[object] = field(default=None, repr=False)

    def coeff_matrix_mp(self):
        """Exact stored coefficients as an mpmath matrix (current precision)."""
        if self.coeffs_mp is not None:
            return self.coeffs_mp
        return _to_mp(self.coeffs, self.coeffs_lo)


@dataclass(frozen=True)
class BoundShape:
    kind: str                        # "upper", "lower" or "lower_simple"
    value_at_unit_constant: float
    rate: float
    log_value: float
    details: dict = field(default_factory=dict)


# -- Gram matrices ------------------------------------------------------------

def gram_matrix(sys: ExponentialSystem) -> np.ndarray:
    lam = sys.lam
    s = lam[:, None] + lam[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        g = -np.expm1(-s * sys.horizon) / s
    g[s == 0] = sys.horizon
    return g


def _gram_dd(lam: np.ndarray, T: float) -> DD:
    s = lam[:, None] + lam[None, :]
    # the sums are exact in DD; 1 - exp(-sT) loses nothing relevant
    S = DD(lam[:, None] + np.zeros_like(s)) + DD(lam[None, :] + np.zeros_like(s))
    num = 1.0 - dd_exp(-(S * T))
    zero = S.hi == 0
    Ssafe = DD(np.where(zero, 1.0, S.hi), np.where(zero, 0.0, S.lo))
    g = num / Ssafe
    g.hi[zero] = T
    g.lo[zero] = 0.0
    return g


def _gram_mp(lam, T):
    n = len(lam)
    G = mp.matrix(n, n)
    Tm = mp.mpf(T)
    lm = [mp.mpf(v) for v in lam]
    for i in range(n):
        for k in range(i, n):
            s = lm[i] + lm[k]
            G[i, k] = Tm if s == 0 else -mp.expm1(-s * Tm) / s
            G[k, i] = G[i, k]
    return G


# -- certification ------------------------------------------------------------

def _certify(C, lam, T, dps=None):
    """Residual |C G diag(exp(lambda T)) - I| and norms, in multiprecision.

    ``C`` is an mpmath matrix holding the exact stored coefficients.
    """
    n = len(lam)
    if dps is None:
        mag = max(abs(C[i, k]) for i in range(n) for k in range(n))
        lg = float(mp.log10(mag)) if mag > 0 else 0.0
        dps = int(40 + max(0.0, lg) + max(lam) * T / math.log(10))
    with mp.workdps(dps):
        G = _gram_mp(lam, T)
        CG = C * G
        res = np.zeros((n, n))
        for i in range(n):
            for k in range(n):
                v = CG[i, k] * mp.exp(mp.mpf(lam[k]) * T) - (1 if i == k else 0)
                res[i, k] = float(abs(v))
        norms = np.array([float(mp.sqrt(abs(mp.exp(-mp.mpf(lam[m]) * T) * C[m, m])))
                          for m in range(n)])
    return res, norms


def _start_rung() -> int:
    env = os.environ.get("DEGENCTRL_PRECISION", "double").strip().lower()
    if env in ("dd", "double-double"):
        return 1
    if env in ("mp", "multiprecision"):
        return 2
    if env not in ("", "double"):
        raise ValueError(f"DEGENCTRL_PRECISION must be 'double' or 'dd', got {env!r}")
    return 0


def biorthogonal_solve(sys: ExponentialSystem, tol: float = 1e-8, *, max_size: int = DEFAULT_MAX_SIZE,
                       start: Optional[str] = None, ceiling: Optional[str] = None,
                       raise_on_failure: bool = True) -> BiorthogonalFamily:
    """Minimal-norm biorthogonal family of ``sys`` with an a posteriori certificate.

    The solve climbs ``PRECISION_LADDER`` from ``start`` (default: the
    DEGENCTRL_PRECISION environment variable) and stops at ``ceiling``.
    """
    n = sys.size
    if n > max_size:
        raise ValueError(f"system size {n} exceeds the cap {max_size}")
    lam = sys.lam
    T = sys.horizon
    rung = _start_rung() if start is None else PRECISION_LADDER.index(start)
    top = len(PRECISION_LADDER) - 1 if ceiling is None else PRECISION_LADDER.index(ceiling)
    if top < rung:
        raise ValueError("ceiling sits below the starting rung")
    last = None
    if rung <= 0:
        G = gram_matrix(sys)
        try:
            np.linalg.cholesky(G)
            C = np.exp(-lam * T)[:, None] * np.linalg.solve(G, np.eye(n))
            lo = np.zeros_like(C)
            Cm = _to_mp(C, lo)
            res, norms = _certify(Cm, lam, T)
            last = BiorthogonalFamily(lam, T, C, lo, res, float(res.max()), norms, "double", tol,
                                      bool(res.max() <= tol), sys.include_zero)
            if last.certified:
                return last
        except np.linalg.LinAlgError:
            pass
    if rung <= 1 <= top:
        try:
            Gd = _gram_dd(lam, T)
            e = dd_exp(DD(-lam * T))
            rhs = DD(np.diag(e.hi), np.diag(e.lo))
            X = dd_ldlt_solve(Gd, rhs)        # X = G^{-1} diag(e^{-lambda T}); C = X^T
            C, lo = X.hi.T.copy(), X.lo.T.copy()
            Cm = _to_mp(C, lo)
            res, norms = _certify(Cm, lam, T)
            last = BiorthogonalFamily(lam, T, C, lo, res, float(res.max()), norms, "double-double", tol,
                                      bool(res.max() <= tol), sys.include_zero)
            if last.certified:
                return last
        except np.linalg.LinAlgError:
            pass
    for dps in (MP_DPS_LADDER if top >= 2 else ()):
        with mp.workdps(dps):
            G = _gram_mp(lam, T)
            try:
                L = mp.cholesky(G)
            except (ValueError, ZeroDivisionError):
                continue
            Cm = mp.matrix(n, n)
            for m in range(n):
                b = mp.matrix(n, 1)
                b[m] = mp.exp(-mp.mpf(lam[m]) * T)
                y = _chol_solve(L, b)
                for k in range(n):
                    Cm[m, k] = y[k]
        res, norms = _certify(Cm, lam, T, dps=dps + 20 + int(max(lam) * T / 2.3))
        C = np.array([[float(Cm[i, k]) for k in range(n)] for i in range(n)])
        last = BiorthogonalFamily(lam, T, C, np.zeros_like(C), res, float(res.max()), norms,
                                  "multiprecision", tol, bool(res.max() <= tol), sys.include_zero,
                                  dps_used=dps, coeffs_mp=Cm)
        if last.certified:
            return last
    if raise_on_failure:
        raise CertificationError(
            f"biorthogonal family not certified: residual {last.residual_max if last else float('nan'):.3e}"
            f" > {tol:.1e}", last)
    return last


def _chol_solve(L, b):
    n = L.rows
    y = mp.matrix(n, 1)
    for i in range(n):
        s = b[i]
        for k in range(i):
            s -= L[i, k] * y[k]
        y[i] = s / L[i, i]
    x = mp.matrix(n, 1)
    for i in range(n - 1, -1, -1):
        s = y[i]
        for k in range(i + 1, n):
            s -= L[k, i] * x[k]
        x[i] = s / L[i, i]
    return x


def _to_mp(C, lo):
    # hi + lo is exact at 120 digits for any pair of doubles in range
    n = C.shape[0]
    with mp.workdps(max(mp.mp.dps, 120)):
        M = mp.matrix(n, n)
        for i in range(n):
            for k in range(n):
                M[i, k] = mp.mpf(float(C[i, k])) + mp.mpf(float(lo[i, k]))
    return M


# -- bound shapes (all unknown constants set to 1) ----------------------------

def _shape(kind, log_value, rate, **details):
    value = math.exp(log_value) if log_value < 709.0 else math.inf
    return BoundShape(kind, value, rate, log_value, details)


def upper_bound_shape(sys: ExponentialSystem, gamma_min: float, m: int) -> BoundShape:
    """exp(-2 lam_m T) exp(sqrt(lam_m)/g) exp(1/(g^2 T)) B*, B* = max(T g^2, 1/(T g^2))/T."""
    if not gamma_min > 0:
        raise ValueError("gamma_min must be positive")
    T = sys.horizon
    lam_m = sys.lambdas[m]
    tg = T * gamma_min ** 2
    b_star = max(tg, 1.0 / tg) / T
    logv = -2.0 * lam_m * T + math.sqrt(lam_m) / gamma_min + 1.0 / tg + math.log(b_star)
    return _shape("upper", logv, 1.0 / tg, B_star=b_star)


def lower_bound_shape(op: DegenerateOperator, T: float, m: int) -> BoundShape:
    """Unit-constant lower shape for ||sigma_m|| (valid branch m <= N*).

    Also evaluates the integers K*, K'* and the full b* with c_u = 1.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    gs = gap_summary(op, max(int(math.floor(op.nu)) + 3, m + 2))
    n_star = gs.n_star
    if m > n_star:
        raise UnsupportedBranchError(f"only the branch m <= N* = {n_star} is available")
    lam = eigenvalues(op, max(m, 1))
    lam_m, lam_1 = float(lam[m - 1]), float(lam[0])
    nu, ell, a = op.nu, op.ell, op.alpha
    rate = ell ** (2.0 - a) / (T * op.kappa ** 2)
    poly = nu ** (4.0 / 3.0) + ell ** (1.0 - a / 2.0) * nu + nu ** (1.0 / 3.0) * m
    if nu > 0:
        logs = math.log(nu) + (1.0 - a / 2.0) * math.log(ell) + math.log(m) + math.log(1.0 / T)
        comb = -poly * logs
    else:
        comb = 0.0  # the prefactor polynomial vanishes identically
    logv = (-lam_m * T + rate - math.lgamma(m) + 0.5 * math.log1p(T) - 0.5 * math.log(T) + comb)
    gmax, gstar = gs.gamma_max, gs.gamma_max_star
    q = math.floor((2.0 * math.sqrt(lam_1) + (n_star + m) * gmax) / gstar)
    k_star = q - n_star + 2
    k_prime = math.floor(gmax / gstar * (n_star - m)) - n_star + 2
    p = math.floor(2.0 * math.sqrt(lam_1) / gmax)
    ratio = gmax / gstar
    log_cplus = ((n_star - 1) * math.log(ratio) + math.lgamma(n_star + m + p + 2)
                 - math.lgamma(m + p + 2) - math.lgamma(q + 2) - math.log(2 * m + p + 1))
    log_cminus = ((n_star - 1) * math.log(ratio) + math.lgamma(m) + math.lgamma(n_star - m + 1)
                  - math.lgamma(math.floor(ratio * (n_star - m)) + 2))
    total = n_star + k_star + k_prime + 3
    log_cstar = (-math.lgamma(total + 1) + 2 * (n_star - 1) * math.log(gstar) - log_cplus - log_cminus)
    tg2 = T * gstar ** 2
    log_bstar = (log_cstar + 0.5 * math.log1p(T * lam_1) - 0.5 * math.log(T)
                 + (k_star + k_prime + 2) * math.log(tg2) - total * math.log1p(tg2))
    return _shape("lower", logv, rate, K_star=k_star, K_prime_star=k_prime, N_star=n_star,
                  log_b_star=log_bstar,
                  log_sigma_lower_full=-lam_m * T + 1.0 / tg2 + log_bstar)


def tail_sum(op: DegenerateOperator, T: float, rel: float = 1e-10) -> float:
    """sum_m j_m^2 exp(-j_m^2 Y), Y = kappa^2 T / ell^(2-alpha)."""
    from .besselnu import bessel_zeros

    if not T > 0:
        raise ValueError("T must be positive")
    Y = op.kappa ** 2 * T / op.ell ** (2.0 - op.alpha)
    total = 0.0
    n = 0
    chunk = 32
    while True:
        z = bessel_zeros(op.nu, n + chunk)[n:]
        terms = z ** 2 * np.exp(-(z ** 2) * Y)
        for zi, t in zip(z, terms):
            total += t
            n += 1
            if zi * zi * Y > 1.0:
                # beyond the peak terms shrink at least geometrically with this ratio
                r = math.exp(-(2.0 * math.pi * zi + math.pi ** 2 / 2.0) * Y) * ((zi + 4.0) / zi) ** 2
                if r < 1.0 and t / (1.0 - r) <= rel * total:
                    return total
        chunk *= 2
