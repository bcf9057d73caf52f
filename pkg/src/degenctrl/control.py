"""Moment-method null controls for the degenerate heat equation.

Modal coordinates beta_n(t) = <u(t), Phi_n> obey

    boundary control u(ell, t) = H(t):   beta_n' = -lambda_n beta_n - r_n H(t)
    distributed control h = sum_m d_m(t) Phi_m 1_(a,b):
                                         beta_n' = -lambda_n beta_n + sum_m P[m,n] d_m(t)

with r_n = (x^alpha Phi_n')(ell) (sign (-1)^n) and P[m,n] = int_a^b Phi_m Phi_n.
Every control built here is a finite combination of the shifted exponentials
exp(-lambda_k (T - t)) (plus t for the boundary primitive), so norms and final
states are evaluated exactly in multiprecision from the stored coefficients.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp

from .ddarith import DD, dd_exp
from .moment import BiorthogonalFamily, biorthogonal_solve, make_system
from .quadrature import inner_product_eigen, integrate_adaptive
from .spectrum import (DegenerateOperator, eigenfunction_eval, eigenvalues,
                       flux_coefficients)

DEFAULT_SAMPLES = 4097
MASS_THRESHOLD = 1e-12


class SynthesisError(ValueError):
    pass


@dataclass(frozen=True)
class InitialData:
    mu: tuple

    def __post_init__(self):
        mu = tuple(float(v) for v in np.ravel(self.mu))
        if not mu or not all(math.isfinite(v) for v in mu):
            raise ValueError("modal coefficients must be a nonempty finite list")
        object.__setattr__(self, "mu", mu)

    @classmethod
    def mode(cls, n: int, size: Optional[int] = None) -> "InitialData":
        size = max(n, size or n)
        v = [0.0] * size
        v[n - 1] = 1.0
        return cls(tuple(v))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.mu)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.mu))


def _as_initial(mu) -> InitialData:
    return mu if isinstance(mu, InitialData) else InitialData(tuple(np.ravel(mu)))


@dataclass
class BoundaryControl:
    T: float
    N: int
    lambdas: np.ndarray          # lambda_0 = 0, lambda_1..lambda_N
    coeffs: list                 # mp coefficients D_k of K = sum_k D_k e_k
    time_grid: np.ndarray
    K_samples: np.ndarray
    H_samples: np.ndarray
    norm_h1: float
    norm_l2: float
    norm_k: float                # H^1 seminorm ||K||
    H_T: float
    family: BiorthogonalFamily = field(repr=False)
    mu: InitialData = None


@dataclass
class DistributedControl:
    T: float
    N: int
    interval: tuple
    lambdas: np.ndarray          # lambda_1..lambda_N
    coeffs: list                 # coeffs[m][k]: d_{m+1} = sum_k coeffs[m][k] e_k
    overlap: np.ndarray          # P[m, n] = int_a^b Phi_m Phi_n
    time_grid: np.ndarray
    d_samples: np.ndarray        # shape (N, len(time_grid))
    norm_l2: float               # exact norm on (a,b) x (0,T), cross terms included
    norm_l2_modal: float         # sqrt(sum_m mu_m^2 ||sigma_m||^2 / P[m,m]^2)
    family: BiorthogonalFamily = field(repr=False)
    mu: InitialData = None
    correction: str = "none: diagonal cancellation is exact on modes 1..N"


@dataclass
class FinalStateReport:
    beta_T: np.ndarray
    max_controlled: float
    tail_profile: np.ndarray
    N: int
    method: str


@dataclass
class EnergyReport:
    lhs: float
    rhs: float
    slack: float
    C: float
    trace_l2_sq: float
    tail_fraction: float


# -- exact exponential-sum helpers ---------------------------------------------

def _prec(lam, T):
    return 40 + int(max(lam) * T / 2.3)


def _gram_cross(lam_a, lam_b, T):
    """int_0^T exp(-la (T-t)) exp(-lb (T-t)) dt for all pairs (mp)."""
    Tm = mp.mpf(T)
    out = mp.matrix(len(lam_a), len(lam_b))
    for i, la in enumerate(lam_a):
        for k, lb in enumerate(lam_b):
            s = mp.mpf(la) + mp.mpf(lb)
            out[i, k] = Tm if s == 0 else -mp.expm1(-s * Tm) / s
    return out


def _t_moment(lam, T):
    """int_0^T t exp(-lam (T-t)) dt."""
    Tm = mp.mpf(T)
    lam = mp.mpf(lam)
    if lam == 0:
        return Tm ** 2 / 2
    return Tm / lam + mp.expm1(-lam * Tm) / lam ** 2


class ExpSum:
    """t -> sum_k c_k exp(-lam_k (T - t)) + c_t t + c_0 with exact coefficients.

    Evaluation picks the cheapest arithmetic whose rounding error, estimated
    from the sum of absolute terms, stays below ``rel`` times the result
    scale: plain floats, then double-double, then mpmath.
    """

    def __init__(self, coeffs, lam, T, extra_t=None, const=None, rel=1e-13):
        self.T = float(T)
        self.lam = np.asarray(lam, dtype=float)
        self.coeffs = list(coeffs)
        self.extra_t = extra_t
        self.const = const
        self.rel = rel
        allc = self.coeffs + [extra_t if extra_t is not None else 0, const if const is not None else 0]
        d = DD.from_mp(allc)
        self._hi, self._lo = d.hi, d.lo
        self._abs = np.abs(self._hi)
        self.scale = 0.0
        if np.any(self._abs):
            # accuracy is judged against the size of the sum over [0, T]
            self.scale = float(np.max(np.abs(self._evaluate(np.linspace(0.0, self.T, 257)))))

    def _terms_float(self, t):
        e = np.exp(-np.outer(self.T - t, self.lam))          # (len t, K)
        n = len(self.lam)
        val = e @ self._hi[:n] + self._hi[n] * t + self._hi[n + 1]
        # rounding of lam (T - t) is amplified by the exponent size
        size = e @ (self._abs[:n] * (1.0 + self.lam * self.T)) + self._abs[n] * np.abs(t) + self._abs[n + 1]
        return val, size

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if not np.any(self._abs):
            return np.zeros_like(t)
        return self._evaluate(t)

    def _evaluate(self, t):
        val, size = self._terms_float(t)
        scale = max(float(np.max(np.abs(val))), self.scale, 1e-300)
        if 4e-16 * float(np.max(size)) <= self.rel * scale:
            return val
        n = len(self.lam)
        tt = DD(t)
        dt = DD(np.full_like(t, self.T)) - tt
        arg = -(DD(dt.hi[:, None] + 0 * self.lam[None, :], dt.lo[:, None] + 0 * self.lam[None, :])
                * DD(np.broadcast_to(self.lam, (len(t), n)).copy()))
        e = dd_exp(arg)
        c = DD(np.broadcast_to(self._hi[:n], (len(t), n)).copy(), np.broadcast_to(self._lo[:n], (len(t), n)).copy())
        acc = (e * c).sum(axis=1)
        acc = acc + tt * DD(np.full_like(t, self._hi[n]), np.full_like(t, self._lo[n]))
        acc = acc + DD(np.full_like(t, self._hi[n + 1]), np.full_like(t, self._lo[n + 1]))
        out = acc.to_float()
        scale = max(float(np.max(np.abs(out))), self.scale, 1e-300)
        if 1e-31 * float(np.max(size)) <= self.rel * scale:
            return out
        digits = 30 + int(math.log10(float(np.max(size)) / scale) + 1)
        res = np.empty_like(t)
        with mp.workdps(digits):
            Tm = mp.mpf(self.T)
            for i, ti in enumerate(t):
                tm = mp.mpf(ti)
                v = mp.fsum(c * mp.exp(-mp.mpf(l) * (Tm - tm)) for c, l in zip(self.coeffs, self.lam))
                if self.extra_t is not None:
                    v += self.extra_t * tm
                if self.const is not None:
                    v += self.const
                res[i] = float(v)
        return res


def _eval_sum(coeffs, lam, T, t, extra_t=None, const=None):
    return ExpSum(coeffs, lam, T, extra_t, const)(t)


# -- boundary control ------------------------------------------------------------

def synthesize_boundary(op: DegenerateOperator, mu, T: float, N: int = 8, *, tol: float = 1e-8,
                        samples: int = DEFAULT_SAMPLES, family: Optional[BiorthogonalFamily] = None
                        ) -> BoundaryControl:
    """K = -sum_m lambda_m mu_m / r_m sigma_m, H = int_0^t K.

    The family is biorthogonal to exp(lambda_n t) for n = 0..N including the
    artificial lambda_0 = 0, which forces H(T) = 0.
    """
    mu = _as_initial(mu)
    if len(mu.mu) > N:
        raise SynthesisError(f"initial data has {len(mu.mu)} modes but N = {N}")
    if family is None:
        family = biorthogonal_solve(make_system(op, T, N, include_zero=True), tol)
    lam = family.lambdas
    r = flux_coefficients(op, N, signed=True)
    mv = np.zeros(N)
    mv[:len(mu.mu)] = mu.mu
    dps = max(_prec(lam, T), family.dps_used)
    with mp.workdps(dps):
        C = family.coeff_matrix_mp()
        w = [mp.mpf(0)] + [-mp.mpf(lam[m]) * mp.mpf(mv[m - 1]) / mp.mpf(r[m - 1]) for m in range(1, N + 1)]
        D = [mp.fsum(w[m] * C[m, k] for m in range(N + 1)) for k in range(N + 1)]
        # H = sum_{k>=1} a_k e_k + c + D_0 t
        a = [mp.mpf(0)] + [D[k] / mp.mpf(lam[k]) for k in range(1, N + 1)]
        c = -mp.fsum(a[k] * mp.exp(-mp.mpf(lam[k]) * T) for k in range(1, N + 1))
        G = _gram_cross(lam, lam, T)
        Dv = mp.matrix(D)
        norm_k2 = (Dv.T * G * Dv)[0, 0]
        coef_h = list(a)
        coef_h[0] = c      # e_0 = 1
        hv = mp.matrix(coef_h)
        tm = [_t_moment(l, T) for l in lam]
        norm_h2 = (hv.T * G * hv)[0, 0] + 2 * D[0] * mp.fsum(coef_h[k] * tm[k] for k in range(N + 1)) \
            + D[0] ** 2 * mp.mpf(T) ** 3 / 3
        H_T = mp.fsum(coef_h[k] * mp.exp(-mp.mpf(lam[k]) * 0) for k in range(N + 1)) + D[0] * T
    t = np.linspace(0.0, T, samples)
    K = _eval_sum(D, lam, T, t)
    H = _eval_sum(a[1:], lam[1:], T, t, extra_t=D[0], const=c)
    H[0] = 0.0
    nk, nh = float(mp.sqrt(abs(norm_k2))), float(mp.sqrt(abs(norm_h2)))
    return BoundaryControl(T, N, lam, D, t, K, H, math.hypot(nh, nk), nh, nk, float(H_T), family, mu)


def _boundary_h_parts(ctrl: BoundaryControl):
    """Coefficients of H = a_0 + sum_{k>=1} a_k e_k + D_0 t."""
    lam = ctrl.lambdas
    D = ctrl.coeffs
    with mp.workdps(max(_prec(lam, ctrl.T), ctrl.family.dps_used)):
        a = [mp.mpf(0)] + [D[k] / mp.mpf(lam[k]) for k in range(1, len(lam))]
        a[0] = -mp.fsum(a[k] * mp.exp(-mp.mpf(lam[k]) * ctrl.T) for k in range(1, len(lam)))
    return a, D[0]


def _boundary_beta(op, mu, ctrl: BoundaryControl, n_check):
    lam_all = eigenvalues(op, n_check)
    r = flux_coefficients(op, n_check, signed=True)
    mv = np.zeros(n_check)
    mv[:len(mu.mu)] = mu.mu[:n_check]
    T = ctrl.T
    with mp.workdps(max(_prec(ctrl.lambdas, T), ctrl.family.dps_used)):
        a, d0 = _boundary_h_parts(ctrl)
        X = _gram_cross(ctrl.lambdas, lam_all, T)
        out = np.empty(n_check)
        for n in range(n_check):
            integral = mp.fsum(a[k] * X[k, n] for k in range(len(a))) + d0 * _t_moment(lam_all[n], T)
            out[n] = float(mp.exp(-mp.mpf(lam_all[n]) * T) * mv[n] - mp.mpf(r[n]) * integral)
    return out


def final_state_boundary(op: DegenerateOperator, mu, ctrl: BoundaryControl, N_check: Optional[int] = None,
                         method: str = "closed", tol: float = 1e-13) -> FinalStateReport:
    """beta_n(T) = exp(-lam_n T) mu_n - r_n int_0^T H(t) exp(lam_n (t - T)) dt.

    method "closed" evaluates the integrals exactly from the exponential
    coefficients, "quadrature" integrates the damped kernel adaptively and
    "ode" integrates the modal equations with an adaptive Runge-Kutta pair.
    """
    mu = _as_initial(mu)
    N_check = N_check or 2 * ctrl.N
    if N_check < ctrl.N:
        raise ValueError("N_check must be >= N")
    if method == "closed":
        beta = _boundary_beta(op, mu, ctrl, N_check)
    else:
        lam_all = eigenvalues(op, N_check)
        r = flux_coefficients(op, N_check, signed=True)
        mv = np.zeros(N_check)
        mv[:len(mu.mu)] = mu.mu[:N_check]
        a, d0 = _boundary_h_parts(ctrl)
        T = ctrl.T

        H = ExpSum(a[1:], ctrl.lambdas[1:], T, extra_t=d0, const=a[0])

        beta = np.empty(N_check)
        if method == "quadrature":
            scale = max(1.0, H.scale)
            for n in range(N_check):
                ln = lam_all[n]
                res = integrate_adaptive(lambda t: H(t) * np.exp(ln * (t - T)), 0.0, T, tol * scale)
                beta[n] = math.exp(-ln * T) * mv[n] - r[n] * res.value
        elif method == "ode":
            sol = solve_ivp(lambda t, b: -lam_all * b - r * H(t)[0], (0.0, T), mv,
                            method="DOP853", rtol=1e-12, atol=1e-14)
            beta[:] = sol.y[:, -1]
        else:
            raise ValueError(f"unknown method {method!r}")
    N = ctrl.N
    return FinalStateReport(beta, float(np.max(np.abs(beta[:N]))), np.abs(beta[N:]), N, method)


# -- distributed control -----------------------------------------------------------

def overlap_matrix(op: DegenerateOperator, n_max: int, a: float, b: float, tol: float = 1e-12) -> np.ndarray:
    """P[m, n] = int_a^b Phi_m Phi_n for m, n = 1..n_max (symmetric by construction)."""
    P = np.empty((n_max, n_max))
    for m in range(1, n_max + 1):
        for n in range(m, n_max + 1):
            v = inner_product_eigen(op, m, lambda x, n=n: eigenfunction_eval(op, n, x), a, b, tol)
            P[m - 1, n - 1] = P[n - 1, m - 1] = v
    return P


def synthesize_distributed(op: DegenerateOperator, mu, T: float, N: int = 8, a: float = 0.3, b: float = 0.6,
                           *, tol: float = 1e-8, samples: int = DEFAULT_SAMPLES,
                           family: Optional[BiorthogonalFamily] = None,
                           overlap: Optional[np.ndarray] = None) -> DistributedControl:
    """d_m = -mu_m sigma_m / int_a^b Phi_m^2 for m = 1..N.

    Because sigma_m is biorthogonal to exp(lambda_n t) for all n <= N, the
    off-diagonal overlaps drop out of the moment conditions n <= N exactly.
    """
    mu = _as_initial(mu)
    if not (0.0 < a < b < op.ell):
        raise SynthesisError("need 0 < a < b < ell")
    if len(mu.mu) > N:
        raise SynthesisError(f"initial data has {len(mu.mu)} modes but N = {N}")
    if family is None:
        family = biorthogonal_solve(make_system(op, T, N, include_zero=False), tol)
    P = overlap if overlap is not None else overlap_matrix(op, N, a, b)
    P = P[:N, :N]
    masses = np.diag(P)
    if np.any(masses < MASS_THRESHOLD):
        raise SynthesisError("interval mass of some eigenfunction is below threshold")
    lam = family.lambdas
    mv = np.zeros(N)
    mv[:len(mu.mu)] = mu.mu
    with mp.workdps(max(_prec(lam, T), family.dps_used)):
        C = family.coeff_matrix_mp()
        coeffs = [[-mp.mpf(mv[m]) / mp.mpf(masses[m]) * C[m, k] for k in range(N)] for m in range(N)]
        G = _gram_cross(lam, lam, T)
        S = C * G * C.T          # <sigma_m, sigma_m'>
        exact = mp.fsum(mp.mpf(P[m, q]) * mp.mpf(mv[m]) * mp.mpf(mv[q]) / (mp.mpf(masses[m]) * mp.mpf(masses[q]))
                        * S[m, q] for m in range(N) for q in range(N))
        modal = mp.fsum(mp.mpf(mv[m]) ** 2 * S[m, m] / mp.mpf(masses[m]) ** 2 for m in range(N))
    t = np.linspace(0.0, T, samples)
    d = np.array([_eval_sum(coeffs[m], lam, T, t) if mv[m] != 0 else np.zeros_like(t) for m in range(N)])
    return DistributedControl(T, N, (a, b), lam, coeffs, P, t, d, float(mp.sqrt(abs(exact))),
                              float(mp.sqrt(abs(modal))), family, mu)


def _distributed_beta_closed(op, mu, ctrl: DistributedControl, n_check, P):
    lam_all = eigenvalues(op, n_check)
    mv = np.zeros(n_check)
    mv[:len(mu.mu)] = mu.mu[:n_check]
    T = ctrl.T
    N = ctrl.N
    with mp.workdps(max(_prec(ctrl.lambdas, T), ctrl.family.dps_used)):
        X = _gram_cross(ctrl.lambdas, lam_all, T)
        # I[m, n] = int_0^T d_m(t) exp(lam_n (t - T)) dt
        out = np.empty(n_check)
        for n in range(n_check):
            s = mp.exp(-mp.mpf(lam_all[n]) * T) * mv[n]
            for m in range(N):
                if P[m, n] == 0:
                    continue
                s += mp.mpf(P[m, n]) * mp.fsum(ctrl.coeffs[m][k] * X[k, n] for k in range(N))
            out[n] = float(s)
    return out


def final_state_distributed(op: DegenerateOperator, mu, ctrl: DistributedControl, N_check: Optional[int] = None,
                            method: str = "closed", overlap: Optional[np.ndarray] = None,
                            tol: float = 1e-13) -> FinalStateReport:
    """beta_n(T) = exp(-lam_n T) mu_n + sum_m P[m,n] int_0^T d_m(t) exp(lam_n (t-T)) dt."""
    mu = _as_initial(mu)
    N_check = N_check or 2 * ctrl.N
    N = ctrl.N
    a, b = ctrl.interval
    if overlap is None:
        if N_check <= ctrl.overlap.shape[0]:
            overlap = ctrl.overlap
        else:
            overlap = overlap_matrix(op, N_check, a, b)
    P = overlap[:N, :N_check]
    if method == "closed":
        beta = _distributed_beta_closed(op, mu, ctrl, N_check, P)
    else:
        lam_all = eigenvalues(op, N_check)
        mv = np.zeros(N_check)
        mv[:len(mu.mu)] = mu.mu[:N_check]
        T = ctrl.T
        active = [m for m in range(N) if any(c != 0 for c in ctrl.coeffs[m])]
        sums = {m: ExpSum(ctrl.coeffs[m], ctrl.lambdas, T) for m in active}

        def forcing(t, n):
            t = np.atleast_1d(t)
            s = np.zeros_like(t, dtype=float)
            for m in active:
                s += P[m, n] * sums[m](t)
            return s

        beta = np.empty(N_check)
        if method == "quadrature":
            scale = max([1.0] + [sums[m].scale for m in active])
            for n in range(N_check):
                ln = lam_all[n]
                res = integrate_adaptive(lambda t: forcing(t, n) * np.exp(ln * (t - T)), 0.0, T, tol * scale)
                beta[n] = math.exp(-ln * T) * mv[n] + res.value
        elif method == "ode":
            Pa = P[active, :]

            def rhs(t, y):
                d = np.array([sums[m](t)[0] for m in active])
                return -lam_all * y + d @ Pa

            sol = solve_ivp(rhs, (0.0, T), mv, method="DOP853", rtol=1e-12, atol=1e-14)
            beta[:] = sol.y[:, -1]
        else:
            raise ValueError(f"unknown method {method!r}")
    return FinalStateReport(beta, float(np.max(np.abs(beta[:N]))), np.abs(beta[N:]), N, method)


# -- bounds ----------------------------------------------------------------------

def simple_lower_bound(op: DegenerateOperator, T: float) -> float:
    """1 / (ell^((alpha-1)/2) sqrt(kappa) sqrt(exp(2 lambda_1 T) - 1)).

    Any H steering Phi_1 to rest satisfies r_1 int H e^{lambda_1 t} = 1, and
    Cauchy-Schwarz turns this into a lower bound for ||H||_{L2}.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    lam1 = float(eigenvalues(op, 1)[0])
    return 1.0 / (op.ell ** (0.5 * (op.alpha - 1.0)) * math.sqrt(op.kappa) * math.sqrt(math.expm1(2.0 * lam1 * T)))


def energy_constant(op: DegenerateOperator, a: float) -> float:
    if op.alpha > 1.0:
        return 1.0 / ((op.alpha - 1.0) * a ** (op.alpha - 1.0))
    return math.log(op.ell / a)


def _trace_trajectory(op, mu, ctrl: DistributedControl, n_modes, t, P):
    """u(a, t) = sum_n beta_n(t) Phi_n(a) from the closed-form modal solution."""
    lam_all = eigenvalues(op, n_modes)
    a = ctrl.interval[0]
    phi_a = np.array([eigenfunction_eval(op, n, a) for n in range(1, n_modes + 1)])
    mv = np.zeros(n_modes)
    mv[:len(mu.mu)] = mu.mu[:n_modes]
    N = ctrl.N
    T = ctrl.T
    lam = ctrl.lambdas
    beta = np.zeros((n_modes, len(t)))
    with mp.workdps(max(_prec(lam, T), ctrl.family.dps_used)):
        for n in range(n_modes):
            ln = lam_all[n]
            beta[n] = np.exp(-ln * t) * mv[n]
            coefs = []
            for k in range(N):
                s = mp.fsum(mp.mpf(P[m, n]) * ctrl.coeffs[m][k] for m in range(N))
                coefs.append(s / (mp.mpf(ln) + mp.mpf(lam[k])))
            # int_0^t e^{-ln (t-s)} e^{-lk (T-s)} ds = e_k(t) (1 - e^{-(ln+lk) t})/(ln+lk)
            ek = _eval_sum(coefs, lam, T, t)
            damp = np.zeros_like(t)
            for k in range(N):
                damp += float(coefs[k] * mp.exp(-mp.mpf(lam[k]) * T)) * np.exp(-ln * t)
            beta[n] += ek - damp
    return beta, phi_a


def energy_inequality_check(op: DegenerateOperator, a: float, b: float, mu, ctrl: DistributedControl,
                            n_modes: int = 32, samples: int = 4097) -> EnergyReport:
    """Both sides of int int h^2 >= int u(a,t)^2/((b-a) C^2) - ||u0||^2/((b-a) C)."""
    mu = _as_initial(mu)
    C = energy_constant(op, a)
    u0 = mu.norm
    if ctrl.norm_l2 == 0.0 and u0 == 0.0:
        return EnergyReport(0.0, 0.0, 0.0, C, 0.0, 0.0)
    P = overlap_matrix(op, max(n_modes, ctrl.N), a, b)[:ctrl.N, :n_modes]
    t = np.linspace(0.0, ctrl.T, samples)
    beta, phi_a = _trace_trajectory(op, mu, ctrl, n_modes, t, P)
    trace = phi_a @ beta
    half = n_modes // 2
    tail = phi_a[half:] @ beta[half:]
    from scipy.integrate import simpson
    trace_sq = float(simpson(trace ** 2, x=t))
    tail_sq = float(simpson(tail ** 2, x=t))
    frac = math.sqrt(tail_sq / trace_sq) if trace_sq > 0 else 0.0
    if frac > 0.01:
        warnings.warn(f"modal tail carries {frac:.2%} of u(a, .)", RuntimeWarning)
    lhs = ctrl.norm_l2 ** 2
    rhs = trace_sq / ((b - a) * C ** 2) - u0 ** 2 / ((b - a) * C)
    return EnergyReport(lhs, rhs, lhs - rhs, C, trace_sq, frac)


# -- export ----------------------------------------------------------------------

def _fmt(v: float) -> str:
    return "%.17g" % v


def export_boundary_csv(ctrl: BoundaryControl, path) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "K", "H"])
        for row in zip(ctrl.time_grid, ctrl.K_samples, ctrl.H_samples):
            w.writerow([_fmt(v) for v in row])


def export_distributed_csv(ctrl: DistributedControl, path) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"d_{m}" for m in range(1, ctrl.N + 1)])
        for i, t in enumerate(ctrl.time_grid):
            w.writerow([_fmt(t)] + [_fmt(v) for v in ctrl.d_samples[:, i]])
