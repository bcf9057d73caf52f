"""Bessel functions of the first kind of real order and their zeros.

For ``y <= max(30, 2 nu)`` the regular part ``F(y) = 0F1(; nu+1; -y^2/4)`` of

    J_nu(y) = (y/2)^nu / Gamma(nu+1) * F(y)

is sampled with mpmath (which tracks cancellation in the series itself) and
stored as piecewise Chebyshev interpolants built lazily on demand.  Past that
point ``w = sqrt(y) J_nu`` is continued by integrating
``w'' + (1 - (nu^2 - 1/4)/y^2) w = 0`` with an explicit Runge-Kutta pair.

Zeros are located by marching upward from a rigorous lower bound of
``j_{nu,1}`` in unit steps (consecutive zeros are always more than 3 apart),
so none can be skipped, then refined by Brent's method and a Newton step.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List

import mpmath as mp
import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.integrate import solve_ivp
from scipy.optimize import brentq


class BesselDomainError(ValueError):
    pass


class BesselConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class BesselOrder:
    nu: float

    def __post_init__(self):
        nu = float(self.nu)
        if not math.isfinite(nu) or nu < 0:
            raise BesselDomainError(f"order must be finite and >= 0, got {self.nu}")
        object.__setattr__(self, "nu", nu)


def _order(order) -> float:
    if isinstance(order, BesselOrder):
        return order.nu
    return BesselOrder(order).nu


@dataclass(frozen=True)
class ZeroBracket:
    lo: float
    hi: float
    source: str  # "Lorch", "QuWong" or "SturmMarch"

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack


@dataclass
class ZeroTable:
    nu: float
    zeros: List[float]
    brackets: List[ZeroBracket]


@dataclass
class GapCertificate:
    nu: float
    zeros: List[float]
    gaps: List[float]
    monotone_ok: bool
    sturm_ok: bool
    limit_side_ok: bool
    sturm_violations: List[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.monotone_ok and self.sturm_ok and self.limit_side_ok


# -- evaluation ---------------------------------------------------------------

_PANEL_WIDTH = 4.0
_DEGREE = 24
_MAX_SPLIT = 6
_CHECK_FRACTIONS = (0.137, 0.391, 0.613, 0.877)
_ODE_CHUNK = 64.0
_TINY = 1e-300


class _Panel:
    """Chebyshev interpolant on [y0, y1] of F and F' in log-scaled form.

    ``cf`` and ``cd`` approximate ``F(y) exp(Lc - g)`` and ``F'(y) exp(Lc - g)``
    where ``Lc = log pref(yc)`` (kept as ``lc_hi + lc_lo``) and ``g`` is the
    log-magnitude of J on the panel, so the coefficients are O(1).
    """

    __slots__ = ("y0", "y1", "yc", "cf", "cd", "g", "lc_hi", "lc_lo")

    def __init__(self, y0, y1, yc, cf, cd, g, lc_hi, lc_lo):
        self.y0, self.y1, self.yc = y0, y1, yc
        self.cf, self.cd = cf, cd
        self.g, self.lc_hi, self.lc_lo = g, lc_hi, lc_lo


class _Evaluator:
    """Per-order evaluator holding the lazily built panels and ODE segments."""

    def __init__(self, nu: float):
        self.nu = nu
        self.y_switch = max(30.0, 2.0 * nu)
        self.n_base = int(math.ceil(self.y_switch / _PANEL_WIDTH))
        self._panels: dict = {}
        self._segments: list = []  # (y_start, y_end, OdeSolution)
        self._lock = threading.RLock()
        self.zeros: list = []
        self.brackets: list = []
        self._march_pos = None
        mp_nu = mp.mpf(nu)
        self._mp_nu = mp_nu
        self._log_gamma = mp.loggamma(mp_nu + 1)

    # exact reference values --------------------------------------------------
    def _mp_parts(self, y):
        """(F, F') at y in multiprecision."""
        b = self._mp_nu + 1
        y = mp.mpf(y)
        z = -y * y / 4
        f = mp.hyp0f1(b, z)
        fp = -(y / 2) / b * mp.hyp0f1(b + 1, z)
        return f, fp

    def _mp_log_pref(self, y):
        y = mp.mpf(y)
        if self.nu == 0:
            return mp.mpf(0)
        return self._mp_nu * mp.log(y / 2) - self._log_gamma

    def mp_j(self, y, dps=30):
        with mp.workdps(dps):
            f, fp = self._mp_parts(y)
            if y == 0:
                return (mp.mpf(1) if self.nu == 0 else mp.mpf(0)), None
            pref = mp.exp(self._mp_log_pref(y))
            return pref * f, pref * (self._mp_nu / y * f + fp)

    # Chebyshev panels ----------------------------------------------------------
    def _fit(self, y0, y1):
        yc = 0.5 * (y0 + y1)
        half = 0.5 * (y1 - y0)
        k = np.arange(_DEGREE + 1)
        t = np.cos(np.pi * (k + 0.5) / (_DEGREE + 1))
        with mp.workdps(30):
            lc = self._mp_log_pref(yc) if self.nu > 0 else mp.mpf(0)
            vals = [self._mp_parts(mp.mpf(yc) + mp.mpf(half) * mp.mpf(ti)) for ti in t]
            big = max(max(abs(f), abs(fp)) for f, fp in vals)
            g = float(lc + mp.log(big)) if big > 0 else float(lc)
            scale = mp.exp(lc - g)
            vf = np.array([float(scale * f) for f, _ in vals])
            vd = np.array([float(scale * fp) for _, fp in vals])
            lc_hi = float(lc)
            lc_lo = float(lc - lc_hi)
        cf = cheb.chebfit(t, vf, _DEGREE)
        cd = cheb.chebfit(t, vd, _DEGREE)
        return _Panel(y0, y1, yc, cf, cd, g, lc_hi, lc_lo)

    def _envelope(self, y):
        # rough amplitude of the oscillatory part of J
        if y <= self.nu + 1.0:
            return 0.0
        return math.sqrt(2.0 / (math.pi * math.sqrt(y * y - self.nu ** 2)))

    def _panel_ok(self, p):
        half = 0.5 * (p.y1 - p.y0)
        with mp.workdps(30):
            lc = mp.mpf(p.lc_hi) + mp.mpf(p.lc_lo)
            scale = mp.exp(lc - p.g)
            for s in _CHECK_FRACTIONS:
                tt = 2.0 * s - 1.0
                y = mp.mpf(p.yc) + mp.mpf(half) * mp.mpf(tt)
                f, _ = self._mp_parts(y)
                exact = float(scale * f)
                approx = float(cheb.chebval(tt, p.cf))
                # envelope of J expressed in the normalized units of the panel
                shift = self.nu * math.log(float(y) / p.yc) if self.nu > 0 else 0.0
                env = self._envelope(float(y)) * math.exp(min(-p.g - shift, 700.0))
                if abs(approx - exact) > 5e-15 * (abs(exact) + env):
                    return False
        return True

    def _build_base(self, k):
        y0 = k * _PANEL_WIDTH
        y1 = min((k + 1) * _PANEL_WIDTH, self.y_switch)
        out = []
        stack = [(y0, y1, 0)]
        while stack:
            a, b, depth = stack.pop()
            p = self._fit(a, b)
            if depth < _MAX_SPLIT and not self._panel_ok(p):
                m = 0.5 * (a + b)
                stack.append((m, b, depth + 1))
                stack.append((a, m, depth + 1))
                continue
            out.append((a, p))
        out.sort(key=lambda e: e[0])
        return out

    def _base(self, k):
        got = self._panels.get(k)
        if got is None:
            with self._lock:
                got = self._panels.get(k)
                if got is None:
                    got = self._build_base(k)
                    self._panels[k] = got
        return got

    def _eval_series(self, y, mode, log_k=0.0):
        """Panel evaluation.

        mode "J": (J, 0); "JP": (J, J'); "F": (exp(log_k) F, exp(log_k) F').
        """
        out0 = np.zeros_like(y)
        out1 = np.zeros_like(y)
        ks = np.minimum((y / _PANEL_WIDTH).astype(int), self.n_base - 1)
        for k in np.unique(ks):
            sel = np.nonzero(ks == k)[0]
            plist = self._base(int(k))
            starts = np.array([s for s, _ in plist])
            idx = np.clip(np.searchsorted(starts, y[sel], side="right") - 1, 0, len(plist) - 1)
            for pi in np.unique(idx):
                p = plist[pi][1]
                s2 = sel[idx == pi]
                yy = y[s2]
                tt = (yy - p.yc) / (0.5 * (p.y1 - p.y0))
                P = cheb.chebval(tt, p.cf)
                if mode == "F":
                    fac = math.exp(min(((log_k - p.lc_hi) - p.lc_lo) + p.g, 709.0))
                    out0[s2] = fac * P
                    out1[s2] = fac * cheb.chebval(tt, p.cd)
                    continue
                if self.nu > 0:
                    with np.errstate(divide="ignore"):
                        fac = np.exp(np.minimum(p.g + self.nu * np.log(yy / p.yc), 709.0))
                else:
                    fac = np.exp(np.full_like(yy, p.g))
                out0[s2] = fac * P
                if mode == "JP":
                    Q = cheb.chebval(tt, p.cd)
                    with np.errstate(divide="ignore", invalid="ignore"):
                        out1[s2] = fac * (self.nu / yy * P + Q)
        return out0, out1

    # ODE continuation ------------------------------------------------------------
    def _rhs(self, y, s):
        c = (self.nu ** 2 - 0.25) / (y * y)
        return np.array([s[1], -(1.0 - c) * s[0]])

    def _extend_to(self, y_target):
        with self._lock:
            if not self._segments:
                y0 = self.y_switch
                jv, jpv = self.mp_j(y0, dps=40)
                sq = math.sqrt(y0)
                state = np.array([float(mp.sqrt(y0) * jv),
                                  float(jv / (2 * mp.sqrt(y0)) + mp.sqrt(y0) * jpv)])
                del sq
            else:
                y0 = self._segments[-1][1]
                state = self._segments[-1][2](y0)
            while y0 < y_target:
                y1 = y0 + _ODE_CHUNK
                sol = solve_ivp(self._rhs, (y0, y1), state, method="DOP853",
                                rtol=1e-13, atol=1e-15, dense_output=True)
                if not sol.success:
                    raise BesselConvergenceError(f"ODE continuation failed: {sol.message}")
                self._segments.append((y0, y1, sol.sol))
                state = sol.y[:, -1]
                y0 = y1

    def _eval_ode(self, y, want_prime):
        top = float(np.max(y))
        if not self._segments or self._segments[-1][1] < top:
            self._extend_to(top)
        starts = np.array([s[0] for s in self._segments])
        idx = np.clip(np.searchsorted(starts, y, side="right") - 1, 0, len(starts) - 1)
        j = np.empty_like(y)
        jp = np.empty_like(y)
        for k in np.unique(idx):
            sel = idx == k
            yy = y[sel]
            w, dw = self._segments[k][2](yy)
            sq = np.sqrt(yy)
            j[sel] = w / sq
            if want_prime:
                jp[sel] = (dw - w / (2.0 * yy)) / sq
        return j, jp

    def evaluate(self, y, want_prime=False):
        y = np.asarray(y, dtype=float)
        shape = y.shape
        y = y.ravel()
        if np.any(~np.isfinite(y)) or np.any(y < 0):
            raise BesselDomainError("argument must be finite and >= 0")
        j = np.empty_like(y)
        jp = np.empty_like(y)
        low = y <= self.y_switch
        if np.any(low):
            j[low], jp[low] = self._eval_series(y[low], "JP" if want_prime else "J")
        if np.any(~low):
            j[~low], jp[~low] = self._eval_ode(y[~low], want_prime)
        zero = y == 0
        if np.any(zero):
            j[zero] = 1.0 if self.nu == 0 else 0.0
            if self.nu == 0 or self.nu > 1:
                jp[zero] = 0.0
            elif self.nu == 1:
                jp[zero] = 0.5
            else:
                jp[zero] = np.inf
        return j.reshape(shape), jp.reshape(shape)

    def regular(self, y, log_k=0.0):
        """(exp(log_k) F(y), exp(log_k) F'(y)) with F the regular part of J."""
        y = np.asarray(y, dtype=float)
        shape = y.shape
        y = y.ravel()
        if np.any(~np.isfinite(y)) or np.any(y < 0):
            raise BesselDomainError("argument must be finite and >= 0")
        f = np.empty_like(y)
        fp = np.empty_like(y)
        low = y <= self.y_switch
        if np.any(low):
            f[low], fp[low] = self._eval_series(y[low], "F", log_k)
        if np.any(~low):
            yy = y[~low]
            j, jp = self._eval_ode(yy, True)
            lp = self.nu * np.log(yy / 2.0) - math.lgamma(self.nu + 1.0)
            fac = np.exp(log_k - lp)
            f[~low] = fac * j
            fp[~low] = fac * jp - self.nu / yy * f[~low]
        return f.reshape(shape), fp.reshape(shape)

    # zeros -----------------------------------------------------------------
    def _j_scalar(self, y):
        return float(self.evaluate(np.array([y]))[0][0])

    def ensure_zeros(self, n):
        with self._lock:
            if self._march_pos is None:
                nu = self.nu
                # j_{nu,1} > sqrt(nu (nu+2)) and j_{nu,1} >= j_{0,1} > 1
                start = max(math.sqrt(nu * (nu + 2.0)), 1.0)
                self._march_pos = start
            step = 1.0
            y = self._march_pos
            fy = self._j_scalar(y)
            budget = 100000
            while len(self.zeros) < n:
                budget -= 1
                if budget < 0:
                    raise BesselConvergenceError("zero march exceeded its budget")
                y2 = y + step
                f2 = self._j_scalar(y2)
                if fy == 0.0:
                    fy = self._j_scalar(y - 1e-9)
                if fy * f2 < 0:
                    z = self._refine(y, y2, fy, f2)
                    self.zeros.append(z)
                    self.brackets.append(ZeroBracket(y, y2, "SturmMarch"))
                y, fy = y2, f2
                self._march_pos = y

    def _refine(self, a, b, fa, fb):
        z = brentq(self._j_scalar, a, b, xtol=1e-15, rtol=8.9e-16, maxiter=200)
        # the float evaluation limits brentq to about 1e-13 of the local
        # amplitude; two Newton steps in multiprecision give the rounded zero
        with mp.workdps(40):
            zm = mp.mpf(z)
            for _ in range(2):
                zm -= mp.besselj(self._mp_nu, zm) / mp.besselj(self._mp_nu, zm, 1)
            z2 = float(zm)
        if a <= z2 <= b and abs(z2 - z) < 1e-8 * z:
            z = z2
        return float(z)


@lru_cache(maxsize=256)
def _evaluator(nu: float) -> _Evaluator:
    return _Evaluator(nu)


# -- public API --------------------------------------------------------------

def bessel_j(order, y):
    """J_nu(y) for y >= 0; scalar in, scalar out, arrays broadcast."""
    nu = _order(order)
    scalar = np.ndim(y) == 0
    val, _ = _evaluator(nu).evaluate(np.atleast_1d(np.asarray(y, dtype=float)))
    return float(val[0]) if scalar else val


def bessel_j_prime(order, y):
    """dJ_nu/dy for y > 0 (y = 0 gives the one-sided limit)."""
    nu = _order(order)
    scalar = np.ndim(y) == 0
    _, der = _evaluator(nu).evaluate(np.atleast_1d(np.asarray(y, dtype=float)), want_prime=True)
    return float(der[0]) if scalar else der


def bessel_j_and_prime(order, y):
    nu = _order(order)
    return _evaluator(nu).evaluate(np.asarray(y, dtype=float), want_prime=True)


def bessel_regular(order, y, log_scale: float = 0.0):
    """exp(log_scale) * F(y) and its derivative, where J_nu = pref * F.

    ``F(y) = 0F1(; nu+1; -y^2/4)`` is bounded and equals 1 at the origin; the
    scale is applied in log space so large-order prefactors never overflow.
    """
    nu = _order(order)
    return _evaluator(nu).regular(np.asarray(y, dtype=float), log_scale)


def _outward(lo: float, hi: float, source: str) -> ZeroBracket:
    # the endpoints carry a few roundings; widen so the float bracket contains
    # the exact one (for nu = 1/2 both ends equal n pi)
    return ZeroBracket(lo * (1.0 - 8e-16), hi * (1.0 + 8e-16), source)


def zero_bracket_lorch(order, n: int) -> ZeroBracket:
    nu = _order(order)
    if n < 1:
        raise BesselDomainError("zero index must be >= 1")
    a = math.pi * (n + nu / 4.0 - 0.125)
    b = math.pi * (n + nu / 2.0 - 0.25)
    lo, hi = (a, b) if nu >= 0.5 else (b, a)
    return _outward(lo, hi, "Lorch")


@lru_cache(maxsize=8)
def _airy_zero(k: int) -> float:
    with mp.workdps(30):
        return float(mp.airyaizero(k))


def airy_negative_zero(k: int) -> float:
    """k-th zero of Ai (negative), 1 <= k <= 5."""
    if not 1 <= k <= 5:
        raise BesselDomainError(f"Airy zero index must be in 1..5, got {k}")
    return _airy_zero(int(k))


def zero_bracket_quwong(order, k: int) -> ZeroBracket:
    nu = _order(order)
    if nu == 0:
        raise BesselDomainError("Qu-Wong bracket needs nu > 0")
    a = airy_negative_zero(k)
    c3 = nu ** (1.0 / 3.0)
    lo = nu - a * c3 / 2.0 ** (1.0 / 3.0)
    hi = lo + 0.15 * a * a * 2.0 ** (1.0 / 3.0) / c3
    return _outward(lo, hi, "QuWong")


def zero_table(order, n_max: int) -> ZeroTable:
    nu = _order(order)
    if n_max < 1:
        raise BesselDomainError("n_max must be >= 1")
    ev = _evaluator(nu)
    ev.ensure_zeros(n_max)
    return ZeroTable(nu, list(ev.zeros[:n_max]), list(ev.brackets[:n_max]))


def bessel_zeros(order, n_max: int) -> np.ndarray:
    return np.array(zero_table(order, n_max).zeros)


def bessel_zero(order, n: int) -> float:
    if n < 1:
        raise BesselDomainError("zero index must be >= 1")
    return zero_table(order, n).zeros[n - 1]


def gap_certificate(order, n_max: int, tol: float = 1e-9) -> GapCertificate:
    nu = _order(order)
    if n_max < 2:
        raise BesselDomainError("n_max must be >= 2")
    zs = zero_table(nu, n_max).zeros
    gaps = list(np.diff(zs))
    d = np.diff(gaps)
    if nu >= 0.5:
        monotone = bool(np.all(d <= tol))
        side = all(g >= math.pi - tol for g in gaps)
    else:
        monotone = bool(np.all(d >= -tol))
        side = all(g <= math.pi + tol for g in gaps)
    if nu == 0.5:
        monotone = bool(np.all(np.abs(d) <= tol))
    viol = [n for n, g in enumerate(gaps, start=1) if n > nu and g > 2 * math.pi]
    return GapCertificate(nu, zs, gaps, monotone, not viol, side, viol)
