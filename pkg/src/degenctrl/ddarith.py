"""Vectorized double-double arithmetic.

A :class:`DD` value is an unevaluated sum ``hi + lo`` of two float64 arrays
with ``|lo| <= ulp(hi)/2``, giving roughly 32 significant digits.  The error
free transformations are the classical ones of Knuth and Dekker; all
operations broadcast like numpy arrays.
"""
from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1

_LN2_HI = 6.931471805599452862e-01
_LN2_LO = 2.319046813846299558e-17


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    err = b - (s - a)
    return s, err


def split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


class DD:
    """Array of double-double numbers."""

    __slots__ = ("hi", "lo")
    __array_priority__ = 100

    def __init__(self, hi, lo=None):
        hi = np.asarray(hi, dtype=float)
        self.hi = hi
        self.lo = np.zeros_like(hi) if lo is None else np.asarray(lo, dtype=float)

    @classmethod
    def from_mp(cls, values):
        """Round mpmath numbers (scalar, list or matrix entries) to DD."""
        import mpmath as mp

        flat = list(values) if not isinstance(values, mp.mpf) else [values]
        hi = np.array([float(v) for v in flat])
        with mp.workdps(max(mp.mp.dps, 40)):
            lo = np.array([float(mp.mpf(v) - mp.mpf(h)) for v, h in zip(flat, hi)])
        return cls(hi, lo)

    def to_mp(self):
        """Exact values as mpmath numbers (needs about 35 digits, set by caller)."""
        import mpmath as mp

        return [mp.mpf(float(h)) + mp.mpf(float(l))
                for h, l in zip(self.hi.ravel(), self.lo.ravel())]

    # container protocol ---------------------------------------------------
    @property
    def shape(self):
        return self.hi.shape

    def __len__(self):
        return len(self.hi)

    def __getitem__(self, idx):
        return DD(self.hi[idx], self.lo[idx])

    def __setitem__(self, idx, value):
        value = _as_dd(value)
        self.hi[idx] = value.hi
        self.lo[idx] = value.lo

    def copy(self):
        return DD(self.hi.copy(), self.lo.copy())

    def reshape(self, *shape):
        return DD(self.hi.reshape(*shape), self.lo.reshape(*shape))

    @property
    def T(self):
        return DD(self.hi.T, self.lo.T)

    def __float__(self):
        return float(self.hi + self.lo)

    def __repr__(self):
        return f"DD(hi={self.hi!r}, lo={self.lo!r})"

    def to_float(self):
        return self.hi + self.lo

    # arithmetic -----------------------------------------------------------
    def __neg__(self):
        return DD(-self.hi, -self.lo)

    def __abs__(self):
        sign = np.where(self.hi < 0, -1.0, 1.0)
        return DD(sign * self.hi, sign * self.lo)

    def __add__(self, other):
        b = _as_dd(other)
        s, e = two_sum(self.hi, b.hi)
        t, f = two_sum(self.lo, b.lo)
        e = e + t
        s, e = quick_two_sum(s, e)
        e = e + f
        s, e = quick_two_sum(s, e)
        return DD(s, e)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_as_dd(other))

    def __rsub__(self, other):
        return _as_dd(other) + (-self)

    def __mul__(self, other):
        b = _as_dd(other)
        p, e = two_prod(self.hi, b.hi)
        e = e + (self.hi * b.lo + self.lo * b.hi)
        p, e = quick_two_sum(p, e)
        return DD(p, e)

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = _as_dd(other)
        q1 = self.hi / b.hi
        r = self - b * q1
        q2 = r.hi / b.hi
        r = r - b * q2
        q3 = r.hi / b.hi
        s, e = quick_two_sum(q1, q2)
        return DD(s, e) + q3

    def __rtruediv__(self, other):
        return _as_dd(other) / self

    def sum(self, axis=None):
        """Sequential compensated sum along ``axis`` (all entries if None)."""
        if axis is None:
            x = self.reshape(-1)
            axis = 0
        else:
            x = self
        hi = np.moveaxis(x.hi, axis, 0)
        lo = np.moveaxis(x.lo, axis, 0)
        acc = DD(np.zeros(hi.shape[1:]), np.zeros(hi.shape[1:]))
        for k in range(hi.shape[0]):
            acc = acc + DD(hi[k], lo[k])
        return acc


def _as_dd(x) -> DD:
    if isinstance(x, DD):
        return x
    return DD(np.asarray(x, dtype=float))


def dd_exp(x) -> DD:
    """exp of a DD array, relative accuracy about 1e-30.

    Argument reduction ``x = k ln2 + r`` and ``r -> r/512``; the reduced
    ``expm1`` is a short Taylor series and is squared back with
    ``s <- s (s + 2)`` so that no digits are lost near 1.  Below about
    exp(-650) the low word turns subnormal and the relative accuracy degrades
    gracefully toward plain double.
    """
    x = _as_dd(x)
    k = np.round(x.hi / _LN2_HI)
    r = x - DD(_LN2_HI * np.ones_like(k), _LN2_LO * np.ones_like(k)) * k
    r = r * (1.0 / 512.0)
    s = r
    term = r
    for n in range(2, 11):
        term = term * r / float(n)
        s = s + term
    for _ in range(9):
        s = s * (s + 2.0)
    s = s + 1.0
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        hi = np.ldexp(s.hi, k.astype(int))
        lo = np.ldexp(s.lo, k.astype(int))
    big = x.hi > 709.0
    small = x.hi < -745.0
    hi = np.where(big, np.inf, np.where(small, 0.0, hi))
    lo = np.where(big | small, 0.0, lo)
    return DD(hi, lo)


def dd_matmul(a: DD, b: DD) -> DD:
    """Matrix product of 2-D DD arrays with compensated accumulation."""
    prod = DD(a.hi[:, :, None], a.lo[:, :, None]) * DD(b.hi[None, :, :], b.lo[None, :, :])
    return prod.sum(axis=1)


def dd_ldlt_solve(a: DD, rhs: DD) -> DD:
    """Solve ``a x = rhs`` for symmetric positive definite ``a`` by LDL^T.

    ``rhs`` may have several columns.  Raises ``np.linalg.LinAlgError`` if a
    nonpositive pivot shows up, which signals loss of definiteness at this
    working precision.
    """
    n = a.shape[0]
    L = DD(np.eye(n), np.zeros((n, n)))
    d = DD(np.zeros(n), np.zeros(n))
    for j in range(n):
        acc = a[j, j]
        for k in range(j):
            acc = acc - L[j, k] * L[j, k] * d[k]
        if not acc.hi > 0:
            raise np.linalg.LinAlgError(f"nonpositive pivot {float(acc):.3e} at {j}")
        d[j] = acc
        for i in range(j + 1, n):
            acc = a[i, j]
            for k in range(j):
                acc = acc - L[i, k] * L[j, k] * d[k]
            L[i, j] = acc / d[j]
    y = rhs.copy()
    for i in range(n):
        for k in range(i):
            y[i] = y[i] - L[i, k] * y[k]
    for i in range(n):
        y[i] = y[i] / d[i]
    for i in range(n - 1, -1, -1):
        for k in range(i + 1, n):
            y[i] = y[i] - L[k, i] * y[k]
    return y
