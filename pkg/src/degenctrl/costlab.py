"""Parameter sweeps over (alpha, T, ell) and the blow-up rate fit.

Each point synthesizes the minimal-norm moment control for u0 = Phi_1, once
through the boundary and once through the interior window (a, b), and
records the achieved norms next to the elementary lower bound.  The achieved
norm is an upper estimate of the control cost, not the cost itself.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import List, Sequence, Tuple

import numpy as np

from .control import InitialData, simple_lower_bound, synthesize_boundary, synthesize_distributed
from .moment import tail_sum
from .spectrum import make_operator

COLUMNS = ("alpha", "T", "ell", "N", "cost_h1", "cost_l2_loc", "lower_simple",
           "rate", "residual_max", "tail_estimate")


class DegenerateDesignError(ValueError):
    pass


@dataclass
class SweepPoint:
    alpha: float
    T: float
    ell: float
    N: int
    cost_h1: float = math.nan
    cost_l2_loc: float = math.nan
    lower_simple: float = math.nan
    rate: float = math.nan
    residual_max: float = math.nan
    tail_estimate: float = math.nan
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error

    def certified(self, tol: float = 1e-8) -> bool:
        return self.ok and self.residual_max <= tol


@dataclass
class SweepConfig:
    alphas: Tuple[float, ...] = (1.5, 1.6, 1.7, 1.8, 1.9, 1.95)
    Ts: Tuple[float, ...] = (0.25, 0.5, 1.0)
    ells: Tuple[float, ...] = (1.0,)
    N: int = 8
    a: float = 0.3
    b: float = 0.6
    tol: float = 1e-8
    jobs: int = 1
    n_cap: int = 16

    def __post_init__(self):
        self.alphas = tuple(float(x) for x in self.alphas)
        self.Ts = tuple(float(x) for x in self.Ts)
        self.ells = tuple(float(x) for x in self.ells)
        if any(not (1.0 <= x < 2.0) for x in self.alphas):
            raise ValueError("alpha grid must lie in [1, 2)")
        if any(not x > 0 for x in self.Ts + self.ells):
            raise ValueError("T and ell must be positive")
        if not (1 <= self.N <= self.n_cap):
            raise ValueError(f"N must lie in [1, {self.n_cap}]")
        if not (0 < self.a < self.b):
            raise ValueError("need 0 < a < b")
        if any(self.b >= e for e in self.ells):
            raise ValueError("the window (a, b) must sit inside (0, ell)")


def rate_of(alpha: float, T: float) -> float:
    return 1.0 / (T * (2.0 - alpha) ** 2)


def run_point(alpha: float, T: float, ell: float, N: int, a: float = 0.3, b: float = 0.6,
              tol: float = 1e-8) -> SweepPoint:
    pt = SweepPoint(alpha, T, ell, N, rate=rate_of(alpha, T))
    try:
        op = make_operator(alpha, ell)
        mu = InitialData.mode(1)
        pt.lower_simple = simple_lower_bound(op, T)
        pt.tail_estimate = tail_sum(op, T)
        bd = synthesize_boundary(op, mu, T, N, tol=tol)
        loc = synthesize_distributed(op, mu, T, N, a, b, tol=tol)
        pt.cost_h1 = bd.norm_h1
        pt.cost_l2_loc = loc.norm_l2
        pt.residual_max = max(bd.family.residual_max, loc.family.residual_max)
    except Exception as exc:   # recorded per point; the sweep goes on
        pt.error = f"{type(exc).__name__}: {exc}"
    return pt


def _run_args(args):
    return run_point(*args)


def run_sweep(config: SweepConfig) -> List[SweepPoint]:
    tasks = sorted((al, T, ell, config.N, config.a, config.b, config.tol)
                   for al in config.alphas for T in config.Ts for ell in config.ells)
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as ex:
            pts = list(ex.map(_run_args, tasks))
    else:
        pts = [_run_args(t) for t in tasks]
    return sorted(pts, key=lambda p: (p.alpha, p.T, p.ell))


@dataclass
class RateFit:
    A: float
    B: float
    r_squared: float
    n_points: int = field(default=0)

    def __iter__(self):
        return iter((self.A, self.B, self.r_squared))

    def predict(self, x) -> np.ndarray:
        return self.A + self.B * np.asarray(x, dtype=float)


def fit_regressor(p: SweepPoint) -> float:
    return p.ell ** (2.0 - p.alpha) * p.rate


def fit_rate(points: Sequence[SweepPoint], min_points: int = 6, min_span: float = 3.0) -> RateFit:
    """Least squares for log cost_h1 = A + B ell^(2-alpha) / (T (2-alpha)^2)."""
    use = [p for p in points if p.ok and p.cost_h1 > 0 and math.isfinite(p.cost_h1)]
    if len(use) < min_points:
        raise DegenerateDesignError(f"need at least {min_points} usable points, got {len(use)}")
    x = np.array([fit_regressor(p) for p in use])
    y = np.log([p.cost_h1 for p in use])
    if x.max() < min_span * x.min():
        raise DegenerateDesignError("rate values span less than a factor %g" % min_span)
    design = np.column_stack([np.ones_like(x), x])
    (A, B), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (A + B * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(A), float(B), r2, len(use))


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.17g" % v


def emit(points: Sequence[SweepPoint], path, fmt: str = "csv") -> None:
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            for p in points:
                w.writerow([_fmt(getattr(p, c)) for c in COLUMNS])
    elif fmt == "json":
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump([asdict(p) for p in points], fh, indent=1)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load(path, fmt: str = "csv") -> List[SweepPoint]:
    if fmt == "json":
        with open(path, encoding="utf-8") as fh:
            return [SweepPoint(**d) for d in json.load(fh)]
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    types = {f.name: f.type for f in fields(SweepPoint)}
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(SweepPoint(**{k: int(v) if types[k] in ("int", int) else float(v)
                                     for k, v in row.items()}))
    return out
