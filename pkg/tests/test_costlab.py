import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from degenctrl.costlab import (COLUMNS, DegenerateDesignError, SweepConfig, SweepPoint, emit, fit_rate,
                               load, rate_of, run_point, run_sweep)


@pytest.fixture(scope="module")
def point():
    return run_point(1.6, 0.5, 1.0, 6)


def test_single_point(point):
    assert point.ok and point.certified(1e-6)
    assert point.residual_max <= 1e-6
    assert point.rate == pytest.approx(1 / (0.5 * 0.4 ** 2))
    assert point.lower_simple <= point.cost_h1
    assert point.cost_l2_loc > 0 and point.tail_estimate > 0


def test_failed_point_is_recorded_not_raised():
    p = run_point(1.5, 1.0, 1.0, 20)
    assert not p.ok and "exceeds" in p.error
    assert not p.certified()
    assert math.isnan(p.cost_h1)


def _synthetic(A, B, xs):
    return [SweepPoint(alpha=1.5, T=1 / (x * 0.25), ell=1.0, N=8, cost_h1=math.exp(A + B * x),
                       rate=x) for x in xs]


@given(st.floats(-5, 5), st.floats(0.01, 2))
def test_fit_recovers_exact_data(A, B):
    fit = fit_rate(_synthetic(A, B, np.linspace(1, 12, 8)))
    assert fit.A == pytest.approx(A, abs=1e-8)
    assert fit.B == pytest.approx(B, rel=1e-8)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    a, b, r2 = fit
    assert fit.predict([0.0])[0] == pytest.approx(a)


def test_fit_uses_ell_scaling():
    pts = _synthetic(0.0, 1.0, np.linspace(1, 12, 8))
    for p in pts:
        p.ell = 2.0
        p.cost_h1 = math.exp(2.0 ** 0.5 * p.rate)
    assert fit_rate(pts).B == pytest.approx(1.0)


def test_degenerate_designs():
    with pytest.raises(DegenerateDesignError):
        fit_rate(_synthetic(0, 1, [1, 2, 3]))
    with pytest.raises(DegenerateDesignError):
        fit_rate(_synthetic(0, 1, np.linspace(1, 2, 8)))
    bad = _synthetic(0, 1, np.linspace(1, 12, 8))
    for p in bad[:4]:
        p.error = "boom"
    with pytest.raises(DegenerateDesignError):
        fit_rate(bad)


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(alphas=(2.0,))
    with pytest.raises(ValueError):
        SweepConfig(Ts=(0.0,))
    with pytest.raises(ValueError):
        SweepConfig(N=17)
    with pytest.raises(ValueError):
        SweepConfig(ells=(0.5,))
    assert SweepConfig(alphas=[1.5]).alphas == (1.5,)


def test_empty_csv_is_header_only(tmp_path):
    p = tmp_path / "e.csv"
    emit([], p)
    assert p.read_text() == ",".join(COLUMNS) + "\n"


def test_csv_schema_and_round_trip(tmp_path, point):
    p = tmp_path / "one.csv"
    emit([point], p)
    rows = list(csv.reader(open(p)))
    assert tuple(rows[0]) == COLUMNS and len(rows[1]) == 10
    back = load(p)[0]
    for c in COLUMNS:
        assert getattr(back, c) == getattr(point, c)
    assert isinstance(back.N, int)


def test_json_round_trip(tmp_path, point):
    bad = SweepPoint(1.7, 0.5, 1.0, 8, error="X: y")
    p = tmp_path / "s.json"
    emit([point, bad], p, "json")
    back = load(p, "json")
    assert back[0] == point
    assert back[1].error == "X: y" and math.isnan(back[1].cost_h1)
    assert json.loads(p.read_text())[0]["alpha"] == 1.6
    with pytest.raises(ValueError):
        emit([point], p, "xml")


def test_small_sweep_sandwich_and_order():
    cfg = SweepConfig(alphas=(1.5, 1.8), Ts=(0.5, 1.0), N=5, jobs=2)
    pts = run_sweep(cfg)
    assert [(p.alpha, p.T) for p in pts] == [(1.5, 0.5), (1.5, 1.0), (1.8, 0.5), (1.8, 1.0)]
    assert all(p.certified() for p in pts)
    assert all(p.lower_simple <= p.cost_h1 for p in pts)
    assert pts == run_sweep(SweepConfig(alphas=(1.5, 1.8), Ts=(0.5, 1.0), N=5, jobs=1))


def test_rate_of():
    assert rate_of(1.5, 2.0) == pytest.approx(2.0)
