import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from degenctrl.quadrature import QuadratureError, graded_mesh, inner_product_eigen, integrate_adaptive
from degenctrl.spectrum import eigenfunction_eval, make_operator


def test_constant():
    r = integrate_adaptive(lambda x: np.ones_like(x), 0, 1)
    assert r.value == 1.0 and r.error_estimate >= 0 and r.evaluations >= 15


def test_sine():
    assert integrate_adaptive(np.sin, 0, math.pi, 1e-13).value == pytest.approx(2, abs=1e-12)


def test_endpoint_singularity_graded():
    r = integrate_adaptive(lambda x: x ** (-1 / 3), 0, 1, 1e-10, graded=True)
    assert r.value == pytest.approx(1.5, abs=1e-8)


def test_graded_mesh():
    m = graded_mesh(0, 1, 10)
    assert m[0] == 0 and m[-1] == 1 and np.all(np.diff(m) > 0)


def test_failure_carries_result():
    with pytest.raises(QuadratureError) as ei:
        integrate_adaptive(lambda x: np.sign(x - 1 / 3), 0, 1, 1e-300, max_depth=5)
    assert ei.value.result.value == pytest.approx(1 / 3, abs=1e-2)


def test_rejects_empty_interval():
    with pytest.raises(ValueError):
        integrate_adaptive(np.sin, 1, 1)


@given(st.integers(0, 12), st.floats(0.1, 3))
def test_polynomials_and_error_estimate(k, b):
    r = integrate_adaptive(lambda x: x ** k, 0, b, 1e-12)
    exact = b ** (k + 1) / (k + 1)
    assert abs(r.value - exact) <= max(1e-12, r.error_estimate) * (1 + 1e-6) + 1e-14 * exact


@given(st.floats(0.05, 0.5))
def test_fractional_power_error_estimate(p):
    r = integrate_adaptive(lambda x: x ** (-p), 0, 1, 1e-9, graded=True)
    assert abs(r.value - 1 / (1 - p)) <= max(1e-9, r.error_estimate) * 10


def test_strong_singularity_reports_failure():
    # halving the end cell only removes a factor 2^0.1 of its mass
    with pytest.raises(QuadratureError) as ei:
        integrate_adaptive(lambda x: x ** -0.9, 0, 1, 1e-9, graded=True)
    assert ei.value.result.error_estimate > 1e-9


@pytest.mark.parametrize("alpha", [1.0, 1.5, 1.9])
def test_normalization_and_orthogonality(alpha):
    op = make_operator(alpha)
    for n in (1, 4):
        for k in (1, 2, 4):
            v = inner_product_eigen(op, n, lambda x: eigenfunction_eval(op, k, x), 0, 1)
            assert v == pytest.approx(1.0 if n == k else 0.0, abs=1e-8)


@pytest.mark.parametrize("n", [1, 2, 3, 7])
def test_half_order_mean(n):
    op = make_operator(4 / 3)
    c = math.sqrt(2 / 3)   # Phi_n = c x^(-1/3) sin(n pi x^(1/3))
    v = inner_product_eigen(op, n, np.ones_like, 0, 1)
    assert v == pytest.approx(3 * c * (-1) ** (n + 1) / (n * math.pi), rel=1e-10)


def test_rejects_bad_range():
    op = make_operator(1.5)
    with pytest.raises(ValueError):
        inner_product_eigen(op, 1, np.ones_like, 0.5, 1.5)
