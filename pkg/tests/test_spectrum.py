import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from degenctrl.besselnu import bessel_zero
from degenctrl.quadrature import inner_product_eigen
from degenctrl.spectrum import (OperatorDomainError, concentration_profile, eigenfunction_derivatives,
                                eigenfunction_eval, eigenpair, eigenvalue, eigenvalues, flux_coefficient,
                                flux_coefficients, flux_parity, gap_summary, make_operator, norm_const)

alphas = st.floats(1.0, 1.98)


def test_derived_parameters():
    op = make_operator(1.5, 1.0)
    assert (op.nu, op.kappa) == (1.0, 0.25)
    op = make_operator(1.0, 2.0)
    assert (op.nu, op.kappa) == (0.0, 0.5)
    op = make_operator(4 / 3)
    assert op.nu == pytest.approx(0.5, abs=1e-15) and op.kappa == pytest.approx(1 / 3)


def test_near_integer_order_is_snapped():
    assert make_operator(1.9).nu == 9.0
    assert make_operator(1.99).nu == 99.0


def test_domain_errors():
    for a in (0.9, 2.0, 2.5, float("nan")):
        with pytest.raises(OperatorDomainError):
            make_operator(a)
    with pytest.raises(OperatorDomainError):
        make_operator(1.5, -1.0)
    with pytest.raises(OperatorDomainError):
        eigenvalue(make_operator(1.5), 0)
    with pytest.raises(OperatorDomainError):
        eigenfunction_eval(make_operator(1.5), 1, 0.0)


@given(alphas)
def test_operator_invariants(alpha):
    op = make_operator(alpha)
    assert op.nu >= 0 and 0 < op.kappa <= 0.5
    assert op.nu * op.kappa == pytest.approx((alpha - 1) / 2, rel=1e-9, abs=1e-15)


def test_eigenvalue_examples():
    assert eigenvalue(make_operator(4 / 3), 2) == pytest.approx(4 * math.pi ** 2 / 9, rel=1e-12)
    assert eigenvalue(make_operator(1.0), 1) == pytest.approx(0.25 * 2.404825557695773 ** 2, rel=1e-13)
    assert eigenvalue(make_operator(1.0), 1) == pytest.approx(1.445796, abs=1e-6)


@given(alphas, st.integers(1, 6))
def test_eigenvalue_length_scaling(alpha, n):
    l1 = eigenvalue(make_operator(alpha, 1.0), n)
    l2 = eigenvalue(make_operator(alpha, 2.0), n)
    assert l2 == pytest.approx(2 ** (alpha - 2) * l1, rel=1e-12)


@given(alphas)
def test_eigenvalues_increase(alpha):
    lam = eigenvalues(make_operator(alpha), 12, include_zero=True)
    assert lam[0] == 0 and np.all(np.diff(lam) > 0)


@pytest.mark.parametrize("n", [1, 2, 5, 11])
def test_half_order_eigenfunction_closed_form(n):
    op = make_operator(4 / 3)
    x = np.linspace(1e-4, 1, 301)
    ref = math.sqrt(2 / 3) * x ** (-1 / 3) * np.sin(n * math.pi * x ** (1 / 3))
    np.testing.assert_allclose(eigenfunction_eval(op, n, x), ref, rtol=0, atol=1e-9)


@given(alphas, st.integers(1, 8), st.sampled_from([1.0, 2.0]))
def test_eigenfunction_vanishes_at_right_end(alpha, n, ell):
    op = make_operator(alpha, ell)
    assert abs(eigenfunction_eval(op, n, ell)) <= 1e-9 * norm_const(op, n)


def test_eigenfunction_finite_near_origin():
    op = make_operator(1.9)
    v = eigenfunction_eval(op, 1, np.array([1e-300, 1e-250, 1e-10]))
    assert np.all(np.isfinite(v))
    assert v[0] == pytest.approx(v[1], rel=1e-12)


@pytest.mark.parametrize("alpha", [1.0, 1.5, 1.9])
def test_first_mode_normalized(alpha):
    op = make_operator(alpha)
    assert inner_product_eigen(op, 1, lambda x: eigenfunction_eval(op, 1, x), 0, 1) == pytest.approx(1, abs=1e-8)


@pytest.mark.parametrize("alpha", [1.0, 1.3, 1.5, 1.75, 1.9])
def test_eigen_residual(alpha):
    op = make_operator(alpha)
    x = np.linspace(0.05, 0.95, 200)
    for n in (1, 3, 6):
        phi, dphi, d2phi = eigenfunction_derivatives(op, n, x)
        # -(x^a phi')' = -a x^(a-1) phi' - x^a phi''
        res = -alpha * x ** (alpha - 1) * dphi - x ** alpha * d2phi - eigenvalue(op, n) * phi
        scale = np.max(np.abs(eigenvalue(op, n) * phi))
        assert np.max(np.abs(res)) <= 1e-6 * scale


def test_flux_examples():
    op = make_operator(1.0)
    assert flux_coefficient(op, 1) == pytest.approx(math.sqrt(eigenvalue(op, 1)), rel=1e-13)
    op = make_operator(4 / 3)
    assert flux_coefficient(op, 1) == pytest.approx(math.sqrt(2 / 3) * math.pi / 3, rel=1e-12)


@given(alphas, st.integers(1, 10), st.sampled_from([0.5, 1.0, 3.0]))
def test_flux_square_identity(alpha, n, ell):
    op = make_operator(alpha, ell)
    r = flux_coefficient(op, n)
    assert r * r == pytest.approx(2 * op.kappa * ell ** (alpha - 1) * eigenvalue(op, n), rel=1e-12)


@pytest.mark.parametrize("alpha", [1.0, 1.5, 1.8])
def test_flux_matches_boundary_derivative(alpha):
    op = make_operator(alpha)
    signed = flux_coefficients(op, 6, signed=True)
    for n in range(1, 7):
        _, dphi, _ = eigenfunction_derivatives(op, n, np.array([1.0]))
        assert signed[n - 1] == pytest.approx(float(dphi[0]), rel=1e-10)
        assert np.sign(signed[n - 1]) == flux_parity(n)


def test_eigenpair_fields():
    op = make_operator(1.5)
    e = eigenpair(op, 3)
    assert e.j == bessel_zero(1.0, 3)
    assert e.lam == pytest.approx(op.kappa ** 2 * e.j ** 2)
    assert e.r == pytest.approx(math.sqrt(2 * op.kappa * e.lam))


def test_gap_summary_half_order():
    op = make_operator(4 / 3)
    g = gap_summary(op, 20)
    gaps = np.array(g.sqrt_gaps[1:])
    np.testing.assert_allclose(gaps, math.pi / 3, rtol=1e-12)
    assert g.gamma_min <= math.pi / 3 * (1 + 1e-12)
    assert g.gamma_max >= math.pi / 3 * (1 - 1e-12)


def test_gap_summary_alpha_19():
    op = make_operator(1.9)
    g = gap_summary(op, 30)
    assert g.n_star == 10
    assert g.gamma_max_star == pytest.approx(2 * math.pi * op.kappa)
    lam = np.sqrt(eigenvalues(op, 30))
    for n in range(g.n_star, 30):
        assert lam[n] - lam[n - 1] <= g.gamma_max_star


def test_gap_ratio_grows_toward_two():
    ratios = []
    for a in (1.5, 1.9, 1.99):
        op = make_operator(a)
        g = gap_summary(op, int(op.nu) + 5)
        ratios.append((g.gamma_max / g.gamma_max_star, op.kappa))
    r = [q for q, _ in ratios]
    assert r[0] < r[1] < r[2]
    scaled = [q * k ** (1 / 3) for q, k in ratios]
    assert max(scaled) / min(scaled) < 2


@given(st.floats(1.0, 1.995), st.sampled_from([1.0, 2.0]))
def test_gap_bounds_hold(alpha, ell):
    op = make_operator(alpha, ell)
    g = gap_summary(op, int(op.nu) + 4)
    assert g.verified
    gaps = np.array(g.sqrt_gaps)
    assert np.all(gaps >= g.gamma_min * (1 - 1e-12))
    assert np.all(gaps[1:] <= g.gamma_max * (1 + 1e-12))


def test_gap_summary_needs_enough_modes():
    with pytest.raises(ValueError):
        gap_summary(make_operator(1.9), 5)


def test_concentration_half_order():
    for n in (1, 4):
        (_, d), = concentration_profile([4 / 3], n)
        assert d == pytest.approx(math.pi ** 2 / 9 * (2 * n + 1), rel=1e-12)


def test_concentration_decreases():
    prof = concentration_profile([1.5, 1.9, 1.99, 1.999], 1)
    d = [v for _, v in prof]
    assert all(a > b for a, b in zip(d, d[1:]))
