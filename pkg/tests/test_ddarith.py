import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp

from degenctrl.ddarith import DD, dd_exp, dd_ldlt_solve, dd_matmul, two_prod, two_sum

finite = st.floats(min_value=-1e100, max_value=1e100, allow_nan=False, allow_infinity=False)


def exact(d):
    with mp.workdps(60):
        return mp.mpf(float(d.hi)) + mp.mpf(float(d.lo))


@given(finite, finite)
def test_two_sum_is_error_free(a, b):
    s, e = two_sum(a, b)
    with mp.workdps(2200):
        assert mp.mpf(s) + mp.mpf(e) == mp.mpf(a) + mp.mpf(b)


scaled = st.floats(min_value=1.0, max_value=2.0).flatmap(
    lambda m: st.integers(-300, 300).map(lambda k: m * 2.0 ** k)) | st.just(0.0)


@given(scaled, scaled)
def test_two_prod_is_error_free(a, b):
    p, e = two_prod(a, b)
    with mp.workdps(2200):
        assert mp.mpf(p) + mp.mpf(e) == mp.mpf(a) * mp.mpf(b)


def test_one_third_to_double_double_accuracy():
    x = DD(1.0) / DD(3.0)
    with mp.workdps(60):
        assert abs(exact(x) - mp.mpf(1) / 3) < mp.mpf(10) ** -31


@given(st.floats(-650, 0))
def test_dd_exp_matches_mpmath(x):
    e = dd_exp(DD(x))
    with mp.workdps(60):
        ref = mp.exp(mp.mpf(x))
        assert abs(exact(e) - ref) <= mp.mpf(10) ** -28 * ref


def test_roundtrip_through_mpmath():
    with mp.workdps(50):
        vals = [mp.pi, -mp.e, mp.mpf(1) / 7]
        d = DD.from_mp(vals)
        back = d.to_mp()
        for v, w in zip(vals, back):
            assert abs(v - w) < mp.mpf(10) ** -31


def test_sum_and_matmul():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(4, 5))
    b = rng.normal(size=(5, 3))
    got = dd_matmul(DD(a), DD(b))
    np.testing.assert_allclose(got.hi, a @ b, rtol=1e-13, atol=1e-14)
    s = DD(np.array([1.0, 1e-20, -1.0])).sum()
    assert float(s.hi) == pytest.approx(1e-20, rel=1e-12)


def test_ldlt_solves_hilbert_system_beyond_double():
    n = 9
    i = np.arange(n)
    h = DD(1.0) / DD((i[:, None] + i[None, :] + 1).astype(float))
    rhs = DD(np.eye(n))
    x = dd_ldlt_solve(h, rhs)
    with mp.workdps(60):
        H = mp.matrix(n, n)
        for r in range(n):
            for c in range(n):
                H[r, c] = exact(h[r, c])
        X = mp.matrix(n, n)
        for r in range(n):
            for c in range(n):
                X[r, c] = exact(x[r, c])
        R = H * X - mp.eye(n)
        assert max(abs(v) for v in R) < 1e-17


def test_ldlt_rejects_indefinite():
    a = DD(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(np.linalg.LinAlgError):
        dd_ldlt_solve(a, DD(np.eye(2)))
