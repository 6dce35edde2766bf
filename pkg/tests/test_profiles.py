import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kinkcollide import profiles as pr
from kinkcollide.errors import InvalidArgument

S = np.sqrt(2.0)
xs = st.floats(min_value=-25.0, max_value=25.0, allow_nan=False)


def fd(f, x, h=1e-4):
    return (f(x + h) - f(x - h)) / (2 * h)


def test_kink_center_and_limits():
    assert pr.H(0.0) == pytest.approx(1 / S, abs=1e-15)
    assert pr.H(-60.0) == pytest.approx(0.0, abs=1e-30)
    assert pr.H(60.0) == pytest.approx(1.0, abs=1e-15)


def test_kink_closed_form():
    x = np.linspace(-10, 10, 201)
    z = np.exp(S * x)
    assert np.max(np.abs(pr.H(x) - z / np.sqrt(1 + z * z))) < 1e-14


def mp_kink(x):
    z = mp.e ** (mp.sqrt(2) * mp.mpf(x))
    return z / mp.sqrt(1 + z * z)


@given(xs)
def test_bogomolny_first_order_equation(x):
    with mp.workdps(50):
        h = mp_kink(x)
        ref = float(mp.sqrt(2 * h ** 2 * (1 - h ** 2) ** 2))
    assert pr.Hd(x) == pytest.approx(ref, rel=1e-12, abs=1e-300)


@given(xs)
def test_static_equation(x):
    assert pr.Hdd(x) == pytest.approx(pr.dU(pr.H(x)), rel=1e-9, abs=1e-14)


@given(st.floats(-8, 8), st.integers(0, 3))
def test_kink_derivatives_match_differences(x, k):
    f = lambda y: pr.kink_eval(y, k)
    assert pr.kink_eval(x, k + 1) == pytest.approx(fd(f, x), rel=1e-6, abs=1e-6)


@given(st.floats(-8, 8), st.integers(0, 4))
def test_left_kink_is_reflection(x, k):
    f = lambda y: -pr.H(-y)
    if k == 0:
        assert pr.kink_eval(x, 0, "left") == pytest.approx(f(x), abs=1e-15)
    else:
        g = lambda y: pr.kink_eval(y, k - 1, "left")
        assert pr.kink_eval(x, k, "left") == pytest.approx(fd(g, x), rel=1e-6, abs=1e-6)


def test_kink_eval_rejects_bad_arguments():
    with pytest.raises(InvalidArgument):
        pr.kink_eval(0.0, 5)
    with pytest.raises(InvalidArgument):
        pr.kink_eval(0.0, 1, "middle")
    with pytest.raises(InvalidArgument):
        pr.potential(0.3, 7)


@given(st.floats(-1.5, 1.5), st.integers(1, 6))
def test_potential_derivatives(phi, k):
    poly = np.polynomial.Polynomial([0, 0, 1, 0, -2, 0, 1]).deriv(k)
    assert pr.potential(phi, k) == pytest.approx(poly(phi), rel=1e-12, abs=1e-12)


@given(st.floats(-1.5, 1.5))
def test_named_derivatives_agree(phi):
    assert pr.dU(phi) == pytest.approx(pr.potential(phi, 1), abs=1e-12)
    assert pr.d2U(phi) == pytest.approx(pr.potential(phi, 2), abs=1e-12)
    assert pr.d3U(phi) == pytest.approx(pr.potential(phi, 3), abs=1e-12)


def test_extreme_arguments_stay_finite():
    x = np.array([-1e6, -500.0, 500.0, 1e6])
    for k in range(5):
        assert np.all(np.isfinite(pr.kink_eval(x, k)))
    assert np.all(np.isfinite(pr.g_special_eval(x)))


def test_norm_and_interaction_constant():
    assert abs(pr.kink_norm_sq() - 1 / (2 * S)) < 1e-12
    assert abs(pr.interaction_constant() - 4.0) < 1e-12


def test_g_orthogonal_to_kernel():
    from scipy.integrate import quad
    val, _ = quad(lambda x: pr.g_special_eval(x) * pr.Hd(x), -40, 40, limit=400, epsabs=1e-14)
    assert abs(val) < 1e-10
    assert pr.compute_k1() == pytest.approx(-0.7725887222, abs=1e-9)


def test_g_equation():
    x = np.linspace(-20, 20, 2001)
    lhs = -pr.g_special_eval(x, 2) + pr.d2U(pr.H(x)) * pr.g_special_eval(x)
    assert np.max(np.abs(lhs - pr.g_rhs(x))) < 1e-10


@given(st.floats(-10, 10), st.integers(0, 1))
def test_g_derivatives_match_differences(x, k):
    f = lambda y: pr.g_special_eval(y, k)
    assert pr.g_special_eval(x, k + 1) == pytest.approx(fd(f, x), rel=1e-6, abs=1e-6)


@given(st.floats(-10, 10))
def test_g_rhs_direct_formula(x):
    with mp.workdps(50):
        h = mp_kink(x)
        hd = mp.sqrt(2) * h * (1 - h ** 2)
        ref = float((-24 * h ** 2 + 30 * h ** 4) * mp.e ** (-mp.sqrt(2) * mp.mpf(x)) + 8 * mp.sqrt(2) * hd)
    assert pr.g_rhs(x) == pytest.approx(ref, rel=1e-11, abs=1e-300)


@given(st.floats(-10, 10))
def test_algebraic_profiles(x):
    z = np.exp(S * x)
    h = pr.H(x)
    assert pr.m_profile(x) == pytest.approx(z / (1 + z * z), rel=1e-12)
    assert pr.n_profile(x) == pytest.approx(h ** 3 / np.sqrt(1 + z * z), rel=1e-12)
    assert pr.v_profile(x) == pytest.approx(h / (1 + np.sqrt(1 + z * z)), rel=1e-12)
    assert pr.kink_complement(x) == pytest.approx(1 - h * h, rel=1e-10, abs=1e-15)


def test_special_profile_wrapper():
    g = pr.SpecialProfile("G")
    assert g(0.3) == pytest.approx(pr.g_special_eval(0.3))
    with pytest.raises(InvalidArgument):
        pr.SpecialProfile("Q")
    with pytest.raises(InvalidArgument):
        pr.SpecialProfile("M")(0.0, deriv=1)
