import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinkcollide import profiles as pr
from kinkcollide import series_algebra as sa
from kinkcollide.errors import AlgebraError, UndefinedValuation

S = np.sqrt(2.0)
X = np.linspace(-12.0, 12.0, 241)
PRIMS = ["H", "Hd", "Hdd", "P", "G", "M", "N", "V"]


@pytest.mark.parametrize("name", PRIMS)
def test_primitive_elements_match_closed_forms(name):
    el = sa.PolyExpElement.from_expr(sa.Prim(name))
    direct = sa.Prim(name)(X)
    assert np.max(np.abs(el(X) - direct)) <= 1e-12 * max(1.0, np.max(np.abs(direct)))


@pytest.mark.parametrize("name", ["H", "Hd", "M", "N", "V"])
def test_series_part_converges_near_minus_infinity(name):
    el = sa.PolyExpElement.from_expr(sa.Prim(name))
    x = np.linspace(-20.0, np.log(0.5) / S, 50)
    assert np.max(np.abs(el.series_eval(x) - sa.Prim(name)(x))) < 1e-13


@settings(deadline=None, max_examples=30)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3), st.integers(0, 2))
def test_canonical_round_trip(c, n):
    expr = c[0] * sa.Prim("M") + c[1] * sa.Mono(n) * sa.Prim("Hd") + c[2] * sa.Prim("N") * sa.Prim("H") ** 2
    el = sa.PolyExpElement.from_expr(expr)
    direct = expr(X)
    assert np.max(np.abs(el(X) - direct)) <= 1e-12 * max(1.0, np.max(np.abs(direct)))


@settings(deadline=None, max_examples=30)
@given(st.floats(-15, 15))
def test_cauchy_product_evaluates_to_product(x):
    h = sa.kink()
    m = sa.PolyExpElement.from_expr(sa.Prim("M"))
    prod = sa.series_product(h, m)
    assert float(prod(np.array([x]))[0]) == pytest.approx(pr.H(x) * pr.m_profile(x), rel=1e-11, abs=1e-300)


def test_reflection_swaps_sides():
    el = sa.kink().reflect()
    assert el.side == "minus"
    assert np.max(np.abs(el(X) - pr.H(-X))) < 1e-13
    lk = sa.left_kink()
    assert lk.side == "minus"
    assert np.max(np.abs(lk(X) + pr.H(-X))) < 1e-13


def test_valuations():
    assert sa.val_plus(sa.kink()) == 1
    assert sa.val_plus(sa.PolyExpElement.from_expr(sa.Prim("N"))) == 3
    assert sa.val_minus(sa.left_kink()) == 1
    with pytest.raises(AlgebraError):
        sa.val_plus(sa.left_kink())
    with pytest.raises(UndefinedValuation):
        sa.val_plus(sa.PolyExpElement.from_expr(sa.Mono(1) * sa.Prim("H")))


def test_mixed_sides_rejected():
    with pytest.raises(AlgebraError):
        sa.kink() + sa.left_kink()
    with pytest.raises(AlgebraError):
        sa.natural_side(sa.Prim("H") + sa.Reflect(sa.Prim("H")))


@pytest.mark.parametrize("text,fn", [
    ("24*M - 30*N", lambda x: 24 * pr.m_profile(x) - 30 * pr.n_profile(x)),
    ("-H(-x)", lambda x: -pr.H(-x)),
    ("x**2*Hd + 0.5*V", lambda x: x * x * pr.Hd(x) + 0.5 * pr.v_profile(x)),
    ("exp(-1)*H**2", lambda x: np.exp(-S * x) * pr.H(x) ** 2),
    ("Hd/4", lambda x: pr.Hd(x) / 4),
])
def test_parse_expr(text, fn):
    assert np.max(np.abs(sa.parse_expr(text)(X) - fn(X))) < 1e-12 * max(1, np.max(np.abs(fn(X))))


@pytest.mark.parametrize("text", ["H(", "Q", "H(2*x)", "exp(0.5)", "H**-1", "x and H", "H/M"])
def test_parse_expr_rejects(text):
    with pytest.raises(AlgebraError):
        sa.parse_expr(text)


def _pair():
    return sa.kink_derivative(), sa.PolyExpElement.from_expr(sa.Reflect(sa.Prim("H")) ** 2)


def test_separation_first_exponent_is_min_valuation():
    f, g = _pair()
    res = sa.separate(f, g, M=2)
    assert res.pairs[0].d == min(sa.val_plus(f), sa.val_minus(g))
    assert res.d_values == sorted(res.d_values)


def test_separation_is_unique_under_rescaling():
    f, g = _pair()
    lam = 3.7
    a = sa.separate(f, g, M=3)
    b = sa.separate(f.scale(lam), g.scale(1 / lam), M=3)
    assert a.d_values == b.d_values
    for zeta in (4.0, 7.0):
        A, B = a.approximation(X, zeta), b.approximation(X, zeta)
        assert np.max(np.abs(A - B)) <= 1e-13 * np.max(np.abs(A))


def test_equal_valuations_cannot_be_separated():
    with pytest.raises(AlgebraError):
        sa.separate(sa.kink_derivative(), sa.left_kink(), M=1)


def test_separation_remainder_decays_at_predicted_rate():
    f, g = _pair()
    res = sa.separate(f, g, M=2)
    d = res.remainder_exponent
    sups = sa.certify_remainder(f, g, res, zetas=(3.0, 5.0))
    predicted = np.exp(S * d * 2.0)
    assert 0.5 < (sups[0] / sups[1]) / predicted < 2.0


def test_separation_exact_plus_remainder():
    f, g = _pair()
    res = sa.separate(f, g, M=2)
    zeta = 6.0
    x = np.linspace(-30, 36, 1201)
    exact = f(x - zeta) * g(x)
    assert np.max(np.abs(res.approximation(x, zeta) + res.remainder(x, zeta) - exact)) < 1e-13


def test_kink_interaction_matches_closed_form():
    terms = sa.potential_cross_terms(*sa.interaction_terms_kinks(), 1)
    res = sa.decompose_interaction(terms, M=2)
    zeta = 8.0
    x = np.linspace(-30, 38, 2001)
    diff = np.max(np.abs(res.approximation(x, zeta) - sa.l1_closed_form(x, zeta)))
    assert diff < 10 * np.exp(-3 * S * zeta)


def test_kink_interaction_remainder_ratio():
    terms = sa.potential_cross_terms(*sa.interaction_terms_kinks(), 1)
    res = sa.decompose_interaction(terms, M=2)
    assert res.remainder_exponent == 3
    r5 = sa.sup_remainder_terms(terms, res, 5.0)
    r8 = sa.sup_remainder_terms(terms, res, 8.0)
    assert 0.5 < (r5 / r8) / np.exp(S * 3 * 3.0) < 2.0


def test_second_derivative_cross_terms_separate():
    res = sa.decompose_interaction(sa.second_derivative_g_cross_terms(), M=1)
    assert len(res.pairs) > 0
    assert min(res.d_values) == 1


@settings(deadline=None, max_examples=10)
@given(st.floats(2.0, 10.0))
def test_remainder_bounded_in_sobolev_norm(zeta):
    # the remainder, scaled by its exponential rate, stays O(1) with its derivatives
    f, g = _pair()
    res = sa.separate(f, g, M=2)
    x = np.linspace(-40, zeta + 40, 4001)
    r = res.remainder(x, zeta) * np.exp(S * res.remainder_exponent * zeta)
    h = x[1] - x[0]
    norms = [np.sqrt(h * np.sum(r ** 2))]
    for _ in range(3):
        r = np.gradient(r, h)
        norms.append(np.sqrt(h * np.sum(r ** 2)))
    assert max(norms) < 50.0
