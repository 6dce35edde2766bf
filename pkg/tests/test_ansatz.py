import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinkcollide import ansatz as az
from kinkcollide import modulation as md
from kinkcollide import profiles as pr
from kinkcollide.errors import InterpolationError, InvalidArgument
from kinkcollide.grid import BoundaryPollutionWarning, GridField

S = np.sqrt(2.0)
XS = np.linspace(-30.0, 30.0, 601)


@pytest.fixture(scope="module")
def base():
    return az.base_spec(0.1)


def test_phi_is_odd_in_x_and_even_in_t(spec_v01):
    for t in (0.0, 7.3, -21.0):
        phi, phit, phitt, phixx = az.evaluate_fields(spec_v01, t, XS)
        assert np.max(np.abs(phi + phi[::-1])) < 1e-14
    a = az.evaluate_fields(spec_v01, 5.0, XS)[0]
    b = az.evaluate_fields(spec_v01, -5.0, XS)[0]
    assert np.max(np.abs(a - b)) < 1e-12


def test_phi_tends_to_vacua(spec_v01):
    phi = az.evaluate_fields(spec_v01, 0.0, np.array([-100.0, 100.0]))[0]
    assert phi == pytest.approx([-1.0, 1.0], abs=1e-12)


@settings(deadline=None, max_examples=15)
@given(st.floats(-60, 60))
def test_time_derivatives_match_differences(t):
    spec = az.build_ansatz(0.1, samples=513)
    h = 1e-3
    p = lambda s: az.evaluate_fields(spec, s, XS)
    phi_p, phi_m, (phi, phit, phitt, _) = p(t + h)[0], p(t - h)[0], p(t)
    assert np.max(np.abs((phi_p - phi_m) / (2 * h) - phit)) < 1e-6
    assert np.max(np.abs((phi_p - 2 * phi + phi_m) / h ** 2 - phitt)) < 1e-4


def test_space_derivative_matches_differences(spec_v01):
    h = 1e-3
    x = XS
    f = lambda y: az.evaluate_fields(spec_v01, 3.0, y)[0]
    fd = (f(x + h) - 2 * f(x) + f(x - h)) / h ** 2
    assert np.max(np.abs(fd - az.evaluate_fields(spec_v01, 3.0, x)[3])) < 1e-4


def test_unmodulated_pair_at_large_separation(base):
    # far from the collision the ansatz is a superposition of contracted kinks
    v = 0.1
    t = -base.t_max
    phi = az.evaluate_fields(base, t, XS * 5)[0]
    fr = base.frame
    ref = pr.H(fr.w(t, XS * 5)) - pr.H(fr.w(t, -XS * 5))
    assert np.max(np.abs(phi - ref)) < 10 * md.exp_minus_d(v, t)


def test_frame_inverse_and_derivatives(spec_v01):
    fr = spec_v01.frame
    t = 4.0
    w = np.linspace(-5, 5, 11)
    assert np.allclose(fr.w(t, fr.x_of_w(t, w)), w, atol=1e-13)
    h = 1e-4
    x = fr.x_of_w(t, w)
    wt_fd = (fr.w(t + h, x) - fr.w(t - h, x)) / (2 * h)
    wtt_fd = (fr.w(t + h, x) - 2 * fr.w(t, x) + fr.w(t - h, x)) / h ** 2
    wt, wtt = fr.w_derivatives(t, w)
    assert np.allclose(wt, wt_fd, atol=1e-8)
    assert np.allclose(wtt, wtt_fd, atol=1e-5)
    g1_fd = (fr.gamma(t + h) - fr.gamma(t - h)) / (2 * h)
    assert fr.gamma(t, 1) == pytest.approx(g1_fd, abs=1e-10)


@settings(deadline=None, max_examples=30)
@given(st.floats(-50, 50), st.floats(0.05, 2.0))
def test_cutoff_is_a_partition_of_unity(x, width):
    assert az.cutoff(x, width) + az.cutoff(-x, width) == pytest.approx(1.0, abs=1e-15)


def test_sobolev_norm_l2_and_parseval():
    x = np.linspace(-40, 40, 4096, endpoint=False)
    f = GridField(x, np.exp(-x ** 2))
    assert az.sobolev_norm(f, 0) == pytest.approx(f.l2(), rel=1e-12)
    # ||f||_{H1}^2 = ||f||^2 + ||f'||^2 for f = e^{-x^2}: ||f'||^2 = sqrt(pi/2)
    assert az.sobolev_norm(f, 1) ** 2 == pytest.approx(np.sqrt(np.pi / 2) * 2, rel=1e-10)


@settings(deadline=None, max_examples=20)
@given(st.floats(0, 3), st.floats(0, 3))
def test_sobolev_norm_is_monotone_in_s(s1, s2):
    x = np.linspace(-40, 40, 2048, endpoint=False)
    f = GridField(x, np.exp(-x ** 2) * np.cos(3 * x))
    a, b = sorted((s1, s2))
    assert az.sobolev_norm(f, a) <= az.sobolev_norm(f, b) * (1 + 1e-12)


def test_sobolev_norm_validation():
    x = np.linspace(-5, 5, 64)
    with pytest.raises(InvalidArgument):
        az.sobolev_norm(GridField(x, np.ones_like(x)), -1)
    with pytest.raises(InvalidArgument):
        az.sobolev_norm(np.ones(4), 0)
    with pytest.warns(BoundaryPollutionWarning):
        az.sobolev_norm(GridField(x, np.ones_like(x)), 0)


def test_residual_decays_at_grid_ends(spec_v01):
    lam = az.lambda_residual(spec_v01, 0.0)
    assert lam.is_padded(1e-10)


def test_modulation_reduces_projection(spec_v01):
    mod = abs(az.kink_projection(spec_v01, 0.0))
    unmod = abs(az.kink_projection(spec_v01.unmodulated(), 0.0))
    assert mod < unmod / 10


def test_projection_on_spec_grid_matches_adapted_grid(spec_v01):
    t = 2.0
    a = az.project_on_kink(az.lambda_residual(spec_v01, t), spec_v01.frame, t)
    b = az.kink_projection(spec_v01, t)
    assert a == pytest.approx(b, rel=1e-3)


def test_spec_serialization_round_trip(spec_v01):
    text = spec_v01.dumps()
    data = json.loads(text)
    assert data["schema_version"] == az.SCHEMA_VERSION
    back = az.AnsatzSpec.loads(text)
    for t in (0.0, 12.5):
        assert np.array_equal(az.evaluate_fields(back, t, XS)[0], az.evaluate_fields(spec_v01, t, XS)[0])
    data["schema_version"] = 99
    with pytest.raises(InvalidArgument):
        az.AnsatzSpec.from_dict(data)


def test_spec_validation():
    with pytest.raises(InvalidArgument):
        az.AnsatzSpec(0.1, k=1)
    with pytest.raises(InvalidArgument):
        az.AnsatzSpec(1.5)
    with pytest.raises(InvalidArgument):
        az.raise_order(az.base_spec(0.1))


def test_default_route():
    assert az.default_route(az.base_spec(0.1)) == "closed-form"


def test_correction_field_range():
    t = np.linspace(-1, 1, 9)
    w = np.linspace(-5, 5, 41)
    cf = az.CorrectionField(t, w, np.outer(np.ones_like(t), np.exp(-w ** 2)))
    out = cf.evaluate(0.3, np.array([0.0, 10.0]))
    assert out["C"][0] == pytest.approx(1.0, abs=1e-3)
    assert out["C"][1] == 0.0
    with pytest.raises(InterpolationError):
        cf.profiles(2.0)
    back = az.CorrectionField.from_dict(cf.to_dict())
    assert np.array_equal(back.values, cf.values)


def test_time_shift_relations(spec_v01):
    e_v, e_vk, e_r = az.compute_time_shift(spec_v01)
    v = spec_v01.v
    assert e_v == pytest.approx(-e_vk / (2 * v))
    assert e_r == pytest.approx(-2 * spec_v01.modulations[0].limit_r)
    assert e_vk - e_r == pytest.approx(np.log(8 / v ** 2) / S)


def test_separation_offset_limit(spec_v01):
    v = spec_v01.v
    lim = az.separation_offset(spec_v01)
    assert lim == pytest.approx(az.compute_time_shift(spec_v01)[1] - np.log(4) / S, abs=1e-12)
    assert az.separation_offset(spec_v01, 30 / v) == pytest.approx(lim, abs=1e-9)


def test_boosted_pair_template():
    x = np.linspace(-50, 50, 2001)
    phi, phit = az.boosted_kink_pair(0.2, 30.0, x, 1.0)
    assert phi[0] == pytest.approx(-1.0) and phi[-1] == pytest.approx(1.0)
    h = 1e-5
    fd = (az.boosted_kink_pair(0.2, 30.0 + h, x, 1.0)[0] - az.boosted_kink_pair(0.2, 30.0 - h, x, 1.0)[0]) / (2 * h)
    assert np.max(np.abs(fd - phit)) < 1e-8
