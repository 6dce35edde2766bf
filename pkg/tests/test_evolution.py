import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinkcollide import evolution as ev
from kinkcollide import profiles as pr
from kinkcollide.errors import InstabilityError, InvalidArgument

S = np.sqrt(2.0)


def periodic_x(L, N):
    return np.linspace(-L, L, N, endpoint=False)


def kink_state(v, N=2048, L=60.0, t=0.0):
    x = periodic_x(L, N)
    phi, pi = ev.boosted_kink(x, t, v)
    return ev.FieldState.from_arrays(t, x, phi, pi)


def test_spectral_derivatives_are_exact_for_trig():
    x = periodic_x(np.pi, 64)
    g = ev.SpectralGrid(x)
    u = np.sin(3 * x)
    assert np.max(np.abs(g.dx(u) - 3 * np.cos(3 * x))) < 1e-12
    assert np.max(np.abs(g.dxx(u) + 9 * u)) < 1e-11
    with pytest.raises(InvalidArgument):
        ev.SpectralGrid(np.array([0.0, 1.0, 3.0]))


def test_background_derivatives():
    bg = ev.Background(-1.0, 1.0, 2.0)
    x = np.linspace(-5, 5, 101)
    h = 1e-5
    assert np.allclose(bg.dx(x), (bg.values(x + h) - bg.values(x - h)) / (2 * h), atol=1e-9)
    assert np.allclose(bg.dxx(x), (bg.dx(x + h) - bg.dx(x - h)) / (2 * h), atol=1e-9)


@settings(deadline=None, max_examples=10)
@given(st.floats(0.0, 0.6))
def test_boosted_kink_energy_and_momentum(v):
    s = kink_state(v)
    g = 1 / np.sqrt(1 - v * v)
    assert ev.energy(s) == pytest.approx(pr.KINK_NORM_SQ * g, rel=1e-10)
    assert ev.momentum(s) == pytest.approx(pr.KINK_NORM_SQ * g * v, rel=1e-10, abs=1e-14)


def test_boosted_kink_is_reproduced():
    v = 0.3
    s = kink_state(v)
    traj = ev.evolve(s, 10.0, 0.0025)
    phi, pi = ev.boosted_kink(s.x, 10.0, v)
    f = traj.final
    assert f.t == pytest.approx(10.0)
    assert ev.h1l2_distance(f, phi, pi) < 1e-6
    assert traj.energy_drift() < 1e-8


def test_time_reversal():
    s = kink_state(0.4, N=1024)
    fwd = ev.evolve(s, 5.0, 0.01).final
    back = ev.evolve(ev.FieldState(fwd.t, fwd.phi, fwd.pi.__class__(fwd.x, -fwd.pi.values)), 5.0, 0.01).final
    assert np.max(np.abs(back.phi.values - s.phi.values)) < 1e-8
    assert np.max(np.abs(back.pi.values + s.pi.values)) < 1e-8


def test_negative_time_runs_backward():
    s = kink_state(0.2, N=1024)
    traj = ev.evolve(s, -4.0, 0.01)
    phi, pi = ev.boosted_kink(s.x, -4.0, 0.2)
    assert traj.final.t == pytest.approx(-4.0)
    assert ev.h1l2_distance(traj.final, phi, pi) < 1e-6


def test_snapshots_are_recorded():
    s = kink_state(0.2, N=512)
    traj = ev.evolve(s, 1.0, 0.01, snap_times=[0.0, 0.5, 5.0])
    assert [round(x.t, 10) for x in traj.snapshots] == [0.0, 0.5, 1.0]


def test_invalid_steps_are_rejected():
    s = kink_state(0.2, N=512)
    with pytest.raises(InvalidArgument):
        ev.evolve(s, 1.0, 1.0)
    with pytest.raises(InvalidArgument):
        ev.evolve(s, 1.0, -0.01)
    x = s.x
    bad = ev.FieldState.from_arrays(0.0, x, np.sin(x), np.zeros_like(x))
    with pytest.raises(InvalidArgument):
        ev.evolve(bad, 1.0, 0.01)


def test_blow_up_is_detected():
    x = periodic_x(20.0, 256)
    phi = 9.0 * np.exp(-x ** 2)
    s = ev.FieldState.from_arrays(0.0, x, phi, np.zeros_like(x))
    with pytest.raises(InstabilityError):
        ev.evolve(s, 5.0, 0.01, monitor_every=1)


@pytest.mark.parametrize("shift", [-1.3, 0.0, 2.7])
def test_asymptotic_fit_recovers_shift(shift):
    x = periodic_x(80.0, 2048)
    t, v = 30.0, 0.1
    phi, pi = ev.two_kink_template(x, t, v, shift)
    s = ev.FieldState.from_arrays(t, x, phi, pi)
    got, dist = ev.asymptotic_fit(s, v)
    assert got == pytest.approx(shift, abs=1e-6)
    assert dist < 1e-6
