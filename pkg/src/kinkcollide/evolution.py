"""Time integration of phi_tt - phi_xx + U'(phi) = 0 on a periodic grid.

The field tends to (possibly different) vacua at the two ends, so the solver
evolves psi = phi - B with a smooth step B that equals the end values to
machine precision near the boundary; psi is then periodic and the Laplacian
is taken spectrally.  Time stepping is kick-drift-kick leapfrog.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import profiles as pr
from .errors import InstabilityError, InvalidArgument, NumericFailure
from .grid import GridField

BLOWUP = 10.0
STEP_WIDTH = 5.0
EDGE_POINTS = 8


@dataclass(frozen=True)
class FieldState:
    t: float
    phi: GridField
    pi: GridField

    @property
    def x(self):
        return self.phi.x

    @classmethod
    def from_arrays(cls, t, x, phi, pi):
        x = np.asarray(x, dtype=float)
        return cls(float(t), GridField(x, np.asarray(phi, dtype=float)), GridField(x, np.asarray(pi, dtype=float)))


@dataclass(frozen=True)
class Background:
    """B(x) = a + (b - a)(1 + tanh(x / width)) / 2."""

    left: float
    right: float
    width: float = STEP_WIDTH

    def values(self, x):
        return self.left + (self.right - self.left) * 0.5 * (1.0 + np.tanh(x / self.width))

    def dx(self, x):
        s = 1.0 / np.cosh(x / self.width) ** 2
        return (self.right - self.left) * 0.5 * s / self.width

    def dxx(self, x):
        th = np.tanh(x / self.width)
        s = 1.0 / np.cosh(x / self.width) ** 2
        return -(self.right - self.left) * s * th / self.width ** 2

    @classmethod
    def for_field(cls, phi, width=STEP_WIDTH):
        return cls(float(phi.values[0]), float(phi.values[-1]), width)


class SpectralGrid:
    """Periodic grid on [x0, x0 + N h) with FFT derivatives."""

    def __init__(self, x):
        x = np.asarray(x, dtype=float)
        h = x[1] - x[0]
        if not np.allclose(np.diff(x), h, rtol=1e-10, atol=0):
            raise InvalidArgument("grid must be uniform")
        self.x = x
        self.h = float(h)
        self.N = len(x)
        self.k = 2.0 * np.pi * np.fft.rfftfreq(self.N, d=self.h)

    def dx(self, u):
        return np.fft.irfft(1j * self.k * np.fft.rfft(u), n=self.N)

    def dxx(self, u):
        return np.fft.irfft(-self.k ** 2 * np.fft.rfft(u), n=self.N)


def _derivative(phi_values, grid, bg):
    return grid.dx(phi_values - bg.values(grid.x)) + bg.dx(grid.x)


def energy(state, bg=None):
    """Integral of pi^2/2 + phi_x^2/2 + U(phi) (periodic trapezoid rule)."""
    grid = SpectralGrid(state.x)
    bg = bg or Background.for_field(state.phi)
    phi = state.phi.values
    px = _derivative(phi, grid, bg)
    dens = 0.5 * state.pi.values ** 2 + 0.5 * px ** 2 + pr.potential(phi)
    return float(grid.h * np.sum(dens))


def momentum(state, bg=None):
    """Integral of -pi phi_x."""
    grid = SpectralGrid(state.x)
    bg = bg or Background.for_field(state.phi)
    px = _derivative(state.phi.values, grid, bg)
    return float(-grid.h * np.sum(state.pi.values * px))


@dataclass
class Trajectory:
    snapshots: list
    times: np.ndarray
    energies: np.ndarray
    momenta: np.ndarray

    @property
    def final(self):
        return self.snapshots[-1]

    def energy_drift(self):
        e0 = self.energies[0]
        return float(np.max(np.abs(self.energies - e0)) / abs(e0)) if e0 != 0 else float(np.max(np.abs(self.energies)))


def evolve(initial, T, dt, snap_times=None, monitor_every=10, width=STEP_WIDTH):
    """Leapfrog (kick-drift-kick) from ``initial`` for a time T (negative T runs backward).

    Returns a Trajectory with snapshots at ``snap_times`` (absolute times,
    rounded to the nearest step) plus the final state, and the energy and
    momentum every ``monitor_every`` steps.
    """
    grid = SpectralGrid(initial.x)
    dt = float(dt)
    if dt <= 0:
        raise InvalidArgument("time step must be positive")
    if dt > 0.5 * grid.h:
        raise InvalidArgument(f"time step {dt} violates the CFL bound 0.5 h = {0.5 * grid.h}")
    n = int(round(abs(T) / dt))
    step = np.sign(T) * dt if n else 0.0
    bg = Background.for_field(initial.phi, width)
    B = bg.values(grid.x)
    Bxx = bg.dxx(grid.x)
    psi = initial.phi.values - B
    pi = initial.pi.values.copy()
    edge = np.r_[0:EDGE_POINTS, -EDGE_POINTS:0]
    if max(np.max(np.abs(psi[edge])), np.max(np.abs(pi[edge]))) > 1e-6:
        raise InvalidArgument("initial field does not reach constant values at the grid ends")

    def accel(p):
        return grid.dxx(p) + Bxx - pr.dU(p + B)

    def state_at(i, p, q):
        return FieldState.from_arrays(initial.t + i * step, grid.x, p + B, q)

    snap_idx = set()
    if snap_times is not None:
        for ts in snap_times:
            i = int(round((ts - initial.t) / step)) if step else 0
            if 0 <= i <= n:
                snap_idx.add(i)
    snaps, times, energies, momenta = [], [], [], []

    def record(i, p, q):
        s = state_at(i, p, q)
        times.append(s.t)
        energies.append(energy(s, bg))
        momenta.append(momentum(s, bg))
        return s

    record(0, psi, pi)
    if 0 in snap_idx:
        snaps.append(state_at(0, psi, pi))
    a = accel(psi)
    for i in range(1, n + 1):
        pi += 0.5 * step * a
        psi += step * pi
        a = accel(psi)
        pi += 0.5 * step * a
        if i % monitor_every == 0 or i == n:
            if not np.all(np.isfinite(psi)) or np.max(np.abs(psi + B)) > BLOWUP:
                raise InstabilityError(f"field blew up at t = {initial.t + i * step:.4g}")
            record(i, psi, pi)
        if i in snap_idx and i != n:
            snaps.append(state_at(i, psi, pi))
    snaps.append(state_at(n, psi, pi))
    return Trajectory(snaps, np.array(times), np.array(energies), np.array(momenta))


def boosted_kink(x, t, v, x0=0.0):
    """Exact traveling kink H(gamma (x - x0 - v t)) and its time derivative."""
    g = 1.0 / np.sqrt(1.0 - v * v)
    z = g * (np.asarray(x, dtype=float) - x0 - v * t)
    return pr.H(z), -v * g * pr.Hd(z)


def two_kink_template(x, t, v, shift=0.0):
    """Kinks moving apart at speed v with centers at +-(v t + shift/2)."""
    x = np.asarray(x, dtype=float)
    g = 1.0 / np.sqrt(1.0 - v * v)
    c = v * abs(t) + 0.5 * shift
    a, b = g * (x - c), g * (-x - c)
    phi = pr.H(a) - pr.H(b)
    sgn = np.sign(t) if t != 0 else 1.0
    pi = -sgn * v * g * (pr.Hd(a) - pr.Hd(b))
    return phi, pi


def h1l2_distance(state, phi, pi):
    """||phi_state - phi||_{H^1} + ||pi_state - pi||_{L^2} on the state grid."""
    grid = SpectralGrid(state.x)
    e = state.phi.values - phi
    ex = grid.dx(e)
    ep = state.pi.values - pi
    return float(np.sqrt(grid.h * np.sum(e * e + ex * ex)) + np.sqrt(grid.h * np.sum(ep * ep)))


def asymptotic_fit(state, v, bracket=(-20.0, 20.0), xtol=1e-8, scan_step=0.25):
    """Best scalar shift of the two-kink template at the state's time.

    Returns (shift, distance).  The separation of the template is
    2 v |t| + shift.  A coarse scan picks the basin, a bounded scalar
    minimization refines it.
    """
    lo, hi = bracket

    def cost(s):
        phi, pi = two_kink_template(state.x, state.t, v, s)
        return h1l2_distance(state, phi, pi)

    scan = np.arange(lo, hi + 0.5 * scan_step, scan_step)
    best = scan[int(np.argmin([cost(s) for s in scan]))]
    a, b = max(lo, best - scan_step), min(hi, best + scan_step)
    res = minimize_scalar(cost, bounds=(a, b), method="bounded", options={"xatol": xtol})
    if not res.success:
        raise NumericFailure(f"shift fit did not converge: {res.message}")
    return float(res.x), float(res.fun)
