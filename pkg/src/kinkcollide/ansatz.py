"""Approximate kink-antikink solutions phi_k(v, t, x) and their residuals.

In co-moving coordinates w(t, x) = (x + rho(t)) / g(t), with
rho = -d_v/2 + sum_j r_j and g = (1 - d_v'^2/4)^{1/2}, the ansatz is

    phi_k(t, x) = P(t, w(t, x)) - P(t, w(t, -x)),
    P(t, w) = H(w) + e^{-s d_v(t)} G(w) + sum_i C_i(t, w),

where the C_i are the stored corrections added by ``raise_order``.  Every
t- and x-derivative is taken analytically through the chain rule, so the
residual

    Lambda(phi) = phi_tt - phi_xx + U'(phi)

can be evaluated pointwise on any set of x values.
"""

from dataclasses import dataclass, replace
from functools import cached_property
import json

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.special import expit

from . import modulation as md
from . import profiles as pr
from .errors import InterpolationError, InvalidArgument, NumericFailure
from .grid import GridField, uniform_grid
from .linearized_operator import OperatorGrid

SQRT2 = pr.SQRT2
SCHEMA_VERSION = 1

DEFAULT_X = (-120.0, 120.0, 8192)
W_RANGE = 40.0
W_POINTS = 4001  # correction grid in co-moving units, h = 0.02
PROJ_POINTS = 1601  # quadrature grid for projections, h = 0.05
CORRECTION_SAMPLES = 257
CUTOFF_WIDTH = 1.0 / (2.0 * SQRT2)


# -- co-moving frame -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CoMovingFrame:
    """w(t, x) = (x + rho(t)) / g(t) with rho = -d_v/2 + sum of modulations."""

    v: float
    modulations: tuple = ()

    @cached_property
    def trajectory(self):
        return md.TrajectoryParams(self.v)

    def rho(self, t, deriv=0):
        out = -0.5 * md.d_eval(self.v, t, deriv)
        for m in self.modulations:
            out = out + m(t, deriv)
        return out

    def gamma(self, t, deriv=0):
        d1, d2 = md.d_eval(self.v, t, 1), md.d_eval(self.v, t, 2)
        g = np.sqrt(1.0 - d1 * d1 / 4.0)
        if deriv == 0:
            return g
        g1 = -d1 * d2 / (4.0 * g)
        if deriv == 1:
            return g1
        d3 = md.d_eval(self.v, t, 3)
        return -(d2 * d2 + d1 * d3) / (4.0 * g) - g1 * g1 / g

    def contraction(self, t):
        """Jacobian dw/dx = (1 - d'^2/4)^{-1/2}."""
        return 1.0 / self.gamma(t)

    def w(self, t, x):
        return (np.asarray(x, dtype=float) + self.rho(t)) / self.gamma(t)

    def x_of_w(self, t, w):
        return self.gamma(t) * np.asarray(w, dtype=float) - self.rho(t)

    def w_derivatives(self, t, w):
        """(w_t, w_tt) at fixed x, expressed through w."""
        g, g1, g2 = self.gamma(t), self.gamma(t, 1), self.gamma(t, 2)
        p1, p2 = self.rho(t, 1), self.rho(t, 2)
        wt = (p1 - w * g1) / g
        wtt = (p2 - 2.0 * wt * g1 - w * g2) / g
        return wt, wtt

    def with_modulations(self, modulations):
        return CoMovingFrame(self.v, tuple(modulations))


# -- stored corrections ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class CorrectionField:
    """Samples C(t_i, w_j) of a correction added to the single-frame profile.

    Interpolated by quintic splines in t and then in w; zero outside the w
    range (the samples decay there).
    """

    t_grid: np.ndarray
    w_grid: np.ndarray
    values: np.ndarray  # shape (len(t_grid), len(w_grid))

    @cached_property
    def _t_spline(self):
        return make_interp_spline(self.t_grid, self.values, k=5, axis=0)

    def profiles(self, t):
        """(C, C_t, C_tt) on the w grid at time t."""
        if not self.t_grid[0] - 1e-9 <= t <= self.t_grid[-1] + 1e-9:
            raise InterpolationError(f"t = {t} outside the stored correction range "
                                     f"[{self.t_grid[0]}, {self.t_grid[-1]}]")
        s = self._t_spline
        return s(t), s(t, 1), s(t, 2)

    def evaluate(self, t, w):
        """Dictionary with C, C_t, C_tt, C_w, C_tw, C_ww at the points w."""
        w = np.asarray(w, dtype=float)
        c, ct, ctt = self.profiles(t)
        inside = (w >= self.w_grid[0]) & (w <= self.w_grid[-1])
        wi = w[inside]
        out = {key: np.zeros_like(w) for key in ("C", "C_t", "C_tt", "C_w", "C_tw", "C_ww")}
        sc = make_interp_spline(self.w_grid, c, k=5)
        st = make_interp_spline(self.w_grid, ct, k=5)
        stt = make_interp_spline(self.w_grid, ctt, k=5)
        out["C"][inside] = sc(wi)
        out["C_w"][inside] = sc(wi, 1)
        out["C_ww"][inside] = sc(wi, 2)
        out["C_t"][inside] = st(wi)
        out["C_tw"][inside] = st(wi, 1)
        out["C_tt"][inside] = stt(wi)
        return out

    def to_dict(self):
        return {"t_grid": self.t_grid.tolist(), "w_grid": self.w_grid.tolist(),
                "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(np.asarray(data["t_grid"], dtype=float), np.asarray(data["w_grid"], dtype=float),
                   np.asarray(data["values"], dtype=float))


# -- the ansatz ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AnsatzSpec:
    v: float
    k: int = 2
    modulations: tuple = ()
    corrections: tuple = ()
    x_grid: tuple = DEFAULT_X

    def __post_init__(self):
        md._check_v(self.v)
        if self.k < 2:
            raise InvalidArgument(f"order must be at least 2, got {self.k}")

    @cached_property
    def frame(self):
        return CoMovingFrame(self.v, tuple(self.modulations))

    @cached_property
    def x(self):
        return uniform_grid(*self.x_grid)

    @property
    def t_max(self):
        return md.TrajectoryParams(self.v).t_max

    @property
    def modulated(self):
        return len(self.modulations) > 0

    def unmodulated(self):
        """Same spec with every modulation dropped."""
        return replace(self, modulations=())

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "v": self.v,
            "k": self.k,
            "x_grid": list(self.x_grid),
            "modulations": [m.to_dict() for m in self.modulations],
            "corrections": [c.to_dict() for c in self.corrections],
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("schema_version") != SCHEMA_VERSION:
            raise InvalidArgument(f"unsupported spec schema version {data.get('schema_version')!r}")
        mods = tuple(md.ModulationSolution.from_dict(m) for m in data["modulations"])
        corr = tuple(CorrectionField.from_dict(c) for c in data["corrections"])
        xg = data.get("x_grid", DEFAULT_X)
        return cls(float(data["v"]), int(data["k"]), mods, corr, (float(xg[0]), float(xg[1]), int(xg[2])))

    def dumps(self):
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))


def _profile_parts(spec, t, w):
    """Single-frame profile P and its partial derivatives at the points w."""
    v = spec.v
    E = md.exp_minus_d(v, t)
    d1, d2 = md.d_eval(v, t, 1), md.d_eval(v, t, 2)
    E1 = -SQRT2 * d1 * E
    E2 = (2.0 * d1 * d1 - SQRT2 * d2) * E
    G0, G1, G2 = (pr.g_special_eval(w, j) for j in range(3))
    P = pr.H(w) + E * G0
    Pw = pr.Hd(w) + E * G1
    Pww = pr.Hdd(w) + E * G2
    Pt = E1 * G0
    Ptw = E1 * G1
    Ptt = E2 * G0
    for c in spec.corrections:
        cv = c.evaluate(t, w)
        P = P + cv["C"]
        Pw = Pw + cv["C_w"]
        Pww = Pww + cv["C_ww"]
        Pt = Pt + cv["C_t"]
        Ptw = Ptw + cv["C_tw"]
        Ptt = Ptt + cv["C_tt"]
    return P, Pt, Ptt, Pw, Ptw, Pww


def _frame_terms(spec, t, x):
    """phi-part Q(t, x) = P(t, w(t, x)) with Q_t, Q_tt and Q_xx."""
    fr = spec.frame
    w = fr.w(t, x)
    wt, wtt = fr.w_derivatives(t, w)
    g = fr.gamma(t)
    P, Pt, Ptt, Pw, Ptw, Pww = _profile_parts(spec, t, w)
    Q = P
    Qt = Pt + Pw * wt
    Qtt = Ptt + 2.0 * Ptw * wt + Pww * wt * wt + Pw * wtt
    Qxx = Pww / (g * g)
    return Q, Qt, Qtt, Qxx


def evaluate_fields(spec, t, x=None):
    """(phi, phi_t, phi_tt, phi_xx) at time t on the points x."""
    x = spec.x if x is None else np.asarray(x, dtype=float)
    a = _frame_terms(spec, t, x)
    b = _frame_terms(spec, t, -x)
    return tuple(p - q for p, q in zip(a, b))


def build_phi(spec, t, x=None):
    """(phi_k(t, .), d/dt phi_k(t, .)) as GridFields on the spec grid (or on x)."""
    x = spec.x if x is None else np.asarray(x, dtype=float)
    phi, phit, _, _ = evaluate_fields(spec, t, x)
    return GridField(x, phi, phit), GridField(x, phit)


def residual_values(spec, t, x):
    phi, _, phitt, phixx = evaluate_fields(spec, t, x)
    return phitt - phixx + pr.dU(phi)


def lambda_residual(spec, t, x=None):
    """Lambda(phi_k)(t, .) = phi_tt - phi_xx + U'(phi) with analytic derivatives."""
    x = spec.x if x is None else np.asarray(x, dtype=float)
    return GridField(x, residual_values(spec, t, x))


def project_on_kink(residual, frame, t):
    """<Lambda, H'(w(t, .))> by the trapezoid rule on the residual grid."""
    w = frame.w(t, residual.x)
    return residual.inner(pr.Hd(w))


def _projection_grid(n=PROJ_POINTS):
    return np.linspace(-W_RANGE, W_RANGE, n)


def kink_projection(spec, t, n=PROJ_POINTS):
    """<Lambda(phi_k)(t, .), H'(w(t, .))> on a grid adapted to the right kink."""
    fr = spec.frame
    w = _projection_grid(n)
    x = fr.x_of_w(t, w)
    lam = residual_values(spec, t, x)
    hw = w[1] - w[0]
    return float(fr.gamma(t) * hw * np.dot(lam, pr.Hd(w)))


def forcing_samples(spec, t_grid, n=PROJ_POINTS, mirror=True):
    """F(t) = -<Lambda(phi)(t, .), H'(w(t, .))> on the time grid.

    The residual is even in t, so with ``mirror`` only t <= 0 is evaluated
    (the grid must then be symmetric).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if not mirror:
        out = np.array([-kink_projection(spec, t, n) for t in t_grid])
        if not np.all(np.isfinite(out)):
            raise NumericFailure("non-finite kink projection of the residual")
        return out
    half = len(t_grid) // 2
    out = np.empty_like(t_grid)
    for i in range(half + 1):
        out[i] = -kink_projection(spec, t_grid[i], n)
    out[half + 1:] = out[:half][::-1]
    if not np.all(np.isfinite(out)):
        raise NumericFailure("non-finite kink projection of the residual")
    return out


def sobolev_norm(f, s=0.0):
    """(sum (1 + xi^2)^s |f_hat(xi)|^2)^{1/2} scaled so that s = 0 gives the L^2 norm."""
    if s < 0:
        raise InvalidArgument(f"Sobolev index must be nonnegative, got {s}")
    if not isinstance(f, GridField):
        raise InvalidArgument("sobolev_norm expects a GridField")
    f.check_padded(what="Sobolev norm input")
    n = len(f)
    h = f.h
    fh = np.fft.rfft(f.values)
    xi = 2.0 * np.pi * np.fft.rfftfreq(n, d=h)
    weight = np.full(len(fh), 2.0)
    weight[0] = 1.0
    if n % 2 == 0:
        weight[-1] = 1.0
    total = np.sum(weight * (1.0 + xi * xi) ** s * np.abs(fh) ** 2)
    return float(np.sqrt(h * total / n))


def cutoff(x, width=CUTOFF_WIDTH):
    """Smooth step with chi(x) + chi(-x) = 1."""
    return expit(np.asarray(x, dtype=float) / width)


# -- construction ----------------------------------------------------------

def base_spec(v, x_grid=DEFAULT_X):
    """phi_{2,0}: kink pair plus the G correction, no modulation."""
    return AnsatzSpec(float(v), 2, (), (), tuple(x_grid))


def default_route(spec):
    """The k = 2 modulation uses the term-by-term forcing, later orders the projection."""
    return "closed-form" if not spec.modulations and not spec.corrections else "projection"


def modulate(spec, samples=md.DEFAULT_SAMPLES, route=None):
    """Solve for the next modulation and append it to the spec."""
    t = md.TrajectoryParams(spec.v).grid(samples)
    F = md.forcing_projection(spec, spec.v, t, route or default_route(spec))
    k = len(spec.modulations) + 2
    sol = md.solve_secular_ode(F, spec.v, pr.KINK_NORM_SQ, t, k=k)
    return replace(spec, modulations=tuple(spec.modulations) + (sol,))


def build_ansatz(v, order=2, samples=md.DEFAULT_SAMPLES, correction_samples=CORRECTION_SAMPLES,
                 x_grid=DEFAULT_X, route=None):
    """phi_k for k = order: phi_2 from the modulated kink pair, then raise_order."""
    spec = modulate(base_spec(v, x_grid), samples, route)
    while spec.k < order:
        spec = raise_order(spec, samples, correction_samples)
    return spec


_operator_cache = {}


def _correction_operator():
    key = (W_RANGE, W_POINTS)
    if key not in _operator_cache:
        _operator_cache[key] = OperatorGrid(-W_RANGE, W_RANGE, W_POINTS, order=4)
    return _operator_cache[key]


def symmetric_half(spec, t, w, width=CUTOFF_WIDTH):
    """A(w) with Lambda(t, x) = A(w(t, x)) - A(w(t, -x)): cutoff times residual."""
    x = spec.frame.x_of_w(t, w)
    return cutoff(x, width) * residual_values(spec, t, x)


def correction_profile(spec, t, width=CUTOFF_WIDTH):
    """(Gamma, R) at time t on the correction grid: Gamma is the symmetric half
    with its H' component removed, R solves L R = Gamma with R orthogonal to H'."""
    op = _correction_operator()
    A = symmetric_half(spec, t, op.x, width)
    gamma, _ = op.project(A)
    res = op.invert(gamma, check_decay=False)
    return gamma, res.values


def raise_order(spec, samples=md.DEFAULT_SAMPLES, correction_samples=CORRECTION_SAMPLES,
                width=CUTOFF_WIDTH, contamination_tol=1e-3):
    """phi_{k+1} = phi_k - [R(w(x)) - R(w(-x))] with a new modulation r_{k+1}."""
    if not spec.modulated or len(spec.modulations) != spec.k - 1:
        raise InvalidArgument("raise_order needs a spec with modulations up to its order")
    op = _correction_operator()
    t_grid = md.TrajectoryParams(spec.v).grid(correction_samples)
    half = len(t_grid) // 2
    vals = np.empty((len(t_grid), len(op.x)))
    for i in range(half + 1):
        gamma, R = correction_profile(spec, t_grid[i], width)
        edge = max(abs(gamma[0]), abs(gamma[-1]))
        if edge > contamination_tol * max(np.max(np.abs(gamma)), 1e-300):
            raise NumericFailure(f"symmetric half does not decay on the correction grid at t = {t_grid[i]:.4g} "
                                 f"(edge/peak = {edge / np.max(np.abs(gamma)):.2e})")
        vals[i] = -R
    vals[half + 1:] = vals[:half][::-1]
    corr = CorrectionField(t_grid, op.x.copy(), vals)
    raised = replace(spec, k=spec.k + 1, corrections=tuple(spec.corrections) + (corr,))
    return modulate(raised, samples)


def compute_time_shift(spec):
    """Returns (e(v), e_{v,k}, e_r) where e_r = -2 lim r and

        e_{v,k} = ln(8/v^2)/s + e_r,   e(v) = -e_{v,k} / (2v).

    The leading term uses d(t) ~ 2v|t| + ln(8/v^2)/s; the exact large-t
    offset of d is smaller by ln(4)/s, see ``separation_offset``.
    """
    v = spec.v
    lim = sum(m.limit_r for m in spec.modulations)
    e_r = -2.0 * lim
    e_vk = np.log(8.0 / v ** 2) / SQRT2 + e_r
    return float(-e_vk / (2.0 * v)), float(e_vk), float(e_r)


def separation_offset(spec, t=None):
    """Kink separation minus 2v|t| of the ansatz: d(t) - 2 sum r(t) - 2v|t|.

    With t = None the t -> inf limit ln(2/v^2)/s + e_r is returned.
    """
    v = spec.v
    if t is None:
        return float(np.log(2.0 / v ** 2) / SQRT2 - 2.0 * sum(m.limit_r for m in spec.modulations))
    r = sum(m(t) for m in spec.modulations) if spec.modulations else 0.0
    return float(md.d_eval(v, t) - 2.0 * r - 2.0 * v * abs(t))


def boosted_kink_pair(v, t, x, shift=0.0):
    """Two free kinks moving apart at speeds +-v: the t -> +inf template.

    Separation 2v t + shift; each kink is Lorentz contracted."""
    x = np.asarray(x, dtype=float)
    g = np.sqrt(1.0 - v * v)
    c = v * t + 0.5 * shift
    a, b = (x - c) / g, (-x - c) / g
    phi = pr.H(a) - pr.H(b)
    phit = -v / g * (pr.Hd(a) - pr.Hd(b))
    return phi, phit
