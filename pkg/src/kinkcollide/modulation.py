"""Collision trajectory d_v(t) and the forced linear ODE for the center shifts r_k.

The trajectory solves d'' = 16 s e^{-s d} with d'(+-inf) = +-2v:

    d_v(t) = (1/s) ln((8/v^2) cosh(s v t)^2),   s = sqrt(2).

With a = s v t the homogeneous equation r'' + 32 e^{-s d} r = 0 has the
solutions tanh(a) and a tanh(a) - 1 (Wronskian s v), and the even solution of
the forced problem is built by variation of parameters.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from . import profiles as pr
from .errors import InvalidArgument, NumericFailure

SQRT2 = pr.SQRT2
DEFAULT_SAMPLES = 4097
T_SPAN = 12.0  # T_max = T_SPAN / (s v)


def _check_v(v):
    v = float(v)
    if not 0.0 < v < 1.0:
        raise InvalidArgument(f"speed must lie in (0, 1), got {v}")
    return v


def _sech2(a):
    # sech(a)^2 = 4 e^{-2|a|} / (1 + e^{-2|a|})^2 without overflow
    e = np.exp(-2.0 * np.abs(a))
    return 4.0 * e / (1.0 + e) ** 2


def _logcosh(a):
    a = np.abs(a)
    return a + np.log1p(np.exp(-2.0 * a)) - np.log(2.0)


def d_eval(v, t, deriv=0):
    """d_v(t) or its derivative of order ``deriv`` (0..4)."""
    v = _check_v(v)
    if int(deriv) != deriv or not 0 <= deriv <= 4:
        raise InvalidArgument(f"deriv must be an integer in 0..4, got {deriv}")
    a = SQRT2 * v * np.asarray(t, dtype=float)
    if deriv == 0:
        return np.log(8.0 / v ** 2) / SQRT2 + SQRT2 * _logcosh(a)
    if deriv == 1:
        return 2.0 * v * np.tanh(a)
    s2 = _sech2(a)
    if deriv == 2:
        return 2.0 * SQRT2 * v ** 2 * s2
    if deriv == 3:
        return -8.0 * v ** 3 * s2 * np.tanh(a)
    return -8.0 * SQRT2 * v ** 4 * s2 * (3.0 * s2 - 2.0)


def exp_minus_d(v, t):
    """e^{-s d_v(t)} = (v^2/8) sech(s v t)^2."""
    v = _check_v(v)
    return v ** 2 / 8.0 * _sech2(SQRT2 * v * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class TrajectoryParams:
    v: float

    def __post_init__(self):
        _check_v(self.v)

    def d(self, t, deriv=0):
        return d_eval(self.v, t, deriv)

    def exp_minus_d(self, t):
        return exp_minus_d(self.v, t)

    def gamma(self, t):
        """Contraction factor (1 - d'^2/4)^{1/2}."""
        return np.sqrt(1.0 - self.d(t, 1) ** 2 / 4.0)

    @property
    def t_max(self):
        return T_SPAN / (SQRT2 * self.v)

    def grid(self, samples=DEFAULT_SAMPLES):
        return np.linspace(-self.t_max, self.t_max, int(samples))


@dataclass(frozen=True, eq=False)
class ModulationSolution:
    v: float
    k: int
    t_grid: np.ndarray
    r: np.ndarray
    rd: np.ndarray
    rdd: np.ndarray
    limit_r: float
    forcing: np.ndarray = field(default=None, repr=False)
    asymmetry: float = 0.0  # relative odd part of the raw forcing

    @cached_property
    def _splines(self):
        return (CubicHermiteSpline(self.t_grid, self.r, self.rd),
                CubicHermiteSpline(self.t_grid, self.rd, self.rdd),
                CubicSpline(self.t_grid, self.rdd))

    def __call__(self, t, deriv=0):
        """r, r' or r'' at arbitrary t; constant extension beyond the grid."""
        if deriv not in (0, 1, 2):
            raise InvalidArgument(f"deriv must be 0, 1 or 2, got {deriv}")
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, self.t_grid[0], self.t_grid[-1])
        out = self._splines[deriv](tc)
        if deriv == 0:
            # r tends to limit_r; beyond the grid use the limit directly
            out = np.where(np.abs(t) > self.t_grid[-1], self.limit_r, out)
        else:
            out = np.where(np.abs(t) > self.t_grid[-1], 0.0, out)
        return out if out.ndim else float(out)

    @property
    def sup_abs(self):
        return float(np.max(np.abs(self.r)))

    def evenness(self):
        return float(np.max(np.abs(self.r - self.r[::-1])))

    def ode_residual(self, normalizer=pr.KINK_NORM_SQ):
        """Relative residual of r'' + 32 e^{-sd} r - F/normalizer at interior samples.

        r'' is a sixth-order central difference of the sampled r.
        """
        if self.forcing is None:
            raise InvalidArgument("solution carries no forcing samples")
        dt = self.t_grid[1] - self.t_grid[0]
        w = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])
        r = self.r
        fd = sum(c * r[i:len(r) - 6 + i] for i, c in enumerate(w)) / dt ** 2
        t = self.t_grid[3:-3]
        res = fd + 32.0 * exp_minus_d(self.v, t) * r[3:-3] - self.forcing[3:-3] / normalizer
        scale = np.max(np.abs(self.forcing)) / normalizer
        return float(np.max(np.abs(res)) / scale) if scale > 0 else float(np.max(np.abs(res)))

    def limit_gap(self):
        """|r(T_max) - r(0.9 T_max)| relative to sup |r|."""
        i = int(np.argmin(np.abs(self.t_grid - 0.9 * self.t_grid[-1])))
        s = self.sup_abs
        return float(abs(self.r[-1] - self.r[i]) / s) if s > 0 else 0.0

    def to_dict(self):
        return {
            "v": self.v,
            "k": self.k,
            "t_grid": self.t_grid.tolist(),
            "r": self.r.tolist(),
            "rd": self.rd.tolist(),
            "rdd": self.rdd.tolist(),
            "limit_r": self.limit_r,
            "forcing": None if self.forcing is None else self.forcing.tolist(),
            "asymmetry": self.asymmetry,
        }

    @classmethod
    def from_dict(cls, data):
        arr = lambda key: np.asarray(data[key], dtype=float)
        forcing = None if data.get("forcing") is None else arr("forcing")
        return cls(float(data["v"]), int(data["k"]), arr("t_grid"), arr("r"), arr("rd"), arr("rdd"),
                   float(data["limit_r"]), forcing, float(data.get("asymmetry", 0.0)))


def zero_modulation(v, k=2, samples=DEFAULT_SAMPLES):
    t = TrajectoryParams(v).grid(samples)
    z = np.zeros_like(t)
    return ModulationSolution(float(v), int(k), t, z, z.copy(), z.copy(), 0.0, z.copy())


def homogeneous_solutions(v, t):
    """(tanh a, a tanh a - 1) and their t-derivatives, a = s v t."""
    a = SQRT2 * v * np.asarray(t, dtype=float)
    th, s2 = np.tanh(a), _sech2(a)
    y1, y2 = th, a * th - 1.0
    dy1 = SQRT2 * v * s2
    dy2 = SQRT2 * v * (th + a * s2)
    return y1, y2, dy1, dy2


def wronskian(v, t):
    y1, y2, dy1, dy2 = homogeneous_solutions(v, t)
    return y1 * dy2 - dy1 * y2


def _symmetrize(F):
    F = np.asarray(F, dtype=float)
    even = 0.5 * (F + F[::-1])
    scale = np.max(np.abs(F))
    asym = float(np.max(np.abs(F - even)) / scale) if scale > 0 else 0.0
    return even, asym


def solve_secular_ode(F, v, normalizer=pr.KINK_NORM_SQ, t_grid=None, k=2):
    """Even solution of r'' + 32 e^{-s d_v} r = F / normalizer.

    ``F`` is either a callable of t or samples on ``t_grid`` (a grid symmetric
    about 0 with an odd number of points; defaults to the standard grid).
    The forcing is symmetrized before integration and the amount of
    asymmetry is reported on the result.  Antiderivatives use the exact
    integral of the cubic spline through the integrand samples.
    """
    v = _check_v(v)
    traj = TrajectoryParams(v)
    if t_grid is None:
        n = len(F) if not callable(F) else DEFAULT_SAMPLES
        t_grid = traj.grid(n)
    t = np.asarray(t_grid, dtype=float)
    if len(t) % 2 == 0 or not np.allclose(t, -t[::-1], rtol=0, atol=1e-12 * np.max(np.abs(t))):
        raise InvalidArgument("time grid must be symmetric about 0 with an odd number of samples")
    Fs = np.asarray(F(t), dtype=float) if callable(F) else np.asarray(F, dtype=float)
    if Fs.shape != t.shape:
        raise InvalidArgument("forcing samples do not match the time grid")
    if not np.all(np.isfinite(Fs)):
        raise NumericFailure("forcing is not finite on the time grid")
    Fs, asym = _symmetrize(Fs)
    f = Fs / normalizer
    W = SQRT2 * v
    if np.max(np.abs(wronskian(v, t) - W)) > 1e-12 * max(1.0, W):
        raise NumericFailure("Wronskian check of the homogeneous pair failed")
    y1, y2, dy1, dy2 = homogeneous_solutions(v, t)
    mid = len(t) // 2
    I2 = CubicSpline(t, f * y1).antiderivative()
    I1 = CubicSpline(t, f * y2).antiderivative()
    i2 = I2(t) - I2(t[0])  # forcing is negligible below -T_max
    theta2 = i2 / W
    theta1 = -(I1(t) - I1(t[mid])) / W
    if not (np.all(np.isfinite(theta1)) and np.all(np.isfinite(theta2))):
        raise NumericFailure("forcing is not integrable on the grid")
    r = theta1 * y1 + theta2 * y2
    rd = theta1 * dy1 + theta2 * dy2
    rdd = f - 32.0 * exp_minus_d(v, t) * r
    # theta2 * y2 -> 0 and y1 -> 1 as t -> +inf
    limit_r = float(theta1[-1])
    return ModulationSolution(v, int(k), t, r, rd, rdd, limit_r, Fs, asym)


def exp_factor(v, t, m1, m2=0, m3=0, r=0.0):
    """p = g^{m3} exp(-m1 s (d + r) / g^{m2}) - e^{-m1 s d} with g = (1 - d'^2/4)^{1/2}.

    ``r`` is a ModulationSolution (evaluated at t), a number, or an array.
    """
    v = _check_v(v)
    t = np.asarray(t, dtype=float)
    rv = r(t) if isinstance(r, ModulationSolution) else np.asarray(r, dtype=float)
    d = d_eval(v, t)
    g = np.sqrt(1.0 - d_eval(v, t, 1) ** 2 / 4.0)
    base = exp_minus_d(v, t) ** m1
    if m2 == 0 and m3 == 0 and np.all(rv == 0):
        return np.zeros_like(base)
    # g^{m3} e^{-m1 s (d + r)/g^{m2}} = base * g^{m3} * exp(-m1 s [(d + r)/g^{m2} - d])
    expo = -m1 * SQRT2 * ((d + rv) / g ** m2 - d)
    return base * (g ** m3 * np.exp(expo) - 1.0)


# -- forcing ---------------------------------------------------------------

_W = np.linspace(-40.0, 40.0, 8001)


def _w_inner(f):
    return float((_W[1] - _W[0]) * np.dot(pr.Hd(_W), f))


_constants = {}


def interaction_constants():
    """Projections on H' of the static second-order interaction terms.

    Returns a dict with
      pair_coeffs: {j: c_j} so that the G cross terms of both frames project
                   to e^{-2 s d} sum_j c_j d^j (from the series separation),
      cubic: (1/2) <H', U'''(H) G^2>,
      kink2: <H', 24 V + (60/s) H'> = 24 <V, H'> + 15.
    """
    if "c" not in _constants:
        from .series_algebra import decompose_interaction, second_derivative_g_cross_terms

        res = decompose_interaction(second_derivative_g_cross_terms(), M=1)
        coeffs = {}
        for p in res.pairs:
            if p.d != 1:
                continue
            # terms attached to the other kink reach this one through the odd reflection
            if p.attach == "shifted":
                f, sign = (p.h(-_W) if p.mirrored else p.h(_W)), 1.0
            else:
                f, sign = (p.h(_W) if p.mirrored else p.h(-_W)), -1.0
            coeffs[p.zeta_power] = coeffs.get(p.zeta_power, 0.0) + sign * p.coef * _w_inner(f)
        G = pr.g_special_eval(_W)
        _constants["c"] = {
            "pair_coeffs": coeffs,
            "cubic": 0.5 * _w_inner(pr.d3U(pr.H(_W)) * G * G),
            "kink2": 24.0 * _w_inner(pr.v_profile(_W)) + 60.0 / SQRT2 * _w_inner(pr.Hd(_W)),
        }
    return _constants["c"]


def forcing_closed_form(v, t_grid):
    """Forcing of the k = 2 modulation equation assembled term by term.

    F = -<H', R1 + R2> - e^{-2sd}[sum_j c_j d^j + (1/2)<H', U'''(H)G^2> + 24<V,H'> + 15]
        - 4 [g e^{-s d/g} - e^{-s d}],

    where R1 + R2 collects the single-frame parts of Lambda(H(w0) + e^{-sd} G(w0))
    beyond the 8 s H' terms; the constants c_j come from the series separation.
    """
    from . import ansatz as az

    v = _check_v(v)
    c = interaction_constants()
    spec = az.base_spec(v)
    fr = spec.frame
    w = _W
    H = pr.H(w)
    G = pr.g_special_eval(w)
    t_grid = np.asarray(t_grid, dtype=float)
    out = np.empty_like(t_grid)
    # the forcing is even in t: on a symmetric grid evaluate t <= 0 and mirror
    n = len(t_grid)
    mirror = n % 2 == 1 and np.allclose(t_grid, -t_grid[::-1], rtol=0, atol=1e-12 * max(1.0, abs(t_grid[0])))
    todo = range(n // 2 + 1) if mirror else range(n)
    for i in todo:
        t = t_grid[i]
        E = exp_minus_d(v, t)
        d = d_eval(v, t)
        g = fr.gamma(t)
        wt, wtt = fr.w_derivatives(t, w)
        P, Pt, Ptt, Pw, Ptw, Pww = az._profile_parts(spec, t, w)
        qtt = Ptt + 2.0 * Ptw * wt + Pww * wt * wt + Pw * wtt
        single = qtt - Pww / (g * g) + pr.dU(H) + pr.d2U(H) * E * G
        # <H', 24 M - 30 N> = 4, so R1 + R2 projects to <single> + 4E/g
        r12 = _w_inner(single) + 4.0 * E / g
        pairs = sum(cj * d ** j for j, cj in c["pair_coeffs"].items())
        bracket = g * np.exp(-SQRT2 * d / g) - E
        out[i] = -(r12 + E * E * (pairs + c["cubic"] + c["kink2"]) + 4.0 * bracket)
    if mirror:
        out[n // 2 + 1:] = out[: n // 2][::-1]
    return out


def forcing_projection(spec, v, t_grid, route="projection"):
    """Sampled forcing for the next modulation of ``spec``.

    route="projection": F(t) = -<Lambda(phi)(t, .), H'(w(t, .))> by quadrature.
    route="closed-form": the term-by-term k = 2 forcing (spec must be phi_{2,0}).
    """
    from . import ansatz as az

    if float(v) != spec.v:
        raise InvalidArgument("speed does not match the ansatz")
    if route == "projection":
        return az.forcing_samples(spec, t_grid)
    if route == "closed-form":
        if spec.modulations or spec.corrections:
            raise InvalidArgument("closed-form forcing is only defined for the unmodulated k = 2 ansatz")
        return forcing_closed_form(v, t_grid)
    raise InvalidArgument(f"unknown forcing route {route!r}")
