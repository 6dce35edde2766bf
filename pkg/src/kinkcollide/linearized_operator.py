"""The linearization L = -d^2/dx^2 + U''(H) around the kink and its inverse on H'-perp.

Two representations are provided.  ``OperatorGrid`` discretizes L with
second-order centered differences on a truncated interval with zero Dirichlet
data and inverts it through a bordered system that carries the orthogonality
constraint.  ``invert_L_series`` works on exponential series: it solves the
recurrence for the coefficients of sum_n x^n F_n(e^{sx}) level by level and
continues the result to the right half-line with a Chebyshev collocation solve.
"""

from dataclasses import dataclass
from functools import cached_property
import math
import threading

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import BarycentricInterpolator

from . import profiles as pr
from .errors import AlgebraError, InvalidArgument, NumericFailure
from .grid import GridField, uniform_grid
from .series_algebra import (
    SWITCH,
    PolyExpElement,
    ProfileExpr,
    primitive_series,
)

SQRT2 = pr.SQRT2


_STENCILS = {
    2: np.array([-1.0, 2.0, -1.0]),
    4: np.array([1.0, -16.0, 30.0, -16.0, 1.0]) / 12.0,
}


class OperatorGrid:
    """L on a uniform grid of [x_min, x_max] with zero values just outside.

    ``order`` selects the centered stencil for -d^2/dx^2 (2 or 4).
    """

    def __init__(self, x_min=-60.0, x_max=60.0, N=6001, order=2):
        if order not in _STENCILS:
            raise InvalidArgument(f"stencil order must be 2 or 4, got {order}")
        self.x = uniform_grid(x_min, x_max, N)
        self.N = int(N)
        self.order = int(order)
        self.h = float(self.x[1] - self.x[0])
        self.potential = pr.d2U(pr.H(self.x))
        self.kink_derivative = pr.Hd(self.x)
        self.unit_kink = self.kink_derivative / np.sqrt(self.h * self.kink_derivative @ self.kink_derivative)
        self._lock = threading.Lock()
        self._lu = None

    @classmethod
    def symmetric(cls, L=60.0, N=6001, order=2):
        return cls(-L, L, N, order)

    @property
    def x_min(self):
        return float(self.x[0])

    @property
    def x_max(self):
        return float(self.x[-1])

    def field(self, values):
        return GridField(self.x, np.asarray(values, dtype=float))

    def inner(self, u, v):
        return float(self.h * np.dot(_vals(u), _vals(v)))

    @cached_property
    def matrix(self):
        st = _STENCILS[self.order] / self.h ** 2
        half = len(st) // 2
        diags = [np.full(self.N - abs(j), st[j + half]) for j in range(-half, half + 1)]
        diags[half] = diags[half] + self.potential
        return sp.diags(diags, list(range(-half, half + 1)), format="csc")

    def apply(self, u):
        u = _vals(u)
        st = _STENCILS[self.order] / self.h ** 2
        half = len(st) // 2
        out = self.potential * u
        for j in range(-half, half + 1):
            c = st[j + half]
            if j < 0:
                out[-j:] += c * u[:j]
            elif j > 0:
                out[:-j] += c * u[j:]
            else:
                out += c * u
        return out

    def project(self, g):
        """Remove the H' component; returns (projected, removed coefficient)."""
        g = _vals(g)
        c = self.h * np.dot(g, self.unit_kink)
        return g - c * self.unit_kink, c

    def _factor(self):
        with self._lock:
            if self._lu is None:
                k = self.unit_kink[:, None] * np.sqrt(self.h)
                bordered = sp.bmat([[self.matrix, sp.csc_matrix(k)],
                                    [sp.csc_matrix(k.T), None]], format="csc")
                try:
                    self._lu = spla.splu(bordered)
                except RuntimeError as exc:  # singular factor
                    raise NumericFailure(f"bordered operator is singular: {exc}") from exc
            return self._lu

    def invert(self, g, check_decay=True):
        """Solve L u = g + mu H' with <u, H'> = 0 after projecting g."""
        gf = GridField(self.x, _vals(g))
        if check_decay:
            gf.check_padded(what="right-hand side")
        gp, removed = self.project(gf.values)
        sol = self._factor().solve(np.concatenate([gp, [0.0]]))
        if not np.all(np.isfinite(sol)):
            raise NumericFailure("non-finite solution of the bordered system")
        u = sol[:-1]
        mu = -sol[-1] * np.sqrt(self.h)  # L u = g - sol[-1] k  with k = sqrt(h) * unit
        return InverseResult(GridField(self.x, u), float(mu), float(removed))


@dataclass(frozen=True)
class InverseResult:
    field: GridField
    multiplier: float  # L u = g_projected + multiplier * unit H'
    removed: float  # H' component (unit-normalized) removed from the input

    @property
    def values(self):
        return self.field.values


def _vals(u):
    return u.values if isinstance(u, GridField) else np.asarray(u, dtype=float)


_default_grids = {}
_grid_lock = threading.Lock()


def default_grid(L=60.0, N=6001, order=2):
    key = (float(L), int(N), int(order))
    with _grid_lock:
        if key not in _default_grids:
            _default_grids[key] = OperatorGrid.symmetric(L, N, order)
        return _default_grids[key]


def apply_L(u, grid=None):
    """Second-order finite-difference L applied to samples on ``grid``."""
    grid = grid or default_grid()
    return grid.field(grid.apply(u))


def invert_L(g, grid=None):
    """Grid inverse of L on the orthogonal complement of H'."""
    grid = grid or default_grid()
    return grid.invert(g)


# -- series inverse ------------------------------------------------------------

@dataclass(frozen=True)
class SeriesSolveState:
    """Input and output coefficients of the level-by-level recurrence.

    ``h[n][k]`` and ``c[n][k]`` are coefficients of x^n z^{2k+1}; ``c0`` is the
    coefficient of the secular term x H'(x) when the input has no x-powers.
    """

    h: np.ndarray
    c: np.ndarray
    c0: float
    potential: np.ndarray  # p_j: coefficients of z^{2j} in U''(H) - 2

    def growth(self, eps=0.5):
        k = np.arange(self.c.shape[1])
        return float(np.max(np.abs(self.c) * eps ** (k / 2.0)))


def _potential_series(nk):
    """Coefficients p_j (j = 0..nk-1) of z^{2j} in U''(H) - 2 = -24 H^2 + 30 H^4."""
    q = np.zeros(nk)  # H^2 = z^2/(1+z^2): coefficient of z^{2j} is (-1)^{j-1}, j >= 1
    j = np.arange(1, nk)
    q[1:] = (-1.0) ** (j - 1)
    q2 = np.convolve(q, q)[:nk]
    return -24.0 * q + 30.0 * q2


def _odd_coeffs(el, n, nk):
    """Coefficients of z^{2k+1}, k < nk, of the x^n part of a plus element."""
    out = np.zeros(nk)
    for k in range(nk):
        out[k] = el.coef(2 * k + 1, n)
    return out


def series_recurrence(h, m=None, nk=None):
    """Solve L f = h coefficientwise for f = sum_{n <= m+1} x^n F_n(z).

    Levels are processed from the highest x-power down.  At level n the
    z^{2k+1} coefficient satisfies

        (2 - 2(2k+1)^2) c[n,k] + sum_{j>=1} p_j c[n,k-j]
            - 2 s (n+1)(2k+1) c[n+1,k] - (n+2)(n+1) c[n+2,k] = h[n,k],

    and its k = 0 row fixes c[n+1,0].  The free H' direction is fixed by
    c[0,0] = c[1,0]/s, so the x^0 and x^1 parts start with the same multiple
    of H'.
    """
    if h.side != "plus":
        raise AlgebraError("series inverse needs a plus-side input")
    for n in h.powers:
        if any(e % 2 == 0 for e in h.exponents(n)) or (h.exponents(n) and h.exponents(n)[0] < 1):
            raise AlgebraError("input must carry odd powers of e^{sx} starting at e^{sx}")
    m = h.max_power if m is None else int(m)
    nk = nk or (h.order - 1) // 2 + 1
    H = np.zeros((m + 4, nk))
    for n in h.powers:
        H[n] = _odd_coeffs(h, n, nk)
    p = _potential_series(nk)
    C = np.zeros((m + 4, nk))
    for n in range(m + 1, -1, -1):
        if n >= 1:
            C[n, 0] = -(H[n - 1, 0] + (n + 1) * n * C[n + 1, 0]) / (2.0 * SQRT2 * n)
        else:
            C[0, 0] = C[1, 0] / SQRT2
        for k in range(1, nk):
            e = 2 * k + 1
            terms = [H[n, k], 2.0 * SQRT2 * (n + 1) * e * C[n + 1, k], (n + 2) * (n + 1) * C[n + 2, k]]
            terms.extend(-p[j] * C[n, k - j] for j in range(1, k + 1))
            C[n, k] = math.fsum(terms) / (2.0 - 2.0 * e * e)
    c0 = C[1, 0] / SQRT2
    return SeriesSolveState(H[: m + 1], C[: m + 2], float(c0), p)


def _cheb(n, a, b):
    """Chebyshev points on [a, b] (descending from b) and the first-derivative matrix."""
    j = np.arange(n + 1)
    t = np.cos(np.pi * j / n)
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** j
    T = np.tile(t, (n + 1, 1)).T
    dT = T - T.T
    D = np.outer(c, 1.0 / c) / (dT + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    x = a + (b - a) * (t + 1.0) / 2.0
    return x, D * 2.0 / (b - a)


@dataclass(frozen=True, eq=False)
class ContinuedSolution(ProfileExpr):
    """Right-half continuation of a series solution (Chebyshev interpolant)."""

    interp: BarycentricInterpolator
    a: float
    b: float
    mismatch: float  # derivative jump at the joint; zero when the input is H'-orthogonal

    def evaluate(self, x, zeta):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = (x >= self.a) & (x <= self.b)
        out[inside] = self.interp(x[inside])
        return out


def _continue_right(sol_series, rhs, x_right=40.0, n=320):
    a = float(np.log(SWITCH) / SQRT2)
    x, D = _cheb(n, a, x_right)
    D2 = D @ D
    A = -D2 + np.diag(pr.d2U(pr.H(x)))
    f = rhs(x)
    # x[0] = x_right, x[-1] = a
    A[0] = 0.0
    A[0, 0] = 1.0
    f[0] = 0.0
    A[-1] = 0.0
    A[-1, -1] = 1.0
    f[-1] = float(sol_series(np.array([a]))[0])
    u = np.linalg.solve(A, f)
    if not np.all(np.isfinite(u)):
        raise NumericFailure("continuation solve failed")
    eps = 1e-6
    ds = (sol_series(np.array([a + eps])) - sol_series(np.array([a - eps])))[0] / (2 * eps)
    mismatch = float((D @ u)[-1] - ds)
    return ContinuedSolution(BarycentricInterpolator(x, u), a, x_right, mismatch)


def invert_L_series(h, m=None, nk=None, continue_right=True):
    """Series inverse of L: input in S+_m (H' part removed), output in S+_{m+1}.

    The coefficients solve the recurrence of ``series_recurrence``; the
    returned element evaluates by its series for e^{sx} <= 1/2 and by a
    collocation continuation beyond.  The output equals the decaying solution
    up to an additive multiple of H'.
    """
    state = series_recurrence(h, m, nk)
    order = 2 * state.c.shape[1] - 1
    coeffs = {}
    for n in range(state.c.shape[0]):
        arr = np.zeros(order + 1)
        arr[1::2] = state.c[n]
        coeffs[n] = arr
    el = PolyExpElement("plus", coeffs, 0, order, {})
    if not continue_right:
        return el
    cont = _continue_right(lambda x: el.series_eval(x), lambda x: h.evaluate(x))
    return PolyExpElement("plus", coeffs, 0, order, {}, whole=cont)


def kernel_series(order=81):
    """Series of H' (the kernel direction)."""
    terms, lo = primitive_series("Hd", order)
    return terms[0]
