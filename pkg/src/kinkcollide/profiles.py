"""Closed-form kink profiles of the phi^6 model and the special functions built on them.

The potential is U(phi) = phi^2 (1 - phi^2)^2.  Its kink connecting 0 to 1 is

    H(x) = e^{sx} / sqrt(1 + e^{2sx}),   s = sqrt(2),

and every other profile here is a rational expression in e^{sx} and H.  All
evaluators go through the logistic function so that no intermediate quantity
overflows; arguments are clamped to |x| <= 350/s.
"""

from dataclasses import dataclass
from functools import lru_cache
import threading

import numpy as np
from scipy.integrate import quad
from scipy.special import expit, log_expit

from .errors import InvalidArgument, NumericFailure

SQRT2 = np.sqrt(2.0)
X_CLAMP = 350.0 / SQRT2
KINK_NORM_SQ = 1.0 / (2.0 * SQRT2)

# coefficients of U and its derivatives as polynomials in phi (lowest power first)
_U_POLY = np.polynomial.Polynomial([0.0, 0.0, 1.0, 0.0, -2.0, 0.0, 1.0])


def potential(phi, order=0):
    """U or its derivative of the given order (0..6) at phi."""
    if not 0 <= order <= 6:
        raise InvalidArgument(f"potential derivative order must be in 0..6, got {order}")
    phi = np.asarray(phi, dtype=float)
    if order == 0:
        # factored form avoids cancellation near the vacua
        return phi * phi * (1.0 - phi * phi) ** 2
    return _U_POLY.deriv(order)(phi)


def dU(phi):
    phi = np.asarray(phi, dtype=float)
    p2 = phi * phi
    return phi * (2.0 - 8.0 * p2 + 6.0 * p2 * p2)


def d2U(phi):
    p2 = np.asarray(phi, dtype=float) ** 2
    return 2.0 - 24.0 * p2 + 30.0 * p2 * p2


def d3U(phi):
    phi = np.asarray(phi, dtype=float)
    return -48.0 * phi + 120.0 * phi ** 3


class PotentialModel:
    """The fixed phi^6 potential with all its nonzero derivatives."""

    max_order = 6

    def __call__(self, phi, order=0):
        return potential(phi, order)

    def U(self, phi):
        return potential(phi, 0)

    def dU(self, phi):
        return dU(phi)

    def d2U(self, phi):
        return d2U(phi)


def _clamp(x):
    return np.clip(np.asarray(x, dtype=float), -X_CLAMP, X_CLAMP)


def _kink_parts(x):
    """Return (H, 1 - H^2) evaluated stably."""
    x = _clamp(x)
    q = expit(2.0 * SQRT2 * x)
    return np.sqrt(q), expit(-2.0 * SQRT2 * x)


def _right_kink(x, deriv):
    H, p = _kink_parts(x)
    if deriv == 0:
        return H
    H2 = H * H
    Hd = SQRT2 * H * p
    if deriv == 1:
        return Hd
    Hdd = SQRT2 * (1.0 - 3.0 * H2) * Hd
    if deriv == 2:
        return Hdd
    a2 = 2.0 - 24.0 * H2 + 30.0 * H2 * H2
    if deriv == 3:
        return a2 * Hd
    return (-48.0 * H + 120.0 * H * H2) * Hd * Hd + a2 * Hdd


def kink_eval(x, deriv=0, side="right"):
    """Derivative of order ``deriv`` (0..4) of the kink.

    ``side="right"`` is the kink from 0 to 1, ``side="left"`` its reflection
    x -> -H(-x) running from -1 to 0.
    """
    if int(deriv) != deriv or not 0 <= deriv <= 4:
        raise InvalidArgument(f"deriv must be an integer in 0..4, got {deriv}")
    deriv = int(deriv)
    if side == "right":
        return _right_kink(x, deriv)
    if side == "left":
        sign = -1.0 if deriv % 2 == 0 else 1.0
        return sign * _right_kink(-np.asarray(x, dtype=float), deriv)
    raise InvalidArgument(f"unknown side {side!r}")


@dataclass(frozen=True)
class KinkProfile:
    side: str = "right"
    max_deriv: int = 4

    def __call__(self, x, deriv=0):
        if deriv > self.max_deriv:
            raise InvalidArgument(f"deriv {deriv} above cache bound {self.max_deriv}")
        return kink_eval(x, deriv, self.side)


def H(x):
    return _right_kink(x, 0)


def kink_complement(x):
    """1 - H(x)^2 without cancellation."""
    return _kink_parts(x)[1]


def Hd(x):
    return _right_kink(x, 1)


def Hdd(x):
    return _right_kink(x, 2)


# -- the profile G ----------------------------------------------------------

def _g_exp_part(x, deriv):
    """A(x) = e^{-sx} (1 - (1 + e^{2sx})^{-3/2}) and its first two derivatives."""
    x = _clamp(x)
    p = expit(-2.0 * SQRT2 * x)
    A = np.exp(-SQRT2 * x) * (-np.expm1(1.5 * log_expit(-2.0 * SQRT2 * x)))
    if deriv == 0:
        return A
    hd = _right_kink(x, 1)
    A1 = -SQRT2 * A + 3.0 * hd * p
    if deriv == 1:
        return A1
    q = expit(2.0 * SQRT2 * x)
    return -SQRT2 * A1 + 3.0 * SQRT2 * hd * p * (1.0 - 5.0 * q)


def _g_eval(x, deriv, k1):
    x = _clamp(x)
    c = 2.0 * x + k1 / SQRT2
    if deriv == 0:
        return _g_exp_part(x, 0) + c * _right_kink(x, 1)
    if deriv == 1:
        return _g_exp_part(x, 1) + 2.0 * _right_kink(x, 1) + c * _right_kink(x, 2)
    return _g_exp_part(x, 2) + 4.0 * _right_kink(x, 2) + c * _right_kink(x, 3)


def g_special_eval(x, deriv=0, k1=None):
    """The decaying profile G solving -G'' + U''(H) G = (U''(H) - 2) e^{-sx} + 8 s H'.

    G(x) = e^{-sx} - e^{-sx}(1+e^{2sx})^{-3/2} + 2x H'(x) + (k1/s) H'(x) with k1
    fixed by orthogonality to H'.  ``deriv`` selects G, G' or G''.
    """
    if int(deriv) != deriv or not 0 <= deriv <= 2:
        raise InvalidArgument(f"deriv must be 0, 1 or 2, got {deriv}")
    if k1 is None:
        k1 = compute_k1()
    return _g_eval(x, int(deriv), float(k1))


def g_rhs(x):
    """Right-hand side (U''(H) - 2) e^{-sx} + 8 s H' of the G equation, evaluated stably."""
    h, p = _kink_parts(x)
    z_p = h * np.sqrt(p)  # H^2 e^{-sx} = H sqrt(1 - H^2)
    return -24.0 * z_p + 30.0 * h * h * z_p + 8.0 * SQRT2 * _right_kink(x, 1)


def _integrate(f, a=-40.0, b=40.0):
    val, err = quad(f, a, b, epsabs=1e-15, epsrel=1e-13, limit=400, points=[0.0])
    if not np.isfinite(val) or err > 1e-11:
        raise NumericFailure(f"quadrature did not converge (error estimate {err:.2e})")
    return val


def kink_norm_sq():
    """||H'||^2 by adaptive quadrature plus the analytic tails beyond |x| = 40."""
    # H'^2 ~ 2 e^{2sx} on the left and 2 e^{-4sx} on the right
    tails = 2.0 * np.exp(-2.0 * SQRT2 * 40.0) / (2.0 * SQRT2) + 2.0 * np.exp(-4.0 * SQRT2 * 40.0) / (4.0 * SQRT2)
    return _integrate(lambda x: float(_right_kink(x, 1)) ** 2) + tails


_k1_lock = threading.Lock()


@lru_cache(maxsize=1)
def _k1_cached():
    g0_dot = _integrate(lambda x: float(_g_eval(x, 0, 0.0) * _right_kink(x, 1)))
    norm = kink_norm_sq()
    return -SQRT2 * g0_dot / norm


def compute_k1():
    """The constant k1 making G orthogonal to H'.  Computed once and cached."""
    with _k1_lock:
        return _k1_cached()


def interaction_constant():
    """Integral of (24 H^2 - 30 H^4) e^{-sx} H' over the line; equals 4."""

    def f(x):
        h, p = _kink_parts(x)
        hp = h * np.sqrt(p)  # H e^{-sx} H = H^2 e^{-sx}
        return float((24.0 * hp - 30.0 * h * h * hp) * _right_kink(x, 1))

    # integrand ~ 24 sqrt2 e^{2sx} on the left
    tail = 24.0 * SQRT2 * np.exp(-2.0 * SQRT2 * 40.0) / (2.0 * SQRT2)
    return _integrate(f) + tail


# -- algebraic profiles ----------------------------------------------------

def m_profile(x):
    """M(x) = H(x) (1 + e^{2sx})^{-1/2} = e^{sx} / (1 + e^{2sx})."""
    h, p = _kink_parts(x)
    return h * np.sqrt(p)


def n_profile(x):
    """N(x) = H(x)^3 (1 + e^{2sx})^{-1/2}."""
    h, p = _kink_parts(x)
    return h ** 3 * np.sqrt(p)


def v_profile(x):
    """V(x) = H(x) / (1 + sqrt(1 + e^{2sx}))."""
    h, p = _kink_parts(x)
    sp = np.sqrt(p)
    return h * sp / (1.0 + sp)


def xi_profile(x):
    """xi(x) = x/(4s) - e^{-2sx}/16; xi H' is a particular solution of L u = H'."""
    x = _clamp(x)
    return x / (4.0 * SQRT2) - np.exp(-2.0 * SQRT2 * x) / 16.0


def c_profile(x):
    """The growing factor c(x) with c H' in the kernel of L (second solution)."""
    x = _clamp(x)
    e = lambda k: np.exp(k * SQRT2 * x)
    return ((1.0 - e(-2)) / (4.0 * SQRT2) + 1.5 * x
            + 3.0 * (e(2) - 1.0) / (4.0 * SQRT2) + (e(4) - 1.0) / (8.0 * SQRT2))


_SPECIAL = {
    "M": m_profile,
    "N": n_profile,
    "V": v_profile,
    "xi": xi_profile,
    "c": c_profile,
}


@dataclass(frozen=True)
class SpecialProfile:
    kind: str
    k1: float | None = None

    def __post_init__(self):
        if self.kind not in ("G",) + tuple(_SPECIAL):
            raise InvalidArgument(f"unknown special profile {self.kind!r}")

    def __call__(self, x, deriv=0):
        if self.kind == "G":
            return g_special_eval(x, deriv, self.k1)
        if deriv != 0:
            raise InvalidArgument(f"profile {self.kind} is only evaluated without derivatives")
        return _SPECIAL[self.kind](x)
