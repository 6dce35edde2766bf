"""Exponential-series algebra for kink interaction terms.

A plus-side element is a finite sum  sum_n x^n F_n(x)  where each F_n is a
power series in z = e^{sx} (s = sqrt 2) that converges for z < 1, i.e. an
expansion around x = -inf.  A minus-side element is the same thing in
y = e^{-sx}, an expansion around x = +inf.  The canonical spaces use odd
powers of z on the plus side and even powers y^2, y^4, ... on the minus side;
intermediate objects produced while separating products may carry the other
parity, so the storage is exponent-indexed rather than parity-compressed.

Every element keeps a closed-form expression tree next to its coefficients.
Evaluation uses the series where it converges fast (variable <= 1/2) and the
closed form elsewhere, which keeps peeled quantities such as
(f e^{-sx} - a) e^{-2sx} accurate on the whole line.
"""

import ast
from dataclasses import dataclass, field
from itertools import product as iproduct
from math import comb

import numpy as np
from scipy.integrate import quad

from . import profiles as pr
from .errors import AlgebraError, TruncationError, UndefinedValuation

SQRT2 = pr.SQRT2
DEFAULT_ORDER = 81  # max exponent kept: 40 odd terms on the plus side
ZERO_TOL = 1e-13
SWITCH = 0.5  # use the series where the expansion variable is below this


# -- expression trees --------------------------------------------------------

class ProfileExpr:
    """Closed-form expression over kink primitives; call as expr(x, zeta)."""

    def __call__(self, x, zeta=0.0):
        return self.evaluate(np.asarray(x, dtype=float), float(zeta))

    def evaluate(self, x, zeta):
        raise NotImplementedError

    def __add__(self, other):
        return Sum((self, as_expr(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return Sum((self, Scale(-1.0, as_expr(other))))

    def __rsub__(self, other):
        return Sum((as_expr(other), Scale(-1.0, self)))

    def __mul__(self, other):
        if np.isscalar(other):
            return Scale(float(other), self)
        return Prod((self, as_expr(other)))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return Scale(-1.0, self)

    def __pow__(self, n):
        return Prod((self,) * int(n)) if n > 0 else Const(1.0)

    def reflect(self):
        return Reflect(self)

    def shifted(self):
        return Shift(self)


def as_expr(obj):
    if isinstance(obj, ProfileExpr):
        return obj
    if isinstance(obj, PolyExpElement):
        return SeriesNode(obj)
    if np.isscalar(obj):
        return Const(float(obj))
    raise AlgebraError(f"cannot convert {type(obj).__name__} to an expression")


def _g0(x):
    return pr.g_special_eval(x) - 2.0 * np.clip(x, -pr.X_CLAMP, pr.X_CLAMP) * pr.Hd(x)


_PRIMS = {
    "H": pr.H,
    "Hd": pr.Hd,
    "Hdd": pr.Hdd,
    "P": pr.kink_complement,
    "G": pr.g_special_eval,
    "G0": _g0,
    "M": pr.m_profile,
    "N": pr.n_profile,
    "V": pr.v_profile,
}


@dataclass(frozen=True, eq=False)
class Prim(ProfileExpr):
    name: str

    def __post_init__(self):
        if self.name not in _PRIMS:
            raise AlgebraError(f"unknown primitive {self.name!r}")

    def evaluate(self, x, zeta):
        return _PRIMS[self.name](x)

    def __repr__(self):
        return self.name


@dataclass(frozen=True, eq=False)
class Exp(ProfileExpr):
    """e^{k s x} for an integer k."""
    k: int

    def evaluate(self, x, zeta):
        return np.exp(np.clip(self.k * SQRT2 * x, -700.0, 700.0))

    def __repr__(self):
        return f"exp({self.k}sx)"


@dataclass(frozen=True, eq=False)
class Mono(ProfileExpr):
    n: int

    def evaluate(self, x, zeta):
        return x ** self.n

    def __repr__(self):
        return f"x^{self.n}"


@dataclass(frozen=True, eq=False)
class Const(ProfileExpr):
    c: float

    def evaluate(self, x, zeta):
        return np.full_like(x, self.c, dtype=float)

    def __repr__(self):
        return repr(self.c)


@dataclass(frozen=True, eq=False)
class Sum(ProfileExpr):
    terms: tuple

    def evaluate(self, x, zeta):
        out = np.zeros_like(x, dtype=float)
        for t in self.terms:
            out = out + t.evaluate(x, zeta)
        return out

    def __repr__(self):
        return "(" + " + ".join(map(repr, self.terms)) + ")"


@dataclass(frozen=True, eq=False)
class Prod(ProfileExpr):
    factors: tuple

    def evaluate(self, x, zeta):
        out = np.ones_like(x, dtype=float)
        for f in self.factors:
            out = out * f.evaluate(x, zeta)
        return out

    def __repr__(self):
        return "*".join(map(repr, self.factors))


@dataclass(frozen=True, eq=False)
class Scale(ProfileExpr):
    c: float
    e: ProfileExpr

    def evaluate(self, x, zeta):
        return self.c * self.e.evaluate(x, zeta)

    def __repr__(self):
        return f"{self.c:g}*{self.e!r}"


@dataclass(frozen=True, eq=False)
class Reflect(ProfileExpr):
    e: ProfileExpr

    def evaluate(self, x, zeta):
        return self.e.evaluate(-x, zeta)

    def __repr__(self):
        return f"{self.e!r}(-x)"


@dataclass(frozen=True, eq=False)
class Shift(ProfileExpr):
    """e(x - zeta) with zeta supplied at evaluation time."""
    e: ProfileExpr

    def evaluate(self, x, zeta):
        return self.e.evaluate(x - zeta, zeta)

    def __repr__(self):
        return f"{self.e!r}(x-zeta)"


@dataclass(frozen=True, eq=False)
class SeriesNode(ProfileExpr):
    element: "PolyExpElement"

    def evaluate(self, x, zeta):
        return self.element.evaluate(x)

    def __repr__(self):
        return f"<{self.element.side} element>"


# -- text form ----------------------------------------------------------------

_BINOPS = {ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b, ast.Mult: lambda a, b: a * b}


def parse_expr(text):
    """Parse a profile expression such as ``24*M - 30*N + x*Hd`` or ``-H(-x)``.

    Names are the primitives (H, Hd, Hdd, P, G, G0, M, N, V) and ``x``;
    ``exp(k)`` is e^{k s x} for an integer k, ``f(-x)`` reflects, ``**`` takes
    nonnegative integer powers.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise AlgebraError(f"cannot parse expression {text!r}: {exc.msg}") from exc
    return as_expr(_parse_node(tree.body, text))


def _parse_node(node, text):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name):
        if node.id == "x":
            return Mono(1)
        return Prim(node.id)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        val = _parse_node(node.operand, text)
        return -val if isinstance(node.op, ast.USub) else val
    if isinstance(node, ast.BinOp):
        a, b = _parse_node(node.left, text), _parse_node(node.right, text)
        if isinstance(node.op, ast.Pow):
            if not isinstance(b, float) or b != int(b) or b < 0:
                raise AlgebraError(f"exponent must be a nonnegative integer in {text!r}")
            if isinstance(a, float):
                return a ** b
            return Mono(int(b)) if isinstance(a, Mono) and a.n == 1 else as_expr(a) ** int(b)
        if isinstance(node.op, ast.Div) and isinstance(b, float):
            return a / b if isinstance(a, float) else as_expr(a) * (1.0 / b)
        op = _BINOPS.get(type(node.op))
        if op is None:
            raise AlgebraError(f"unsupported operator in {text!r}")
        if isinstance(a, float) and isinstance(b, float):
            return op(a, b)
        return op(as_expr(a) if not isinstance(a, float) else a, as_expr(b) if not isinstance(b, float) else b)
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and len(node.args) == 1 and not node.keywords:
        arg = node.args[0]
        if node.func.id == "exp":
            k = _parse_node(arg, text)
            if not isinstance(k, float) or k != int(k):
                raise AlgebraError(f"exp takes an integer rate in {text!r}")
            return Exp(int(k))
        inner = _parse_node(arg, text)
        if isinstance(inner, Scale) and inner.c == -1.0 and isinstance(inner.e, Mono) and inner.e.n == 1:
            return Reflect(_parse_node(ast.Name(node.func.id), text))
        if isinstance(inner, Mono) and inner.n == 1:
            return _parse_node(ast.Name(node.func.id), text)
        raise AlgebraError(f"primitives take x or -x as argument in {text!r}")
    raise AlgebraError(f"unsupported syntax in {text!r}")


# -- primitive series --------------------------------------------------------

def _binom_series(a, order, lead=0):
    """Coefficients (exponent-indexed, length order+1) of z^lead (1+z^2)^a."""
    c = np.zeros(order + 1)
    j = np.arange(1, (order - lead) // 2 + 1)
    # generalized binomial coefficients binom(a, j) by a running product
    b = np.concatenate(([1.0], np.cumprod((a - j + 1) / j)))
    c[lead::2] = b[: len(c[lead::2])]
    return c


def _conv(a, b, n):
    return np.convolve(a, b)[:n]


def primitive_series(name, order=DEFAULT_ORDER):
    """x-power -> exponent-indexed coefficients of a primitive in z = e^{sx}.

    Returns (terms, lo): exponents run from lo upward.
    """
    n = order + 1
    if name == "H":
        return {0: _binom_series(-0.5, order, 1)}, 0
    if name == "Hd":
        return {0: SQRT2 * _binom_series(-1.5, order, 1)}, 0
    if name == "Hdd":
        h2 = _conv(_binom_series(-0.5, order, 1), _binom_series(-0.5, order, 1), n)
        one = np.zeros(n)
        one[0] = 1.0
        return {0: SQRT2 * _conv(one - 3.0 * h2, SQRT2 * _binom_series(-1.5, order, 1), n)}, 0
    if name == "P":
        return {0: _binom_series(-1.0, order, 0)}, 0
    if name == "M":
        return {0: _binom_series(-1.0, order, 1)}, 0
    if name == "N":
        return {0: _binom_series(-2.0, order, 3)}, 0
    if name == "V":
        # 1/(1 + sqrt(1+z^2)) = (sqrt(1+z^2) - 1)/z^2
        r = _binom_series(0.5, order + 2)[2:]
        return {0: _conv(_binom_series(-0.5, order, 1), r, n)}, 0
    if name in ("G0", "G"):
        k1 = pr.compute_k1()
        # e^{-sx}(1 - (1+z^2)^{-3/2}) = z^{-1} - z^{-1}(1+z^2)^{-3/2}, leading z^{-1} cancels
        b = -_binom_series(-1.5, order + 1)
        b[0] += 1.0
        a_part = b[1:]
        f0 = a_part + (k1 / SQRT2) * SQRT2 * _binom_series(-1.5, order, 1)
        terms = {0: f0}
        if name == "G":
            terms[1] = 2.0 * SQRT2 * _binom_series(-1.5, order, 1)
        return terms, 0
    raise AlgebraError(f"no series for primitive {name!r}")


# -- elements ----------------------------------------------------------------

def _flip(side):
    return {"plus": "minus", "minus": "plus", None: None}[side]


@dataclass(frozen=True, eq=False)
class PolyExpElement:
    """sum_n x^n F_n with F_n = sum_e coeffs[n][e - lo] var^e.

    ``side`` is "plus" (var = e^{sx}) or "minus" (var = e^{-sx}); ``order`` is
    the largest exponent whose coefficient is exact.  ``exprs[n]`` is the
    closed form of F_n used away from the convergence region.
    """

    side: str
    coeffs: dict
    lo: int = 0
    order: int = DEFAULT_ORDER
    exprs: dict = field(default_factory=dict)
    whole: ProfileExpr | None = None  # closed form of the full sum, if per-term forms are unknown

    # construction -------------------------------------------------------
    @staticmethod
    def from_expr(expr, side=None, order=DEFAULT_ORDER):
        expr = as_expr(expr)
        nat = natural_side(expr)
        side = side or nat or "plus"
        if nat is not None and nat != side:
            raise AlgebraError(f"expression lives on the {nat} side, requested {side}")
        return _to_element(expr, side, order)

    @staticmethod
    def constant(c, side="plus", order=DEFAULT_ORDER):
        arr = np.zeros(order + 1)
        arr[0] = c
        return PolyExpElement(side, {0: arr}, 0, order, {0: Const(float(c))})

    # structure ----------------------------------------------------------
    @property
    def powers(self):
        return sorted(self.coeffs)

    @property
    def max_power(self):
        return max(self.coeffs) if self.coeffs else 0

    def is_zero(self):
        return all(np.all(np.abs(c) <= ZERO_TOL) for c in self.coeffs.values())

    def term(self, n):
        return PolyExpElement(self.side, {0: self.coeffs[n]}, self.lo, self.order,
                              {0: self.exprs.get(n)})

    def coef(self, e, n=0):
        """Coefficient of var^e in F_n."""
        c = self.coeffs.get(n)
        if c is None or e < self.lo or e - self.lo >= len(c):
            return 0.0
        return float(c[e - self.lo])

    def exponents(self, n=0, tol=ZERO_TOL):
        c = self.coeffs.get(n, np.zeros(0))
        return [self.lo + i for i in np.flatnonzero(np.abs(c) > tol)]

    def valuation(self, n=0):
        ex = self.exponents(n)
        if not ex:
            raise UndefinedValuation("valuation of the zero series is undefined")
        return ex[0]

    def parity(self):
        """0 or 1 if all nonzero exponents share a parity, None for the zero element."""
        par = {e % 2 for n in self.coeffs for e in self.exponents(n)}
        if len(par) > 1:
            raise AlgebraError("element mixes even and odd exponents")
        return par.pop() if par else None

    # arithmetic ---------------------------------------------------------
    def _aligned(self, other):
        if isinstance(other, (int, float, np.floating)):
            other = PolyExpElement.constant(float(other), self.side, self.order)
        if other.side != self.side:
            raise AlgebraError(f"cannot combine {self.side} and {other.side} elements")
        return other

    def __add__(self, other):
        other = self._aligned(other)
        lo = min(self.lo, other.lo)
        order = min(self.order, other.order)
        size = order - lo + 1
        coeffs, exprs = {}, {}
        for el in (self, other):
            for n, c in el.coeffs.items():
                arr = coeffs.setdefault(n, np.zeros(size))
                seg = c[: order - el.lo + 1]
                arr[el.lo - lo: el.lo - lo + len(seg)] += seg
                e = el.exprs.get(n)
                exprs[n] = e if n not in exprs else (None if exprs[n] is None or e is None else exprs[n] + e)
        return PolyExpElement(self.side, coeffs, lo, order, exprs)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-self._aligned(other))

    def scale(self, c):
        return PolyExpElement(self.side, {n: c * a for n, a in self.coeffs.items()}, self.lo,
                              self.order, {n: (None if e is None else c * e) for n, e in self.exprs.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return self.scale(float(other))
        return series_product(self, other)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = PolyExpElement.constant(1.0, self.side, self.order)
        for _ in range(int(k)):
            out = series_product(out, self)
        return out

    def times_exp(self, k):
        """Multiply by var^k (k may be negative)."""
        ex = Exp(k if self.side == "plus" else -k)
        return PolyExpElement(self.side, dict(self.coeffs), self.lo + k, self.order + k,
                              {n: (None if e is None else e * ex) for n, e in self.exprs.items()})

    def drop_below(self, e0):
        """Remove exponents below e0 (their coefficients must already be zero)."""
        if e0 <= self.lo:
            return self
        cut = e0 - self.lo
        coeffs = {}
        for n, c in self.coeffs.items():
            if np.any(np.abs(c[:cut]) > 1e-10):
                raise AlgebraError("dropping nonzero coefficients")
            coeffs[n] = c[cut:].copy()
        return PolyExpElement(self.side, coeffs, e0, self.order, dict(self.exprs))

    def reflect(self):
        """x -> -x: swaps sides and flips the sign of odd x-powers."""
        return PolyExpElement(_flip(self.side), {n: (-1.0) ** n * c for n, c in self.coeffs.items()},
                              self.lo, self.order,
                              {n: (None if e is None else (-1.0) ** n * Reflect(e)) for n, e in self.exprs.items()})

    # evaluation ---------------------------------------------------------
    def variable(self, x):
        sgn = 1.0 if self.side == "plus" else -1.0
        return np.exp(np.clip(sgn * SQRT2 * np.asarray(x, dtype=float), -700.0, 700.0))

    def series_eval(self, x, n=None):
        x = np.asarray(x, dtype=float)
        u = self.variable(x)
        out = np.zeros_like(x)
        for m, c in self.coeffs.items():
            if n is not None and m != n:
                continue
            # Horner in u, then multiply by u^lo
            acc = np.zeros_like(x)
            for a in c[::-1]:
                acc = acc * u + a
            acc = acc * u ** self.lo
            out = out + (acc if n is not None else x ** m * acc)
        return out

    def term_eval(self, n, x):
        x = np.asarray(x, dtype=float)
        u = self.variable(x)
        near = u <= SWITCH
        expr = self.exprs.get(n)
        if expr is None:
            if np.any(u > 0.9):
                raise AlgebraError("no closed form available outside the series disc")
            return self.series_eval(x, n)
        out = np.empty_like(x)
        out[near] = self.series_eval(x[near], n)
        out[~near] = expr(x[~near])
        return out

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if self.whole is not None:
            near = self.variable(x) <= SWITCH
            out = np.empty_like(x)
            out[near] = self.series_eval(x[near])
            out[~near] = self.whole(x[~near])
            return out[0] if scalar else out
        out = np.zeros_like(x)
        for n in self.coeffs:
            out = out + x ** n * self.term_eval(n, x)
        return out[0] if scalar else out

    __call__ = evaluate

    def to_expr(self):
        return SeriesNode(self)


def natural_side(expr):
    if isinstance(expr, Prim):
        return "plus"
    if isinstance(expr, (Exp, Mono, Const)):
        return None
    if isinstance(expr, Reflect):
        return _flip(natural_side(expr.e))
    if isinstance(expr, Scale):
        return natural_side(expr.e)
    if isinstance(expr, SeriesNode):
        return expr.element.side
    if isinstance(expr, Shift):
        raise AlgebraError("shifted expressions have no single-frame series")
    sides = {natural_side(t) for t in (expr.terms if isinstance(expr, Sum) else expr.factors)} - {None}
    if len(sides) > 1:
        raise AlgebraError("expression mixes both expansion sides")
    return sides.pop() if sides else None


def _to_element(expr, side, order):
    if isinstance(expr, Prim):
        if side != "plus":
            raise AlgebraError(f"primitive {expr.name} expands only on the plus side")
        terms, lo = primitive_series(expr.name, order)
        if expr.name == "G":
            exprs = {0: Prim("G0"), 1: 2.0 * Prim("Hd")}
        else:
            exprs = {0: expr}
        return PolyExpElement(side, terms, lo, order, exprs)
    if isinstance(expr, Exp):
        k = expr.k if side == "plus" else -expr.k
        arr = np.zeros(order + 1)
        arr[0] = 1.0
        return PolyExpElement(side, {0: arr}, k, order + k, {0: expr})
    if isinstance(expr, Mono):
        arr = np.zeros(order + 1)
        arr[0] = 1.0
        return PolyExpElement(side, {expr.n: arr}, 0, order, {expr.n: Const(1.0)})
    if isinstance(expr, Const):
        return PolyExpElement.constant(expr.c, side, order)
    if isinstance(expr, Scale):
        return _to_element(expr.e, side, order).scale(expr.c)
    if isinstance(expr, Reflect):
        return _to_element(expr.e, _flip(side), order).reflect()
    if isinstance(expr, SeriesNode):
        if expr.element.side != side:
            raise AlgebraError("series node on the wrong side")
        return expr.element
    if isinstance(expr, Sum):
        out = _to_element(expr.terms[0], side, order)
        for t in expr.terms[1:]:
            out = out + _to_element(t, side, order)
        return out
    if isinstance(expr, Prod):
        out = _to_element(expr.factors[0], side, order)
        for f in expr.factors[1:]:
            out = series_product(out, _to_element(f, side, order))
        return out
    raise AlgebraError(f"cannot expand {type(expr).__name__}")


def series_product(a, b, c=None):
    """Cauchy product of two (or three) elements on the same side."""
    if c is not None:
        return series_product(series_product(a, b), c)
    if a.side != b.side:
        raise AlgebraError(f"product of {a.side} and {b.side} elements is not a single-side series")
    lo = a.lo + b.lo
    order = min(a.order + b.lo, b.order + a.lo)
    size = order - lo + 1
    if size < 1:
        raise TruncationError("product leaves no valid coefficients")
    coeffs, exprs = {}, {}
    for (n, ca), (m, cb) in iproduct(a.coeffs.items(), b.coeffs.items()):
        arr = coeffs.setdefault(n + m, np.zeros(size))
        full = np.convolve(ca, cb)[:size]
        arr[: len(full)] += full
        ea, eb = a.exprs.get(n), b.exprs.get(m)
        e = None if ea is None or eb is None else ea * eb
        prev = exprs.get(n + m, "unset")
        exprs[n + m] = e if prev == "unset" else (None if prev is None or e is None else prev + e)
    return PolyExpElement(a.side, coeffs, lo, order, exprs)


def val_plus(f):
    """Smallest exponent with a nonzero coefficient in the x^0 part of a plus element."""
    if f.side != "plus":
        raise AlgebraError("val_plus needs a plus-side element")
    if 0 not in f.coeffs:
        raise UndefinedValuation("element has no x^0 part")
    return f.valuation(0)


def val_minus(g):
    if g.side != "minus":
        raise AlgebraError("val_minus needs a minus-side element")
    if 0 not in g.coeffs:
        raise UndefinedValuation("element has no x^0 part")
    return g.valuation(0)


# convenient constructors
def kink():
    return PolyExpElement.from_expr(Prim("H"))


def kink_derivative():
    return PolyExpElement.from_expr(Prim("Hd"))


def left_kink():
    """H_{-1,0}(x) = -H(-x) as a minus-side element."""
    return PolyExpElement.from_expr(-Reflect(Prim("H")))


def g_profile():
    return PolyExpElement.from_expr(Prim("G"))


# -- separation ----------------------------------------------------------------

@dataclass(frozen=True)
class SeparationPair:
    """One emitted term  coef * zeta^zeta_power * e^{-s d zeta} * h(arg).

    ``frame`` is "shifted" (arg = x - zeta) or "fixed" (arg = x) in the
    coordinates where f and g were given.  ``mirrored`` marks terms computed
    after the substitution x -> zeta - x, where a shifted term becomes h(-x)
    and a fixed term becomes h(zeta - x).
    """

    h: PolyExpElement
    d: int
    frame: str
    zeta_power: int = 0
    coef: float = 1.0
    mirrored: bool = False

    @property
    def x_power(self):
        return self.h.max_power

    def evaluate(self, x, zeta):
        x = np.asarray(x, dtype=float)
        if not self.mirrored:
            arg = x - zeta if self.frame == "shifted" else x
        else:
            arg = -x if self.frame == "shifted" else zeta - x
        return self.coef * zeta ** self.zeta_power * np.exp(-SQRT2 * self.d * zeta) * self.h(arg)

    @property
    def attach(self):
        """Frame in the original coordinates, including mirrored terms."""
        if not self.mirrored:
            return self.frame
        return "fixed" if self.frame == "shifted" else "shifted"


@dataclass(frozen=True)
class Remainder:
    f: PolyExpElement
    g: PolyExpElement
    d: int
    exponent: float  # decay exponent of the remainder in units of s*zeta
    x_powers: tuple = (0, 0)
    coef: float = 1.0
    mirrored: bool = False

    def evaluate(self, x, zeta):
        x = np.asarray(x, dtype=float)
        n, m = self.x_powers
        if self.mirrored:
            x = zeta - x
        pf = (x - zeta) ** n * x ** m
        return self.coef * pf * np.exp(-SQRT2 * self.d * zeta) * self.f(x - zeta) * self.g(x)


@dataclass
class SeparationResult:
    pairs: list
    remainders: list

    @property
    def remainder_exponent(self):
        return min((r.exponent for r in self.remainders), default=np.inf)

    @property
    def d_values(self):
        return [p.d for p in self.pairs]

    def approximation(self, x, zeta):
        out = np.zeros_like(np.asarray(x, dtype=float))
        for p in self.pairs:
            out = out + p.evaluate(x, zeta)
        return out

    def remainder(self, x, zeta):
        out = np.zeros_like(np.asarray(x, dtype=float))
        for r in self.remainders:
            out = out + r.evaluate(x, zeta)
        return out

    def extend(self, other):
        self.pairs.extend(other.pairs)
        self.remainders.extend(other.remainders)
        return self


def _next_exponent(F, G, d):
    if F.is_zero() or G.is_zero():
        return np.inf
    return d + min(F.valuation(), G.valuation())


def _peel(F, G, max_steps=None, max_exponent=None, min_valid=12):
    """Separation recursion on two pure series (no x-powers)."""
    pairs, d = [], 0
    steps = 0
    while not (F.is_zero() or G.is_zero()):
        a, b = F.valuation(), G.valuation()
        if a == b:
            raise AlgebraError(f"equal valuations {a} cannot be separated")
        a, b = int(a), int(b)
        nxt = d + min(a, b)
        if max_steps is not None and steps >= max_steps:
            break
        if max_exponent is not None and nxt > max_exponent:
            break
        if F.order - F.lo < min_valid or G.order - G.lo < min_valid:
            raise TruncationError("series truncation exhausted; raise the truncation order")
        if a < b:
            coef = F.coef(a)
            pairs.append((G.times_exp(-a).scale(coef), nxt, "fixed"))
            F = (F.times_exp(-a) - coef)
            F = _zero_exponent(F, 0).drop_below(1)
            G = G.times_exp(-a)
        else:
            coef = G.coef(b)
            pairs.append((F.times_exp(-b).scale(coef), nxt, "shifted"))
            F = F.times_exp(-b)
            G = _zero_exponent(G.times_exp(-b) - coef, 0).drop_below(1)
        d = nxt
        steps += 1
    return pairs, F, G, d


def _zero_exponent(el, e):
    coeffs = {n: c.copy() for n, c in el.coeffs.items()}
    for c in coeffs.values():
        if 0 <= e - el.lo < len(c):
            c[e - el.lo] = 0.0
    return PolyExpElement(el.side, coeffs, el.lo, el.order, el.exprs)


def separate(f, g, M=1, max_exponent=None, mirrored=False):
    """Separate f(x - zeta) g(x) into frame-attached terms.

    f is a plus element, g a minus element, both possibly with polynomial
    prefactors.  Each pair of series parts is peeled ``M`` times (or, when
    ``max_exponent`` is given, while the emitted exponent stays <= it).
    """
    if f.side != "plus" or g.side != "minus":
        raise AlgebraError("separate expects a plus-side f and a minus-side g")
    result = SeparationResult([], [])
    if f.is_zero() or g.is_zero():
        return result
    steps = None if max_exponent is not None else M
    for n, m in iproduct(f.powers, g.powers):
        F, G = f.term(n), g.term(m)
        if F.is_zero() or G.is_zero():
            continue
        pairs, Fm, Gm, d = _peel(F, G, steps, max_exponent)
        for h, dn, frame in pairs:
            # (x - zeta)^n x^m distributed onto the emitting frame
            if frame == "shifted":
                for i in range(m + 1):
                    hh = h * PolyExpElement.from_expr(Mono(n + i), "plus") if n + i else h
                    result.pairs.append(SeparationPair(hh, dn, frame, m - i, float(comb(m, i)), mirrored))
            else:
                for i in range(n + 1):
                    hh = h * PolyExpElement.from_expr(Mono(m + i), "minus") if m + i else h
                    result.pairs.append(SeparationPair(hh, dn, frame, n - i,
                                                       float(comb(n, i)) * (-1.0) ** (n - i), mirrored))
        result.remainders.append(Remainder(Fm, Gm, d, _next_exponent(Fm, Gm, d), (n, m), 1.0, mirrored))
    return result


# -- cross terms of two-frame products ----------------------------------------

@dataclass(frozen=True)
class FramedElement:
    element: PolyExpElement
    frame: str  # "shifted" for functions of x - zeta, "fixed" for functions of x


@dataclass
class CrossTerm:
    coef: float
    factors: tuple  # ((FramedElement, power), ...)

    def evaluate(self, x, zeta):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.coef)
        for fe, p in self.factors:
            arg = x - zeta if fe.frame == "shifted" else x
            out = out * fe.element(arg) ** p
        return out


def polynomial_cross_terms(poly, a, b):
    """Mixed monomials of P(A + B) - P(A) - P(B) for a polynomial P.

    ``poly`` lists coefficients lowest power first; a and b are FramedElements.
    """
    terms = []
    for n, c in enumerate(poly):
        if c == 0.0:
            continue
        for i in range(1, n):
            terms.append(CrossTerm(c * comb(n, i), ((a, i), (b, n - i))))
    return terms


def potential_cross_terms(a, b, order=1):
    """Cross terms of U^{(order)}(A + B) - U^{(order)}(A) - U^{(order)}(B)."""
    poly = np.polynomial.Polynomial([0.0, 0.0, 1.0, 0.0, -2.0, 0.0, 1.0]).deriv(order).coef
    return polynomial_cross_terms(list(poly), a, b)


def _frame_product(factors, frame, side):
    el = None
    for fe, p in factors:
        if fe.frame != frame:
            continue
        part = fe.element ** p if p != 1 else fe.element
        el = part if el is None else series_product(el, part)
    return el


def decompose_interaction(terms, M=2):
    """Separate a sum of two-frame monomials, keeping emitted exponents <= M.

    ``terms`` is a list of CrossTerm, or a pair of FramedElements (one per
    frame) in which case the cross terms of U'(A + B) - U'(A) - U'(B) are used.
    Each monomial is split into its shifted-frame factor P(x - zeta) and its
    fixed-frame factor Q(x).  When P carries odd exponents it is separated
    directly; otherwise the substitution x -> zeta - x swaps the roles.
    """
    if len(terms) == 2 and all(isinstance(t, FramedElement) for t in terms):
        a, b = terms
        if a.frame == b.frame:
            raise AlgebraError("ansatz terms must live in different frames")
        if a.frame != "shifted":
            a, b = b, a
        terms = potential_cross_terms(a, b, 1)
    out = SeparationResult([], [])
    for t in terms:
        P = _frame_product(t.factors, "shifted", None)
        Q = _frame_product(t.factors, "fixed", None)
        if P is None or Q is None:
            raise AlgebraError("monomial does not couple both frames")
        pp, qp = _side_parity(P), _side_parity(Q)
        if (pp + qp) % 2 != 1:
            raise AlgebraError("total degree of the monomial is not odd")
        if P.side == "plus" and pp == 1 and Q.side == "minus" and qp == 0:
            res = separate(P, Q, max_exponent=M)
        elif P.side == "plus" and pp == 0 and Q.side == "minus" and qp == 1:
            # x = zeta - x': P(x - zeta) = P(-x'), Q(x) = Q(-(x' - zeta))
            res = separate(Q.reflect(), P.reflect(), max_exponent=M, mirrored=True)
        else:
            raise AlgebraError("unsupported side combination in monomial")
        for p in res.pairs:
            out.pairs.append(SeparationPair(p.h, p.d, p.frame, p.zeta_power, p.coef * t.coef, p.mirrored))
        for r in res.remainders:
            out.remainders.append(Remainder(r.f, r.g, r.d, r.exponent, r.x_powers, r.coef * t.coef, r.mirrored))
    return out


def _side_parity(el):
    p = el.parity()
    if p is None:
        raise AlgebraError("zero factor in monomial")
    return p


def interaction_terms_kinks():
    """Framed kink pair H(x - zeta), H_{-1,0}(x) used for the leading interaction."""
    return FramedElement(kink(), "shifted"), FramedElement(left_kink(), "fixed")


def second_derivative_g_cross_terms():
    """[U''(A + B) - U''(A)] G(x - zeta) with A = H(x - zeta), B = H_{-1,0}(x).

    U''(A+B) - U''(A) = -24(2AB + B^2) + 30((A+B)^4 - A^4).
    """
    A, B = interaction_terms_kinks()
    G = FramedElement(g_profile(), "shifted")
    mono = [(-48.0, 1, 1), (-24.0, 0, 2), (30.0, 0, 4)] + [(30.0 * comb(4, i), 4 - i, i) for i in range(1, 4)]
    out = []
    for c, ia, ib in mono:
        fac = ((G, 1),) + (((A, ia),) if ia else ()) + ((B, ib),)
        out.append(CrossTerm(c, fac))
    return out


def third_derivative_g_cross_terms():
    """Mixed part of (1/2) U'''(A + B) (G(x - zeta) - G(-x))^2 after removing the
    single-frame pieces (1/2)U'''(A)G(x-zeta)^2 and (1/2)U'''(B)G(-x)^2."""
    A, B = interaction_terms_kinks()
    Gs = FramedElement(g_profile(), "shifted")
    Gf = FramedElement(g_profile().reflect(), "fixed")
    out = []
    u3 = [(-48.0, 1), (120.0, 3)]
    for c, k in u3:
        # (1/2)U'''(A)(G(-x)^2 - 2 G^zeta G(-x))
        out.append(CrossTerm(0.5 * c, ((A, k), (Gf, 2))))
        out.append(CrossTerm(-c, ((A, k), (Gs, 1), (Gf, 1))))
        # (1/2)U'''(B)(G^zeta^2 - 2 G^zeta G(-x))
        out.append(CrossTerm(0.5 * c, ((B, k), (Gs, 2))))
        out.append(CrossTerm(-c, ((B, k), (Gs, 1), (Gf, 1))))
    for ia, ib in ((2, 1), (1, 2)):
        for gfac, gc in ((((Gs, 2),), 1.0), (((Gs, 1), (Gf, 1)), -2.0), (((Gf, 2),), 1.0)):
            out.append(CrossTerm(360.0 * gc, ((A, ia), (B, ib)) + gfac))
    return out


def l1_closed_form(x, zeta):
    """Leading interaction of the kink pair through exponent 2, in closed form."""
    x = np.asarray(x, dtype=float)
    e1, e2 = np.exp(-SQRT2 * zeta), np.exp(-2.0 * SQRT2 * zeta)
    return (24.0 * e1 * (pr.m_profile(x - zeta) - pr.m_profile(-x))
            - 30.0 * e1 * (pr.n_profile(x - zeta) - pr.n_profile(-x))
            + 24.0 * e2 * (pr.v_profile(x - zeta) - pr.v_profile(-x))
            + 60.0 / SQRT2 * e2 * (pr.Hd(x - zeta) - pr.Hd(-x)))


def certify_remainder(f, g, result, zetas=(3.0, 5.0, 8.0), x_pad=40.0, n=8001):
    """Grid sup of |f(x - zeta) g(x) - sum of emitted terms| for each zeta."""
    out = []
    for z in zetas:
        x = np.linspace(-x_pad, z + x_pad, n)
        exact = f(x - z) * g(x)
        out.append(float(np.max(np.abs(exact - result.approximation(x, z)))))
    return np.array(out)


def sup_remainder_terms(terms, result, zeta, x_pad=40.0, n=8001):
    """Grid sup of |sum of cross terms - emitted terms| at one separation."""
    x = np.linspace(-x_pad, zeta + x_pad, n)
    exact = sum(t.evaluate(x, zeta) for t in terms)
    return float(np.max(np.abs(exact - result.approximation(x, zeta))))


def interaction_bound_check(m, alpha, beta, zeta, zeta_fit=2.0, safety=2.0):
    """Integral of |x - x1|^m e^{-alpha (x-x1)_+} e^{-beta (x2-x)_+} with x2 - x1 = zeta.

    Returns (lhs, bound) where the bound is the envelope
    max((1 + zeta^m) e^{-alpha zeta}, e^{-beta zeta}) (or (1 + zeta^{m+1}) e^{-alpha zeta}
    when alpha == beta) scaled by a constant fitted at ``zeta_fit`` times ``safety``.
    """

    def integral(z):
        f = lambda x: abs(x) ** m * np.exp(-alpha * max(x, 0.0)) * np.exp(-beta * max(z - x, 0.0))
        span = 60.0 / min(alpha, beta)
        pieces = [(-span, 0.0), (0.0, z), (z, z + span)]
        return sum(quad(f, a, b, epsabs=1e-15, epsrel=1e-12, limit=200)[0] for a, b in pieces)

    def envelope(z):
        if np.isclose(alpha, beta):
            return (1.0 + z ** (m + 1)) * np.exp(-alpha * z)
        return max((1.0 + z ** m) * np.exp(-alpha * z), np.exp(-beta * z))

    C = safety * integral(zeta_fit) / envelope(zeta_fit)
    return integral(zeta), C * envelope(zeta)
