"""Numerical identity checks shared by the command line and the test suite.

Every check returns a row dict with the identity name, the measured residual,
the tolerance it is judged against and a pass flag.
"""

import time

import numpy as np
from scipy.integrate import quad

from . import linearized_operator as lo
from . import profiles as pr
from . import series_algebra as sa

SQRT2 = pr.SQRT2


def row(name, residual, tolerance, passed=None, **extra):
    out = {"identity": name, "residual": float(residual), "tolerance": float(tolerance)}
    out["pass"] = bool(residual <= tolerance) if passed is None else bool(passed)
    out.update(extra)
    return out


def check_constants():
    t0 = time.perf_counter()
    norm = pr.kink_norm_sq()
    c = pr.interaction_constant()
    rows = [
        row("kink_norm_sq", abs(norm - 1.0 / (2.0 * SQRT2)), 1e-8, value=norm),
        row("interaction_constant", abs(c - 4.0), 1e-8, value=c),
    ]
    for r in rows:
        r["seconds"] = time.perf_counter() - t0
    return rows


def check_bogomolny(n=4001):
    x = np.linspace(-20.0, 20.0, n)
    res = np.max(np.abs(pr.Hd(x) - np.sqrt(2.0 * pr.potential(pr.H(x)))))
    return row("bogomolny", res, 1e-12)


def check_g_identity(k1=None, n=4001):
    """-G'' + U''(H) G = (U''(H) - 2) e^{-sx} + 8 s H' on [-20, 20], and <G, H'> = 0."""
    k1 = pr.compute_k1() if k1 is None else float(k1)
    x = np.linspace(-20.0, 20.0, n)
    lhs = -pr.g_special_eval(x, 2, k1) + pr.d2U(pr.H(x)) * pr.g_special_eval(x, 0, k1)
    res = np.max(np.abs(lhs - pr.g_rhs(x)))
    ortho, _ = quad(lambda s: float(pr.g_special_eval(s, 0, k1) * pr.Hd(s)), -40.0, 40.0,
                    epsabs=1e-14, epsrel=1e-12, limit=400, points=[0.0])
    return [row("g_equation", res, 1e-8), row("g_orthogonality", abs(ortho), 1e-8, k1=k1)]


def _order(e1, e2):
    return float(np.log2(e1 / e2))


def check_kernel_convergence(L=20.0, n=2001, window=6.0):
    """L H' = 0, L(xi H') = H' and L(c H') = 0 at spacings h and h/2.

    Residuals are relative to sup |u| on the window, since xi H' and c H'
    grow exponentially.  The finer residual must be within C h^2 (C from the
    coarse run) and the observed order must be close to 2.
    """
    rows = []
    cases = {
        "kernel_H'": (pr.Hd, lambda x: 0.0 * x),
        "xi_H'": (lambda x: pr.xi_profile(x) * pr.Hd(x), pr.Hd),
        "c_H'": (lambda x: pr.c_profile(x) * pr.Hd(x), lambda x: 0.0 * x),
    }
    for name, (u, rhs) in cases.items():
        errs, hs = [], []
        for N in (n, 2 * n - 1):
            g = lo.OperatorGrid(-L, L, N)
            inner = np.abs(g.x) <= window
            r = g.apply(u(g.x)) - rhs(g.x)
            uu = u(g.x)[inner]
            errs.append(np.max(np.abs(r[inner][1:-1])) / np.max(np.abs(uu)))
            hs.append(g.h)
        p = _order(*errs)
        C = errs[0] / hs[0] ** 2
        ok = abs(p - 2.0) < 0.2 and errs[1] <= 1.1 * C * hs[1] ** 2
        rows.append(row(name, errs[1], 1.1 * C * hs[1] ** 2, ok, order=p, h=hs[1]))
    return rows


def check_invert_roundtrip(grid=None):
    grid = grid or lo.default_grid()
    g = pr.g_rhs(grid.x)
    res = grid.invert(g)
    gp, _ = grid.project(g)
    back = grid.apply(res.values) - gp - res.multiplier * grid.unit_kink
    rel = np.max(np.abs(back)) / np.max(np.abs(gp))
    return row("invert_roundtrip", rel, 1e-8)


def g_rhs_element():
    """(U''(H) - 2) e^{-sx} + 8 s H' = -24 M + 30 N + 8 s H' as a plus-side element."""
    return sa.PolyExpElement.from_expr(-24.0 * sa.Prim("M") + 30.0 * sa.Prim("N") + 8.0 * SQRT2 * sa.Prim("Hd"))


def check_secular_coefficient():
    """Recurrence: the x H' coefficient of the solution equals -h0/4."""
    h = g_rhs_element()
    state = lo.series_recurrence(h, 0)
    h0 = h.coef(1, 0)
    return row("secular_coefficient", abs(state.c0 + h0 / 4.0), 1e-14, c0=state.c0, h0=h0)


_BASIS = ("M", "N", "Hd", "Hdd", "V")


def random_plus_input(rng, max_power=2):
    """Random element of S+_m: polynomial combinations of odd profiles, H' part removed."""
    expr = None
    for n in range(max_power + 1):
        for name in _BASIS:
            c = rng.uniform(-1.0, 1.0)
            term = c * sa.Prim(name) if n == 0 else c * sa.Mono(n) * sa.Prim(name)
            expr = term if expr is None else expr + term
    el = sa.PolyExpElement.from_expr(expr)
    # remove the H' component so that the input lies in the range of L
    y = np.linspace(-40.0, 40.0, 16001)
    hd = pr.Hd(y)
    c = np.dot(el(y), hd) / np.dot(hd, hd)
    return el - sa.kink_derivative().scale(c)


def check_series_vs_grid(n_inputs=5, seed=0, L=40.0, N=8001, window=20.0):
    rng = np.random.default_rng(seed)
    grid = lo.OperatorGrid(-L, L, N, order=4)
    unit = grid.unit_kink
    inner = np.abs(grid.x) <= window
    worst = 0.0
    for _ in range(n_inputs):
        h = random_plus_input(rng)
        series = lo.invert_L_series(h)
        us = series(grid.x)
        us = us - grid.h * np.dot(us, unit) * unit
        ug = grid.invert(h(grid.x), check_decay=False).values
        scale = max(np.max(np.abs(ug[inner])), 1.0)
        worst = max(worst, np.max(np.abs(us[inner] - ug[inner])) / scale)
    return row("series_vs_grid", worst, max(1e-6, grid.h ** 2), inputs=n_inputs)


def separation_certificate(zetas=(5.0, 8.0), M=2):
    """Sup remainders of the kink-pair interaction decomposition at two separations.

    Returns (ratio, predicted, exponent): the remainder ratio between the two
    separations and the prediction e^{-s d_M dzeta} from the emitted exponent.
    """
    A, B = sa.interaction_terms_kinks()
    terms = sa.potential_cross_terms(A, B, 1)
    res = sa.decompose_interaction(terms, M=M)
    d = res.remainder_exponent
    sups = [sa.sup_remainder_terms(terms, res, z) for z in zetas]
    ratio = sups[0] / sups[1]
    predicted = float(np.exp(SQRT2 * d * (zetas[1] - zetas[0])))
    return ratio, predicted, d, sups


def check_separation(zetas=(5.0, 8.0), M=2):
    ratio, predicted, d, sups = separation_certificate(zetas, M)
    off = max(ratio / predicted, predicted / ratio)
    return row("separation_ratio", off, 2.0, exponent=d, ratio=ratio, predicted=predicted)


def all_identities(k1=None):
    rows = check_constants()
    rows.append(check_bogomolny())
    rows.extend(check_g_identity(k1))
    rows.extend(check_kernel_convergence())
    rows.append(check_invert_roundtrip())
    rows.append(check_secular_coefficient())
    rows.append(check_series_vs_grid())
    rows.append(check_separation())
    return rows
