"""Inverting the operator linearized about the kink.

L = -d^2/dx^2 + U''(H) has the kernel H'.  For a right-hand side g the
solver returns the unique u orthogonal to H' with L u = g - (g, H') H'/|H'|^2.
The grid solver is checked against the exact profile G, and the series
solver (exact in e^{sqrt2 x}) against the grid.
"""

import numpy as np

from kinkcollide import checks
from kinkcollide import linearized_operator as lo
from kinkcollide import profiles as pr

for order in (2, 4):
    errs = []
    for N in (1001, 2001):
        g = lo.OperatorGrid(-20.0, 20.0, N, order=order)
        u = g.invert(pr.g_rhs(g.x)).values
        inner = np.abs(g.x) < 8
        errs.append(np.max(np.abs(u - pr.g_special_eval(g.x))[inner]))
    print(f"stencil order {order}: errors {errs[0]:.2e} {errs[1]:.2e}, rate {np.log2(errs[0] / errs[1]):.2f}")

print(checks.check_invert_roundtrip())
print(checks.check_series_vs_grid())
print(checks.check_secular_coefficient())
