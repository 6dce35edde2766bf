"""Approximate collision solutions and how well they solve the equation.

phi_2 places a kink and an antikink on the modulated trajectory and adds the
second-order profile correction; phi_3 adds one more correction.  The L^2
norm of the residual phi_tt - phi_xx + U'(phi) at t = 0 is fitted against v
on a log-log scale, and the projection on the kink's zero mode is compared
with and without modulation.
"""

from kinkcollide import ansatz as az
from kinkcollide import studies

speeds = (0.1, 0.05, 0.025)
l2, proj, l3 = [], [], []
for v in speeds:
    spec = az.build_ansatz(v, 2)
    m = studies.measure(spec, 0.0)
    l2.append(m["L2"])
    proj.append(abs(m["projection"]))
    unmod = abs(az.kink_projection(spec.unmodulated(), 0.0))
    l3.append(studies.residual_norms(az.raise_order(spec), 0.0, (0.0,))[0])
    print(f"v={v}: |res2|={m['L2']:.3e} |res3|={l3[-1]:.3e} projection={proj[-1]:.3e} unmodulated={unmod:.3e}")

print("slopes: residual k=2 %.2f, projection k=2 %.2f, residual k=3 %.2f" % (
    studies.fit_slope(speeds, l2), studies.fit_slope(speeds, proj), studies.fit_slope(speeds, l3)))
