"""The static kink and the profiles built from it.

The phi^6 potential U = phi^2 (1 - phi^2)^2 / 2 has a kink H joining the
vacua 0 and 1.  This demo checks the first-order (Bogomolny) equation, prints
the two constants every later step relies on and evaluates the special
profile G that the second-order correction is built from.
"""

import numpy as np

from kinkcollide import profiles as pr

x = np.linspace(-6.0, 6.0, 7)
print("x      H(x)       H'(x)      G(x)")
for xi, h, hd, g in zip(x, pr.H(x), pr.Hd(x), pr.g_special_eval(x)):
    print(f"{xi:5.1f}  {h:.6f}  {hd:.6f}  {g: .6f}")

# H' = sqrt(2 U(H)) along the whole line
xs = np.linspace(-20, 20, 4001)
print("Bogomolny residual:", np.max(np.abs(pr.Hd(xs) - np.sqrt(2 * pr.potential(pr.H(xs))))))

print("||H'||^2 =", pr.kink_norm_sq(), " expected", 1 / (2 * np.sqrt(2)))
print("interaction constant =", pr.interaction_constant(), " expected 4")
print("constant k1 fixing G orthogonal to H':", pr.compute_k1())
