"""
Moving spheres and touching paraboloids
=======================================

For a bubble the critical radius at x is sqrt(1/s^2 + |x - c|^2), where the
Kelvin reflection fixes u.  A sum of two bubbles has no such symmetry and
the critical radius is found by bisection.
"""

import numpy as np

from sigmak.fields import GeneralizedBubble, SumField
from sigmak.harness import critical_lambda, fit_touching_paraboloid, touching_gap

s = 2.0
u = GeneralizedBubble(3, 1.0, s)
for x in (np.zeros(3), np.array([0.5, 0.0, 0.0]), np.array([0.3, -0.4, 1.0])):
    rep = critical_lambda(u, x, 5.0)
    print("x=%s  lambda_x=%.8f  closed form=%.8f" % (x, rep.lambda_x, np.sqrt(1 / s ** 2 + x @ x)))

w = SumField([GeneralizedBubble(3, 1.0, 1.0), GeneralizedBubble(3, 0.5, 3.0, np.array([0.8, 0, 0]))])
rep = critical_lambda(w, np.zeros(3), 5.0)
print("\ntwo bubbles: lambda_0=%.6f, margin=%.2e" % (rep.lambda_x, rep.margin))

xi, p = fit_touching_paraboloid(w, np.zeros(3), 0.5)
print("paraboloid touches at", p.round(4), "with A^u - A^xi eigenvalue gap %.4f" % touching_gap(w, xi, p))
