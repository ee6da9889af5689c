"""
Cones, bubbles and the Schouten matrix
======================================

A tour of the pointwise objects: elementary symmetric functions, cone
membership, and the eigenvalues of A^u for a bubble.
"""

import numpy as np

from sigmak.conformal import bubble_exact, bubble_field, schouten_eigenvalues, schouten_flat
from sigmak.curvature import CurvatureSpec, elementary_symmetric, in_gamma_k

# sigma_0 .. sigma_3 of a vector with one negative entry
lam = np.array([-1.0, 1.0, 1.0])
print("sigma_j(-1,1,1) =", elementary_symmetric(lam))
for k in (1, 2, 3):
    print("  in Gamma_%d:" % k, in_gamma_k(lam, k))

# a bubble has constant eigenvalues; bubble_exact picks the amplitude with f = 1
spec = CurvatureSpec.sigma(4, 2)
b = bubble_exact(spec, s=0.7)
u = bubble_field(b)
print("\nbubble for sigma_2 in n=4: amplitude %.6f, scale %.2f" % (b.amplitude, b.scale))

pts = np.random.default_rng(0).uniform(-3, 3, (5, 4))
eig = schouten_eigenvalues(u, pts)
print("eigenvalues at five random points:\n", eig)
print("f(lambda) at those points:", spec.value(eig))

# the full matrix at one point, for comparison
print("\nA^u at", pts[0].round(3))
print(schouten_flat(u, pts[0]).entries.round(6))
