"""
Homotopy from the semilinear case
=================================

Follow f_t from t = 0, where the equation is the scalar-curvature one, up to
sigma_2 at t = 1 with the decay constant held fixed.  The monitored quantity
is (sup u)(sup 1/u) on the grid.
"""

from sigmak.curvature import CurvatureSpec
from sigmak.radial import SolverConfig, continuation_solve

path = continuation_solve(CurvatureSpec.sigma(4, 2), SolverConfig())
print("   t      iterations   residual    (sup u)(sup 1/u)")
for (t, sol), m in zip(path.steps, path.monitor):
    print("%6.3f   %6d       %.2e    %10.2f" % (t, sol.iterations, sol.residual_norm, m))
print("\nsteps taken:", len(path.steps) - 1)
