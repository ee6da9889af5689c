"""Numerical toolkit for sigma_k-type conformal curvature equations.

Submodules:

* ``curvature``: sigma_k, Garding cones, the homotopy family f_t and the
  threshold delta_1;
* ``fields`` and ``conformal``: positive fields with exact derivatives, the
  Schouten operator A^u, Kelvin transforms, stereographic projection, bubbles;
* ``radial``: Newton and continuation solver for radial solutions;
* ``harness``: Harnack, moving-sphere and touching-point audits;
* ``cli``: the ``sigmak`` command.
"""
from .curvature import CurvatureSpec, compute_delta1, in_gamma_k, sigma_k
from .conformal import bubble_exact, kelvin_transform, schouten_eigenvalues, schouten_flat
from .radial import RadialSolution, SolverConfig, continuation_solve, newton_solve
from .harness import certify_delta_matrix, harnack_audit, harnack_constant

__version__ = "0.1.0"
