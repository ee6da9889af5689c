"""Radial solutions of f(lambda(A^u)) = 1 by damped Newton and continuation.

Unknown
-------
The iteration runs in w = u^{-2/(n-2)}, i.e. the metric u^{4/(n-2)} g_flat is
written w^{-2} g_flat.  In this variable

    lambda(A) = w D^2 w - |Dw|^2 / 2 * I,

with eigenvalues w w'' - w'^2/2 (radial) and w w'/r - w'^2/2 (tangential,
multiplicity n-1).  Bubbles are exactly w = alpha + beta r^2, so the
stencils below reproduce them without truncation error, and the large
negative powers of u that make A^u a small difference of huge terms in the
far field never appear.

Grid and stencils
-----------------
Nodes r_i = R_max (b xi_i + (1-b) xi_i^2), xi_i = i/M, clustered near the
origin.  A pure quadratic map (b = 0) puts the first node at R_max/M^2,
where rounding in the second-difference stencil alone exceeds 1e-7; the
default b = 0.3 keeps the first spacing near 0.015 for the default grid.
First and second derivatives use five-point stencils (Fornberg weights on
the graded nodes); w is extended evenly across r = 0 (ghost nodes at -r_j
carry w_j), which encodes w'(0) = 0.  Node M-1 uses a six-point one-sided
stencil.

Rows
----
The unknown is stored as an offset v = w - (alpha_c + beta_c r^2) from the
exact solution with decay constant c (u ~ c r^{2-n}); the quadratic part is
differentiated exactly and only v goes through the stencils.  Equation
rows 0..M-1 are f(lambda_i) - 1 and row M is the Dirichlet condition
v_M = 0, i.e. w(R_max) equals the value of the exact profile there.

Evaluating f - 1 from nodal u values instead leaves a rounding floor of
order 1e-7 near r = 40, since w ~ r^2 and lambda is a difference of terms
of size w w''.  Holding the offset avoids that.

Newton
------
The linearized operator has a dilation kernel (delta w ~ 1 - beta r^2 at
the continuum level) and a far-field mode growing like r^n, so a plain
Newton step amplifies some residual components by about R_max^{n-2}.  Far
from the solution the iteration therefore runs on a bordered system: one
extra unknown mu shifts the right side to 1 + mu and one extra row asks
w'(R_max) to match the exact profile.  Once the residual drops below
``polish_tol`` the shift is dropped and a few square steps finish.

The same amplification makes Newton's basin shrink with R_max for
perturbations concentrated in the core.  When the full-domain iteration
fails, the solve is restarted as a domain continuation: Dirichlet problems
on [0, R_max / 2^j], innermost first, each seeded by the previous stage.

After a solve the tail certificate asks r^{n-2} u / c to lie within
``tail_tol`` of one at R_max.
"""
import csv
import io
from dataclasses import dataclass, field, fields
from functools import lru_cache

import numpy as np
from scipy import linalg

from .conformal import BubbleParams, bubble_kappa, radial_schouten
from .curvature import CurvatureSpec
from .errors import (ConeExit, ConeViolation, ContinuationStall, MaxIterations,
                     SingularJacobian, TailConditionError)
from .fields import RadialProfileField

__all__ = [
    "SolverConfig",
    "RadialSolution",
    "ContinuationPath",
    "graded_grid",
    "fd_weights",
    "derivative_matrices",
    "bubble_for_decay",
    "bubble_on_grid",
    "decay_constant",
    "default_decay",
    "core_constant",
    "to_w",
    "from_w",
    "node_eigenvalues",
    "curvature_defect",
    "stencil_defect",
    "residual",
    "linearized_coefficients",
    "linearized_operator",
    "newton_solve",
    "continuation_solve",
]


@dataclass
class SolverConfig:
    newton_tol: float = 1e-10
    max_newton: int = 40
    damping: float = 0.5
    max_halvings: int = 30
    dt_initial: float = 0.1
    dt_min: float = 1e-4
    max_steps: int = 200
    M: int = 800
    R_max: float = 40.0
    grading: float = 0.3
    far_field_constant: float = None
    tail_tol: float = 1e-2
    singular_tol: float = 1e-24
    polish_tol: float = 1e-8

    def __post_init__(self):
        if not (self.newton_tol > 0 and self.polish_tol > 0 and self.tail_tol > 0 and self.singular_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.damping < 1:
            raise ValueError("damping factor must lie in (0, 1)")
        if not 0 < self.dt_min <= self.dt_initial <= 1:
            raise ValueError("need 0 < dt_min <= dt_initial <= 1")
        if not 0 <= self.grading <= 1:
            raise ValueError("grading must lie in [0, 1]")
        if self.M < 8 or self.R_max <= 0:
            raise ValueError("grid needs M >= 8 and R_max > 0")
        if self.far_field_constant is not None and not self.far_field_constant > 0:
            raise ValueError("far-field constant must be positive")

    @property
    def radii(self):
        return graded_grid(self.M, self.R_max, self.grading)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError("unknown solver config keys: %s" % sorted(unknown))
        return cls(**data)


def graded_grid(M, R_max, grading=0.3):
    xi = np.arange(M + 1) / M
    return R_max * (grading * xi + (1.0 - grading) * xi ** 2)


def fd_weights(z, x, m):
    """Fornberg's finite-difference weights.

    Returns c with c[j, d] the weight of node x[j] in the d-th derivative at
    z, for d = 0..m.
    """
    x = np.asarray(x, dtype=float)
    npts = len(x)
    c = np.zeros((npts, m + 1))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, npts):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


@lru_cache(maxsize=64)
def _derivative_matrices(r):
    r = np.array(r)
    M = len(r) - 1
    d1 = np.zeros((M + 1, M + 1))
    d2 = np.zeros((M + 1, M + 1))
    for i in range(M + 1):
        if i <= M - 2:
            idx = np.arange(i - 2, i + 3)
        else:
            idx = np.arange(M - 5, M + 1)
        pos = np.where(idx >= 0, r[np.abs(idx)], -r[np.abs(idx)])
        w = fd_weights(r[i], pos, 2)
        for j, col in enumerate(np.abs(idx)):
            d1[i, col] += w[j, 1]
            d2[i, col] += w[j, 2]
    d1.setflags(write=False)
    d2.setflags(write=False)
    return r, d1, d2


def derivative_matrices(radii):
    """(radii, D1, D2) for a grid starting at 0, even extension across 0."""
    return _derivative_matrices(tuple(float(x) for x in radii))


def _derivs(values, radii):
    r, d1, d2 = derivative_matrices(radii)
    return r, d1 @ values, d2 @ values


def decay_constant(bubble):
    """c with u ~ c r^{2-n} at infinity: c = a s^{2-n}."""
    return bubble.amplitude * bubble.scale ** (2 - bubble.n)


def bubble_for_decay(spec, c):
    """The exact radial solution (a centered bubble) with decay constant c."""
    n = spec.n
    s = c ** (-2.0 / (n - 2)) * np.sqrt(bubble_kappa(n, 1.0) * spec.f_e())
    return BubbleParams(c * s ** (n - 2), float(s), np.zeros(n))


def default_decay(spec):
    """Decay constant of the unit-scale exact bubble of `spec`."""
    return (bubble_kappa(spec.n, 1.0) * spec.f_e()) ** ((spec.n - 2) / 4.0)


def core_constant(spec, c):
    """alpha_c = w(0) of the exact solution with decay constant c."""
    return c ** (2.0 / (spec.n - 2)) / (bubble_kappa(spec.n, 1.0) * spec.f_e())


def bubble_on_grid(spec, c, config):
    """Nodal values of the exact bubble with decay constant c."""
    b = bubble_for_decay(spec, c)
    return b.amplitude * (1.0 + (b.scale * config.radii) ** 2) ** (-(spec.n - 2) / 2.0)


def to_w(values, n):
    """w = u^{-2/(n-2)}, so that u^{4/(n-2)} g_flat = w^{-2} g_flat."""
    return np.asarray(values, dtype=float) ** (-2.0 / (n - 2))


def from_w(w, n):
    return np.asarray(w, dtype=float) ** (-(n - 2) / 2.0)


def _profile(spec, c):
    """(alpha, beta) of the exact solution w = alpha + beta r^2 with decay c."""
    alpha = core_constant(spec, c)
    return alpha, 1.0 / (alpha * bubble_kappa(spec.n, 1.0) * spec.f_e())


def _tail_w(spec, c, r):
    alpha, beta = _profile(spec, c)
    return alpha + beta * r ** 2


def _offset(spec, radii, values, c):
    return to_w(values, spec.n) - _tail_w(spec, c, radii)


def _offset_eigs(radii, v, alpha, beta):
    # derivatives of the quadratic part are exact; stencils only see v
    r, dv, d2v = _derivs(v, radii)
    safe = np.where(r > 0, r, 1.0)
    w = alpha + beta * r ** 2 + v
    dw = 2.0 * beta * r + dv
    d2w = 2.0 * beta + d2v
    dw_r = np.where(r > 0, 2.0 * beta + dv / safe, d2w)
    half = 0.5 * dw ** 2
    return w, dw, d2w, dw_r, w * d2w - half, w * dw_r - half


def _eigen_vectors(lam_rad, lam_tan, n):
    return np.concatenate([lam_rad[:, None], np.repeat(lam_tan[:, None], n - 1, axis=1)], axis=1)


def _cone_nodes(spec, lam):
    # equation nodes only; node M carries the far-field row
    lam = lam[:-1]
    inside = spec.contains(lam)
    if not np.all(inside):
        raise ConeViolation("A^u leaves Gamma", nodes=np.flatnonzero(~inside))
    return lam


def _check_positive(values):
    bad = np.flatnonzero(~(values > 0.0))
    if bad.size:
        raise ConeViolation("nonpositive nodal values", nodes=bad)


def node_eigenvalues(radii, values, n):
    """(lambda_rad, lambda_tan) of A^u at every node, from the grid stencils."""
    values = np.asarray(values, dtype=float)
    _check_positive(values)
    return _offset_eigs(radii, to_w(values, n), 0.0, 0.0)[4:]


def curvature_defect(spec, radii, values):
    """f(lambda(A^u)) - 1 at nodes 0..M-1; ConeViolation lists nodes outside Gamma."""
    lam = _cone_nodes(spec, _eigen_vectors(*node_eigenvalues(radii, values, spec.n), spec.n))
    return spec.value(lam) - 1.0


def stencil_defect(spec, radii, values):
    """f - 1 at nodes 0..M-1 with u', u'' taken by stencils on u itself.

    Same equation as :func:`curvature_defect` without the change of
    variable, so it carries the stencil's truncation error.
    """
    values = np.asarray(values, dtype=float)
    _check_positive(values)
    r, du, d2u = _derivs(values, radii)
    lam = _eigen_vectors(*radial_schouten(values, du, d2u, r, spec.n), spec.n)
    return spec.value(_cone_nodes(spec, lam)) - 1.0


def _rows(spec, radii, v, c, mu=None, target=0.0):
    """Equation rows f - 1 - mu, Dirichlet row, and the slope row when mu is given."""
    alpha, beta = _profile(spec, c)
    eig = _offset_eigs(radii, v, alpha, beta)
    _check_positive(eig[0])
    lam = _cone_nodes(spec, _eigen_vectors(eig[4], eig[5], spec.n))
    out = [spec.value(lam) - 1.0 - (0.0 if mu is None else mu), [(v[-1] - target) / alpha]]
    if mu is not None:
        _, d1, _ = derivative_matrices(radii)
        out.append([(d1[-1] @ v) / (2.0 * beta * radii[-1])])
    return np.concatenate(out)


def residual(spec, radii, values, c=None):
    """f(lambda) - 1 at nodes 0..M-1, far-field row w(R)/w_c(R) - 1 at node M."""
    values = np.asarray(values, dtype=float)
    _check_positive(values)
    c = default_decay(spec) if c is None else c
    return _rows(spec, radii, _offset(spec, radii, values, c), c)


def linearized_coefficients(spec, radii, values):
    """Partial derivatives of f(lambda) w.r.t. (w, w', w'') at nodes 0..M-1.

    Ellipticity of the discrete problem shows up as a positive w''
    coefficient.
    """
    values = np.asarray(values, dtype=float)
    _check_positive(values)
    return _linear_parts(spec, radii, to_w(values, spec.n), 0.0, 0.0)


def _linear_parts(spec, radii, v, alpha, beta):
    eig = _offset_eigs(radii, v, alpha, beta)
    _cone_nodes(spec, _eigen_vectors(eig[4], eig[5], spec.n))
    w, dw, d2w, dw_r, l_rad, l_tan = (x[:-1] for x in eig)
    grad = spec.gradient(_eigen_vectors(l_rad, l_tan, spec.n))
    g_rad = grad[:, 0]
    g_tan = grad[:, 1:].sum(axis=1)
    r = radii[:-1]
    origin = r == 0
    safe = np.where(origin, 1.0, r)
    c_w = g_rad * d2w + g_tan * dw_r
    c_dw = -(g_rad + g_tan) * dw + np.where(origin, 0.0, g_tan * w / safe)
    c_d2w = g_rad * w + np.where(origin, g_tan * w, 0.0)
    return c_w, c_dw, c_d2w


def _jacobian(spec, radii, v, c, bordered=False):
    M = len(radii) - 1
    alpha, beta = _profile(spec, c)
    _, d1, d2 = derivative_matrices(radii)
    c_w, c_dw, c_d2w = _linear_parts(spec, radii, v, alpha, beta)
    size = M + 2 if bordered else M + 1
    jac = np.zeros((size, size))
    jac[:M, :M + 1] = c_dw[:, None] * d1[:-1] + c_d2w[:, None] * d2[:-1]
    jac[np.arange(M), np.arange(M)] += c_w
    jac[M, M] = 1.0 / alpha
    if bordered:
        jac[:M, M + 1] = -1.0
        jac[M + 1, :M + 1] = d1[-1] / (2.0 * beta * radii[-1])
    return jac


def linearized_operator(spec, radii, values, c=None):
    """Jacobian of :func:`residual` w.r.t. the nodal values u.

    Dense (M+1) x (M+1); half-bandwidth <= 5.
    """
    c = default_decay(spec) if c is None else c
    values = np.asarray(values, dtype=float)
    n = spec.n
    w = to_w(values, n)
    jac = _jacobian(spec, radii, _offset(spec, radii, values, c), c)
    return jac * (-(2.0 / (n - 2)) * w / values)[None, :]


@dataclass
class RadialSolution:
    radii: np.ndarray
    values: np.ndarray
    spec: CurvatureSpec
    residual_norm: float
    cone_certificate: np.ndarray
    far_field_constant: float
    iterations: int = 0
    t: float = 1.0
    offset: np.ndarray = None  # w - (alpha_c + beta_c r^2), kept at full precision

    @property
    def n(self):
        return self.spec.n

    @property
    def certified(self):
        return bool(np.all(self.cone_certificate) and np.all(self.values > 0))

    def _v(self):
        if self.offset is None:
            return _offset(self.spec, self.radii, self.values, self.far_field_constant)
        return self.offset

    def as_field(self):
        return RadialProfileField(self.spec.n, self.radii, self.values)

    def eigenvalues(self):
        alpha, beta = _profile(self.spec, self.far_field_constant)
        return _offset_eigs(self.radii, self._v(), alpha, beta)[4:]

    def residual(self):
        return _rows(self.spec, self.radii, self._v(), self.far_field_constant)

    def defect_norm(self):
        """sup |f(lambda) - 1| over nodes 0..M-1."""
        return float(np.abs(self.residual()[:-1]).max())

    def to_dict(self):
        return {
            "spec": self.spec.to_dict(),
            "radii": self.radii.tolist(),
            "values": self.values.tolist(),
            "offset": self._v().tolist(),
            "residual_norm": float(self.residual_norm),
            "t": float(self.t),
            "far_field_constant": float(self.far_field_constant),
            "iterations": int(self.iterations),
        }

    @classmethod
    def from_dict(cls, data):
        spec = CurvatureSpec.from_dict(data["spec"])
        radii = np.asarray(data["radii"], dtype=float)
        values = np.asarray(data["values"], dtype=float)
        c = float(data["far_field_constant"])
        offset = data.get("offset")
        offset = None if offset is None else np.asarray(offset, dtype=float)
        sol = cls(radii, values, spec, np.nan, None, c,
                  int(data.get("iterations", 0)), float(data.get("t", spec.t)), offset)
        sol.residual_norm = float(np.abs(sol.residual()).max())
        sol.cone_certificate = spec.contains(_eigen_vectors(*sol.eigenvalues(), spec.n))
        return sol

    def to_csv(self):
        lam_rad, lam_tan = self.eigenvalues()
        lam = _eigen_vectors(lam_rad, lam_tan, self.n)
        fres = np.full(len(self.radii), np.nan)
        ok = self.spec.contains(lam)
        fres[ok] = self.spec.value(lam[ok]) - 1.0
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["r", "u", "lambda_rad", "lambda_tan", "f_residual"])
        for row in zip(self.radii, self.values, lam_rad, lam_tan, fres):
            writer.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def _certify(spec, radii, v, c, config, iterations, t):
    # re-evaluated from the final state, not carried over from the iteration
    values = from_w(_tail_w(spec, c, radii) + v, spec.n)
    sol = RadialSolution(radii, values, spec, np.nan, None, c, iterations, t, v)
    sol.residual_norm = float(np.abs(sol.residual()).max())
    sol.cone_certificate = spec.contains(_eigen_vectors(*sol.eigenvalues(), spec.n))
    ratio = values[-1] * radii[-1] ** (spec.n - 2) / c
    if abs(ratio - 1.0) > config.tail_tol:
        raise TailConditionError(
            "R_max does not reach the power-law tail: r^(n-2) u / c = %.6g at R_max" % ratio,
            ratio=float(ratio), R_max=float(radii[-1]))
    return sol


def _solve_linear(jac, rhs, tol):
    # rows, then columns, scaled to unit max before the condition estimate
    rows = np.abs(jac).max(axis=1)
    rows[rows == 0] = 1.0
    a = jac / rows[:, None]
    cols = np.abs(a).max(axis=0)
    cols[cols == 0] = 1.0
    a = a / cols[None, :]
    lu, piv = linalg.lu_factor(a, check_finite=False)
    anorm = np.abs(a).sum(axis=0).max()
    rcond, _ = linalg.lapack.dgecon(lu, anorm, norm="1")
    if not rcond > tol:
        raise SingularJacobian("near-singular Jacobian (rcond %.3g)" % rcond, rcond=float(rcond))
    return linalg.lu_solve((lu, piv), rhs / rows, check_finite=False) / cols


def _admissible(spec, radii, v, c, mu=None, target=0.0):
    try:
        return _rows(spec, radii, v, c, mu, target), None
    except ConeViolation as exc:
        return None, exc.details["nodes"]


def _iterate(spec, radii, v, c, config, bordered=True, target=0.0):
    """Damped Newton on the grid `radii`; returns (v, iterations).

    Failures carry the iterations spent in ``details["iterations"]``.
    """
    M = len(radii) - 1
    res, bad = _admissible(spec, radii, v, c, None, target)
    if res is None:
        raise ConeExit("starting state is not admissible", nodes=bad, iterations=0)
    norm = np.abs(res).max()
    mu = None
    if bordered and norm > config.polish_tol:
        mu = 0.0
        res = _rows(spec, radii, v, c, mu)
        norm = np.abs(res).max()
    iterations = 0
    while mu is not None or norm > config.newton_tol:
        if mu is not None and norm <= config.polish_tol:
            mu = None
            res = _rows(spec, radii, v, c)
            norm = np.abs(res).max()
            continue
        if iterations >= config.max_newton:
            raise MaxIterations("Newton did not converge", residual=float(norm),
                                iterations=iterations)
        step = _solve_linear(_jacobian(spec, radii, v, c, mu is not None), -res,
                             config.singular_tol)
        lam = 1.0
        for _ in range(config.max_halvings + 1):
            trial = v + lam * step[:M + 1]
            trial_mu = None if mu is None else mu + lam * step[M + 1]
            tres, bad = _admissible(spec, radii, trial, c, trial_mu, target)
            if tres is not None and np.abs(tres).max() < norm:
                break
            lam *= config.damping
        else:
            raise ConeExit("no acceptable damped step", nodes=bad if bad is not None else [],
                           residual=float(norm), iterations=iterations)
        v, mu, res, norm = trial, trial_mu, tres, np.abs(tres).max()
        iterations += 1
    return v, iterations


# the innermost stage of the domain continuation, in bubble widths 1/s
_CORE_WIDTHS = 2.5


def _staged(spec, radii, v0, c, config):
    # solve on [0, R_j] for R_j = R_max / 2^j, innermost first, with the
    # starting guess as Dirichlet data; each stage starts from the previous
    # stage's solution inside and the guess outside
    core = _CORE_WIDTHS / bubble_for_decay(spec, c).scale
    ends = [len(radii) - 1]
    while radii[ends[-1]] / 2.0 >= core and ends[-1] > 16:
        ends.append(int(np.searchsorted(radii, radii[ends[-1]] / 2.0)))
    v = v0.copy()
    total = 0
    for m in reversed(ends):
        target = 0.0 if m == len(radii) - 1 else v0[m]
        try:
            sol, its = _iterate(spec, radii[:m + 1], v[:m + 1], c, config, bordered=False,
                                target=target)
        except (ConeExit, MaxIterations) as exc:
            exc.details["iterations"] = total + exc.details["iterations"]
            exc.details["stage_radius"] = float(radii[m])
            raise
        v[:m + 1] = sol
        total += its
    return v, total


def newton_solve(spec, initial, config=None, t=None):
    """Damped Newton iteration for the radial equation of `spec`.

    `initial` holds nodal values u on ``config.radii``.  While the residual
    is above ``polish_tol`` the iteration runs on the bordered system (a
    free level shift mu, value and slope matched at R_max); below it, on
    the square system with mu = 0.  A step is accepted only if every node
    stays positive and in the cone and the sup-norm residual decreases;
    otherwise it is damped.

    Newton's basin on [0, R_max] shrinks like R_max^{-(n-2)/2} for
    perturbations localized in the core.  If the full-domain iteration
    fails, it is restarted from `initial` as a domain continuation: square
    Dirichlet problems on [0, R_max / 2^j], from about 2.5 bubble widths
    outwards.  The iteration count includes both attempts.
    """
    config = SolverConfig() if config is None else config
    radii = config.radii
    c = default_decay(spec) if config.far_field_constant is None else config.far_field_constant
    u = np.array(initial, dtype=float)
    if u.shape != radii.shape:
        raise ValueError("initial values must live on the %d-node grid" % len(radii))
    if np.any(~(u > 0.0)):
        raise ConeExit("initial state is not positive", nodes=np.flatnonzero(~(u > 0.0)))
    v0 = _offset(spec, radii, u, c)
    _, bad = _admissible(spec, radii, v0, c)
    if bad is not None:
        raise ConeExit("initial state is not admissible", nodes=bad)
    try:
        v, iterations = _iterate(spec, radii, v0, c, config)
    except (ConeExit, MaxIterations) as first:
        spent = first.details["iterations"]
        try:
            v, iterations = _staged(spec, radii, v0, c, config)
        except (ConeExit, MaxIterations) as exc:
            exc.details["iterations"] += spent
            raise
        iterations += spent
    return _certify(spec, radii, v, c, config, iterations, spec.t if t is None else t)


@dataclass
class ContinuationPath:
    steps: list = field(default_factory=list)    # (t, RadialSolution)
    monitor: list = field(default_factory=list)  # (sup u)(sup 1/u) per step

    @property
    def final(self):
        return self.steps[-1][1]

    @property
    def ts(self):
        return [t for t, _ in self.steps]

    def to_dict(self):
        return {"t": self.ts, "monitor": list(self.monitor), "final": self.final.to_dict()}


def _monitor(sol):
    return float(sol.values.max() / sol.values.min())


def continuation_solve(base, config=None):
    """Follow f_t from the semilinear case t = 0 to t = 1.

    The decay constant is held fixed along the path; t = 0 starts from the
    closed-form bubble of f_0 and each later step starts Newton from the
    previous solution.  Failed steps halve dt.
    """
    config = SolverConfig() if config is None else config
    base = base.base
    if config.far_field_constant is None:
        config = SolverConfig.from_dict({**config.to_dict(), "far_field_constant": default_decay(base)})
    c = config.far_field_constant
    spec0 = base.at(0.0)
    path = ContinuationPath()
    sol = newton_solve(spec0, bubble_on_grid(spec0, c, config), config, t=0.0)
    path.steps.append((0.0, sol))
    path.monitor.append(_monitor(sol))
    t, dt = 0.0, config.dt_initial
    while t < 1.0:
        if len(path.steps) > config.max_steps:
            raise ContinuationStall("step budget exhausted", t=t)
        t_new = t + dt
        if t_new > 1.0 - 1e-12:
            t_new = 1.0
        spec = base if t_new == 1.0 else base.at(t_new)
        try:
            sol = newton_solve(spec, path.final.values, config, t=t_new)
        except (ConeExit, MaxIterations, SingularJacobian) as exc:
            dt *= 0.5
            if dt < config.dt_min:
                raise ContinuationStall("dt underflow at t=%.6g (%s)" % (t_new, exc.code),
                                        t=t_new, cause=exc.to_dict()) from exc
            continue
        t = t_new
        path.steps.append((t, sol))
        path.monitor.append(_monitor(sol))
    return path
