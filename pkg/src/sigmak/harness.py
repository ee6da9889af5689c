"""Numerical audits of the Harnack inequality and the lemmas behind it.

Everything here is a falsifier: extrema are located by seeded quasi-random
sampling followed by local refinement, and comparison statements are
checked on finite samples.  A passing audit is evidence, not proof.

Harnack constant
----------------
After rescaling to R = delta = 1 the bound reads
(sup_{B_1} u)(inf_{B_2} u) <= C(n).  Two branches of the argument produce
explicit constants.  With gamma the rescaled height at a near-maximum point:

* gamma <= 2^{n+8} n^4 gives the product <= (2 gamma)^{(n-2)/2}, i.e.
  C_low = (2^{n+9} n^4)^{(n-2)/2};
* otherwise the sphere-touching case gives the product <= 8^{n-2} r^{n-2}
  with r = 2^{n+6} n^4, i.e. C_main = 2^{(n+9)(n-2)} n^{4(n-2)}.

The remaining case is excluded by the choice of r, which needs
(10n+4)/(n-2)^2 2^{2n/(n-2)} / r < 1 and (n-2) 2^{n/2} r^{-1/2} <= 1/2;
both are checked by :func:`harnack_branches`.
"""
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.stats import norm, qmc

from .conformal import (MoebiusParams, invert_point, kelvin_transform, round_sphere_schouten,
                        schouten_batch, schouten_eigenvalues, stereographic_projection)
from .curvature import CurvatureSpec, compute_delta1, sample_cone
from .errors import DomainError, NonPositiveValue, NotFound, NotTouching
from .fields import (AffinePullback, ConstantField, ExponentialField, GeneralizedBubble,
                     QuadraticField, ScalarField, SumField)

__all__ = [
    "HarnackReport",
    "MovingSphereReport",
    "GradientBoundReport",
    "MaxPointReport",
    "harnack_branches",
    "harnack_constant",
    "harnack_rescale",
    "harnack_audit",
    "ball_points",
    "certify_delta_matrix",
    "gradient_bound_check",
    "critical_lambda",
    "fit_touching_paraboloid",
    "touching_gap",
    "touching_comparison",
    "max_point_inequality",
    "covariance_audit",
    "SUITES",
    "verify_suite",
]


# -- Harnack constant --------------------------------------------------------

def harnack_branches(n):
    """Both branch constants of C(n), the radius r and the checks on r."""
    if int(n) != n or n < 3:
        raise ValueError("n must be an integer >= 3")
    n = int(n)
    r = 2 ** (n + 6) * n ** 4
    main = (8 * r) ** (n - 2)  # exact integer
    low = float(2 ** (n + 9) * n ** 4) ** ((n - 2) / 2.0)
    return {
        "n": n,
        "r": r,
        "main": float(main),
        "low": low,
        "value": max(float(main), low),
        "case2_excluded": (10 * n + 4) / (n - 2) ** 2 * 2.0 ** (2 * n / (n - 2)) / r < 1.0,
        "gradient_step_ok": (n - 2) * 2.0 ** (n / 2) * r ** -0.5 <= 0.5,
    }


def harnack_constant(n):
    """C(n): the larger of the two branch constants."""
    return harnack_branches(n)["value"]


def harnack_rescale(u, R, delta=1.0):
    """x -> delta^{(n-2)/4} R^{(n-2)/2} u(R x).

    Turns a solution on B_{3R} with threshold delta into one on B_3 with
    threshold 1; the Harnack product picks up delta^{(n-2)/2} R^{n-2}.
    """
    n = u.n
    amp = delta ** ((n - 2) / 4.0) * R ** ((n - 2) / 2.0)
    return AffinePullback(u, R * np.eye(n), None, amp)


# -- sampling ----------------------------------------------------------------

def ball_points(n, radius, count, seed=0, center=None):
    """Scrambled Sobol points in the closed ball, plus `count` // 8 on its boundary."""
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    m = max(1, math.ceil(math.log2(max(count, 2))))
    raw = qmc.Sobol(d=n + 1, scramble=True, seed=seed).random_base2(m)[:count]
    raw = np.clip(raw, 1e-12, 1 - 1e-12)
    z = norm.ppf(raw[:, :n])
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    inner = z * (radius * raw[:, n:] ** (1.0 / n))
    shell = z[: max(1, count // 8)] * radius
    return center + np.vstack([inner, shell, np.zeros((1, n))])


def _sphere_dirs(n, count, rng):
    d = rng.standard_normal((count, n))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def _refine(u, x0, center, radius, sign):
    # local ascent (sign=+1) or descent (sign=-1) inside the closed ball
    def obj(x):
        v, g, _ = u.evaluate(x, order=1)
        return -sign * v, -sign * g

    cons = {"type": "ineq",
            "fun": lambda x: radius ** 2 - np.sum((x - center) ** 2),
            "jac": lambda x: -2.0 * (x - center)}
    try:
        res = optimize.minimize(obj, x0, jac=True, method="SLSQP", constraints=[cons],
                                options={"ftol": 1e-15, "maxiter": 200})
    except DomainError:
        return None
    x = res.x
    if np.sum((x - center) ** 2) > radius ** 2:
        x = center + (x - center) * (radius / np.linalg.norm(x - center))
    return x


def _extremum(u, center, radius, samples, seed, sign, keep=5):
    pts = ball_points(u.n, radius, samples, seed, center)
    vals = u.value(pts)
    order = np.argsort(-sign * vals)[:keep]
    best_x, best_v = pts[order[0]], vals[order[0]]
    for i in order:
        x = _refine(u, pts[i], center, radius, sign)
        if x is None:
            continue
        v = float(u.value(x))
        if sign * (v - best_v) > 0:
            best_x, best_v = x, v
    return float(best_v), best_x


# -- Harnack audit -----------------------------------------------------------

@dataclass
class HarnackReport:
    n: int
    R: float
    delta: float
    sup_value: float
    inf_value: float
    product: float
    bound: float
    passed: bool
    constant: float
    sup_point: np.ndarray
    inf_point: np.ndarray
    samples: int
    solution_certified: bool = None
    solution_defect: float = None

    def to_dict(self):
        return {
            "n": self.n, "R": self.R, "delta": self.delta,
            "sup_value": self.sup_value, "inf_value": self.inf_value,
            "sup_point": np.asarray(self.sup_point).tolist(),
            "inf_point": np.asarray(self.inf_point).tolist(),
            "product": self.product, "bound": self.bound, "constant": self.constant,
            "pass": bool(self.passed), "samples": self.samples,
            "solution_certified": self.solution_certified,
            "solution_defect": self.solution_defect,
        }


def _solution_defect(u, spec, radius, seed, count=512):
    pts = ball_points(u.n, radius, count, seed + 1)
    lam = schouten_eigenvalues(u, pts)
    inside = spec.contains(lam)
    if not np.all(inside):
        return np.inf
    return float(np.abs(spec.value(lam) - 1.0).max())


def harnack_audit(u, R, delta=None, n=None, spec=None, samples=100_000, seed=0,
                  solution_tol=1e-6):
    """Sample (sup_{B_R} u)(inf_{B_2R} u) and compare with C(n) delta^{(2-n)/2} R^{2-n}.

    `delta` defaults to :func:`certify_delta_matrix` of `spec`.  When `spec`
    is given the report also says whether u actually solves f = 1 on B_3R
    (checked at sample points to `solution_tol`).
    """
    n = u.n if n is None else int(n)
    if n != u.n:
        raise ValueError("field dimension %d does not match n=%d" % (u.n, n))
    if delta is None:
        if spec is None:
            raise ValueError("need delta or a spec to derive it from")
        delta = certify_delta_matrix(spec)
    origin = np.zeros(n)
    probe = ball_points(n, 3.0 * R, 4096, seed + 2)
    inside = u.contains(probe)
    if not np.all(inside):
        raise DomainError("field is not defined on B_3R", points=probe[~inside][:5])
    if np.any(u.value(probe) <= 0.0):
        raise NonPositiveValue("field is not positive on B_3R")
    sup_v, sup_x = _extremum(u, origin, R, samples, seed, +1)
    inf_v, inf_x = _extremum(u, origin, 2.0 * R, samples, seed, -1)
    c = harnack_constant(n)
    bound = c * delta ** ((2.0 - n) / 2.0) * R ** (2.0 - n)
    product = sup_v * inf_v
    report = HarnackReport(n, float(R), float(delta), sup_v, inf_v, product, bound,
                           bool(product <= bound), c, sup_x, inf_x, samples)
    if spec is not None:
        defect = _solution_defect(u, spec, 3.0 * R, seed)
        report.solution_defect = defect
        report.solution_certified = bool(defect <= solution_tol)
    return report


# -- delta of the matrix condition --------------------------------------------

def certify_delta_matrix(spec, tol=1e-12, starts=8, seed=0):
    """inf{|lambda| : f(lambda) = 1, lambda in Gamma}, by constrained minimization.

    For a symmetric matrix the Frobenius norm is the 2-norm of its
    eigenvalues, so this is the delta of the matrix condition.  SLSQP runs
    from b e and from random cone points pulled onto the level set.
    """
    rng = np.random.default_rng(seed)
    n = spec.n
    x0s = [np.ones(n) / spec.f_e()]
    for p in sample_cone(spec, starts - 1, rng):
        x0s.append(p / float(spec.value(p)))

    def cons_fun(x):
        return float(spec.value_or_zero(x)) - 1.0

    def cons_jac(x):
        if spec.contains(x):
            return spec.gradient(x)
        return np.zeros(n)

    best = np.inf
    for x0 in x0s:
        res = optimize.minimize(lambda x: (x @ x, 2.0 * x), x0, jac=True, method="SLSQP",
                                constraints=[{"type": "eq", "fun": cons_fun, "jac": cons_jac}],
                                options={"ftol": 1e-16, "maxiter": 500})
        x = res.x
        if spec.contains(x) and abs(float(spec.value(x)) - 1.0) <= 1e-10:
            # pull back onto the level set exactly (homogeneity)
            x = x / float(spec.value(x))
            best = min(best, float(np.linalg.norm(x)))
    if not np.isfinite(best):
        raise NotFound("level set f = 1 not reached")
    return best


# -- gradient bound lemma --------------------------------------------------------

@dataclass
class GradientBoundReport:
    a: float
    center: np.ndarray
    hypothesis_holds: bool
    hypothesis_margin: float
    hypothesis_samples: int
    worst_triple: dict
    conclusion_holds: bool
    conclusion_margin: float
    conclusion_samples: int

    @property
    def sound(self):
        """False only if the hypothesis held and the conclusion still failed."""
        return bool(self.conclusion_holds or not self.hypothesis_holds)

    def to_dict(self):
        return {
            "a": self.a, "center": np.asarray(self.center).tolist(),
            "hypothesis_holds": self.hypothesis_holds,
            "hypothesis_margin": self.hypothesis_margin,
            "hypothesis_samples": self.hypothesis_samples,
            "worst_triple": self.worst_triple,
            "conclusion_holds": self.conclusion_holds,
            "conclusion_margin": self.conclusion_margin,
            "conclusion_samples": self.conclusion_samples,
            "sound": self.sound,
        }


def _kelvin_values(u, x, lam, y):
    # (lam/|y-x|)^{n-2} u(x + lam^2 (y-x)/|y-x|^2), vectorized over rows
    d = y - x
    rho2 = np.einsum("ij,ij->i", d, d)
    z = x + (lam ** 2 / rho2)[:, None] * d
    return (lam ** 2 / rho2) ** ((u.n - 2) / 2.0) * u.value(z)


def gradient_bound_check(u, a, center=None, samples=20_000, seed=0, rtol=1e-10):
    """Sample the hypothesis and conclusion of the gradient bound lemma.

    Hypothesis: u_{x,lam}(y) <= u(y) for x in B_4a, 0 < lam < 2a,
    lam < |y - x|, y in B_8a.  Besides uniform triples, y is placed just
    outside B_lam(x) along +-grad u(x), where violations appear first.
    Conclusion: |grad u(x)| <= (n-2)/(2a) u(x) for |x| < a.
    """
    n = u.n
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    rng = np.random.default_rng(seed)
    probe = ball_points(n, 8.0 * a, 4096, seed, center)
    if not np.all(u.contains(probe)):
        raise DomainError("field is not defined on B_8a")
    if np.any(u.value(probe) <= 0.0):
        raise NonPositiveValue("field is not positive on B_8a")

    def in_ball(p, rad):
        return np.linalg.norm(p - center, axis=-1) < rad

    # uniform triples
    x = ball_points(n, 4.0 * a, samples, seed + 1, center)[:samples]
    x = x[in_ball(x, 4.0 * a)]
    lam = rng.uniform(0.0, 2.0 * a, len(x))
    lam = np.maximum(lam, 1e-6 * a)
    y = center + _sphere_dirs(n, len(x), rng) * (8.0 * a * rng.uniform(0, 1, (len(x), 1)) ** (1.0 / n))
    keep = np.linalg.norm(y - x, axis=1) > lam
    xs, lams, ys = [x[keep]], [lam[keep]], [y[keep]]
    # targeted: y just outside the sphere along +-grad u(x)
    m = max(1, samples // 8)
    xt = x[:m]
    lt = lam[:m]
    _, g, _ = u.evaluate(xt, order=1)
    gn = np.linalg.norm(g, axis=1, keepdims=True)
    dirs = np.where(gn > 0, g / np.where(gn > 0, gn, 1.0), _sphere_dirs(n, m, rng))
    for eta in (1e-3, 1e-2, 1e-1, 0.5):
        for sgn in (1.0, -1.0):
            yt = xt + sgn * dirs * (lt * (1.0 + eta))[:, None]
            ok = in_ball(yt, 8.0 * a)
            xs.append(xt[ok])
            lams.append(lt[ok])
            ys.append(yt[ok])
    x, lam, y = np.vstack(xs), np.concatenate(lams), np.vstack(ys)
    uy = u.value(y)
    margin = (uy - _kelvin_values(u, x, lam, y)) / uy
    worst = int(np.argmin(margin))
    hyp_margin = float(margin[worst])
    # conclusion on |x| < a
    xc = ball_points(n, a, 4096, seed + 3, center)
    xc = xc[in_ball(xc, a)]
    v, g, _ = u.evaluate(xc, order=1)
    cmargin = (n - 2) / (2.0 * a) - np.linalg.norm(g, axis=1) / v
    con_margin = float(cmargin.min())
    return GradientBoundReport(
        float(a), center, bool(hyp_margin >= -rtol), hyp_margin, int(len(x)),
        {"x": x[worst].tolist(), "lambda": float(lam[worst]), "y": y[worst].tolist()},
        bool(con_margin >= -rtol * (n - 2) / (2.0 * a)), con_margin, int(len(xc)))


# -- moving spheres ------------------------------------------------------------

@dataclass
class MovingSphereReport:
    center: np.ndarray
    lambda_x: float
    search_radius: float
    samples: int
    density: int
    margin: float
    lambda_grid: list = field(default_factory=list)
    lambda_margins: list = field(default_factory=list)

    def to_dict(self):
        return {"center": np.asarray(self.center).tolist(), "lambda_x": self.lambda_x,
                "search_radius": self.search_radius, "samples": self.samples,
                "density": self.density, "margin": self.margin}

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["lambda", "margin"])
        for lam, mar in zip(self.lambda_grid, self.lambda_margins):
            writer.writerow([repr(float(lam)), repr(float(mar))])
        return buf.getvalue()


def critical_lambda(u, x, search_radius, density=64, shells=48, rtol=1e-12, seed=0,
                    iterations=48):
    """Largest lam_bar with u_{x,lam} <= u on B_rho(x) minus B_lam(x) for lam <= lam_bar.

    The comparison is checked on `density` directions times `shells`
    geometrically spaced radii in (lam, rho), for eight lam values up to
    the candidate; lam_bar is located by bisection.  Raises NotFound if the
    comparison already fails for lam = 1e-6 rho.
    """
    n = u.n
    x = np.asarray(x, dtype=float)
    rho = float(search_radius)
    rng = np.random.default_rng(seed)
    dirs = _sphere_dirs(n, density, rng)
    if not np.all(u.contains(x + rho * dirs)):
        raise DomainError("field is not defined on the search ball")
    count = [0]

    def worst(lam):
        t = np.geomspace(1e-6, 1.0, shells)
        radii = lam + (rho - lam) * t
        y = (x + radii[:, None, None] * dirs[None]).reshape(-1, n)
        uy = u.value(y)
        kv = _kelvin_values(u, x, np.full(len(y), lam), y)
        count[0] += len(y)
        return float(((uy * (1.0 + rtol) - kv) / uy).min())

    def certified(lam_bar):
        margins = [worst(lam) for lam in lam_bar * np.arange(1, 9) / 8.0]
        return min(margins) >= 0.0, margins

    lo = 1e-6 * rho
    ok, _ = certified(lo)
    if not ok:
        raise NotFound("comparison fails already for tiny lambda", center=x)
    hi = rho * (1.0 - 1e-9)
    ok, _ = certified(hi)
    if ok:
        lo = hi
    else:
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            ok, _ = certified(mid)
            if ok:
                lo = mid
            else:
                hi = mid
    grid = list(lo * np.arange(1, 9) / 8.0)
    _, margins = certified(lo)
    return MovingSphereReport(x, float(lo), rho, count[0], density,
                              float(min(margins)), grid, margins)


# -- touching paraboloids -----------------------------------------------------------

def fit_touching_paraboloid(u, y0, rho, samples=20_000, seed=0):
    """xi = beta (rho^2 - |y - y0|^2) with beta maximal such that u >= xi on B_rho(y0).

    beta = min u / (rho^2 - |y - y0|^2); returns (xi, touching point).
    """
    n = u.n
    y0 = np.asarray(y0, dtype=float)
    pts = ball_points(n, rho, samples, seed, y0)
    pts = pts[np.linalg.norm(pts - y0, axis=1) < rho * (1.0 - 1e-9)]
    gap = lambda v, p: v / (rho ** 2 - np.sum((p - y0) ** 2, axis=-1))
    ratio = gap(u.value(pts), pts)
    best = pts[int(np.argmin(ratio))]

    def obj(y):
        v, g, _ = u.evaluate(y, order=1)
        q = rho ** 2 - np.sum((y - y0) ** 2)
        return v / q, g / q + 2.0 * v * (y - y0) / q ** 2

    res = optimize.minimize(obj, best, jac=True, method="BFGS", options={"gtol": 1e-13})
    y = res.x if np.linalg.norm(res.x - y0) < rho and res.fun <= obj(best)[0] else best
    beta = float(obj(y)[0])
    return QuadraticField(n, beta * rho ** 2, -beta, y0, rho), y


def touching_gap(u, xi, point):
    """Largest eigenvalue of A^u - A^xi at `point`."""
    p = np.atleast_2d(np.asarray(point, dtype=float))
    diff = schouten_batch(u, p)[0] - schouten_batch(xi, p)[0]
    return float(np.linalg.eigvalsh(diff).max())


def touching_comparison(u, xi, point, tol=1e-6):
    """A^u <= A^xi at a point where u touches xi from above.

    Raises NotTouching unless values and gradients agree to `tol`
    (relative).  The matrix inequality is checked to `tol` relative to
    |A^xi|.
    """
    point = np.asarray(point, dtype=float)
    uv, ug, _ = u.evaluate(point, order=1)
    xv, xg, _ = xi.evaluate(point, order=1)
    if abs(uv - xv) > tol * max(1.0, abs(uv)):
        raise NotTouching("values differ at the point", u=float(uv), xi=float(xv))
    if np.linalg.norm(ug - xg) > tol * max(1.0, np.linalg.norm(ug)):
        raise NotTouching("gradients differ at the point", gap=float(np.linalg.norm(ug - xg)))
    scale = max(1.0, float(np.abs(schouten_batch(xi, point[None])[0]).max()))
    return touching_gap(u, xi, point) <= tol * scale


# -- maximum point on the sphere -------------------------------------------------

@dataclass
class MaxPointReport:
    max_point: np.ndarray
    max_value: float
    value: float
    holds: bool

    def __bool__(self):
        return self.holds

    def to_dict(self):
        return {"max_point": np.asarray(self.max_point).tolist(), "max_value": self.max_value,
                "value": self.value, "holds": self.holds}


def max_point_inequality(u_sphere, spec, samples=20_000, seed=0, tol=1e-10):
    """f(u(x_max)^{-4/(n-2)} lambda(A_{g0})) <= 1 at the maximum of a sphere function.

    `u_sphere` is written in stereographic coordinates; the maximum is
    searched over sphere points away from the projection pole (and inside
    the field's domain), then refined in the chart.
    """
    n = u_sphere.n
    rng = np.random.default_rng(seed)
    xi = _sphere_dirs(n + 1, samples, rng)
    xi = xi[xi[:, -1] < 1.0 - 1e-6]
    y = stereographic_projection(xi)
    y = np.vstack([y, np.zeros((1, n))])
    y = y[u_sphere.contains(y)]
    vals = u_sphere.value(y)
    best = y[int(np.argmax(vals))]

    def obj(p):
        v, g, _ = u_sphere.evaluate(p, order=1)
        return -v, -g

    try:
        res = optimize.minimize(obj, best, jac=True, method="BFGS", options={"gtol": 1e-14})
        if u_sphere.contains(res.x[None])[0] and -res.fun >= vals.max():
            best = res.x
    except DomainError:
        pass
    umax = float(u_sphere.value(best))
    lam = round_sphere_schouten(n)
    value = float(spec.value(umax ** (-4.0 / (n - 2)) * lam))
    return MaxPointReport(best, umax, value, bool(value <= 1.0 + tol))


# -- property suites ------------------------------------------------------------------

def _random_bubble_sum(n, rng, terms=2):
    bubbles = [GeneralizedBubble(n, rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0),
                                 rng.uniform(-0.5, 0.5, n)) for _ in range(terms)]
    return SumField(bubbles)


def covariance_audit(seed=0, fields=100, moebius=10, points=100):
    """Kelvin covariance: lambda(A^{u_{x,lam}})(y) = lambda(A^u)(inverted y).

    Random bubble sums cycle through n = 3, 4, 5; each gets `moebius`
    random inversions and `points` sample points per inversion.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    checks = 0
    for i in range(fields):
        n = 3 + i % 3
        u = _random_bubble_sum(n, rng, rng.integers(1, 4))
        for _ in range(moebius):
            m = MoebiusParams(rng.uniform(-1, 1, n), rng.uniform(0.3, 2.0))
            ku = kelvin_transform(u, m)
            y = m.center + _sphere_dirs(n, points, rng) * rng.uniform(0.2, 3.0, (points, 1))
            lhs = np.sort(schouten_eigenvalues(ku, y), axis=1)
            rhs = np.sort(schouten_eigenvalues(u, invert_point(y, m)), axis=1)
            scale = np.abs(rhs).max(axis=1, keepdims=True)
            worst = max(worst, float((np.abs(lhs - rhs) / scale).max()))
            checks += points
    return {"pass": worst <= 1e-8, "worst_relative_error": worst, "checks": checks}


def _lemma2_fields(rng, count):
    out = []
    for _ in range(count):
        n = int(rng.integers(3, 6))
        kind = rng.integers(0, 3)
        if kind == 0:
            s = rng.uniform(0.2, 1.0)
            out.append((GeneralizedBubble(n, rng.uniform(0.5, 2.0), s, rng.uniform(-0.2, 0.2, n)),
                        0.5 / s * rng.uniform(0.3, 1.0)))
        elif kind == 1:
            s = rng.uniform(0.2, 1.0)
            b = [GeneralizedBubble(n, rng.uniform(0.5, 2.0), s, rng.uniform(-0.2, 0.2, n))
                 for _ in range(2)]
            out.append((SumField(b), 0.5 / s * rng.uniform(0.3, 1.0)))
        else:
            out.append((ConstantField(n, rng.uniform(0.5, 2.0)), rng.uniform(0.1, 1.0)))
    return out


def _lemma2_violators(rng, count):
    out = []
    for i in range(count):
        n = int(rng.integers(3, 6))
        a = rng.uniform(0.2, 0.5)
        if i % 2 == 0:
            w = _sphere_dirs(n, 1, rng)[0] * (n - 2) / a * rng.uniform(2.0, 6.0)
            out.append((ExponentialField(n, 1.0, w), a))
        else:
            s = 1.0 / a * rng.uniform(3.0, 10.0)
            out.append((GeneralizedBubble(n, 1.0, s, rng.uniform(-a, a, n) * 0.5), a))
    return out


def _suite_lemma2(seed, good=50, bad=10, samples=4000):
    """Hypothesis-certified fields satisfy the conclusion; violators are rejected."""
    rng = np.random.default_rng(seed)
    certified = violations = 0
    for u, a in _lemma2_fields(rng, good):
        rep = gradient_bound_check(u, a, samples=samples, seed=int(rng.integers(2 ** 31)))
        if rep.hypothesis_holds:
            certified += 1
            violations += not rep.conclusion_holds
    rejected = 0
    for u, a in _lemma2_violators(rng, bad):
        rep = gradient_bound_check(u, a, samples=samples, seed=int(rng.integers(2 ** 31)))
        rejected += not rep.hypothesis_holds
    return {"pass": violations == 0 and rejected == bad and certified == good,
            "certified": certified, "conclusion_violations": violations,
            "violators": bad, "violators_rejected": rejected}


def _suite_touching(seed, constructions=1000):
    """A^u <= A^xi whenever xi touches u from below with matching value and gradient."""
    rng = np.random.default_rng(seed)
    failures = refused = 0
    for i in range(constructions):
        n = int(rng.integers(3, 6))
        u = _random_bubble_sum(n, rng, int(rng.integers(1, 3)))
        p = rng.uniform(-0.5, 0.5, n)
        v, g, hess = u.evaluate(p)
        c = rng.uniform(1e-3, 1.0)
        # xi = u(p) + g.(y-p) + (y-p)^T (H/2 - c I)(y-p): second-order contact from below
        xi = _TaylorField(p, v, g, 0.5 * hess - c * np.eye(n))
        try:
            failures += not touching_comparison(u, xi, p, tol=1e-9)
        except NotTouching:
            refused += 1
    return {"pass": failures == 0 and refused == 0, "constructions": constructions,
            "failures": failures, "refused": refused}


class _TaylorField(ScalarField):
    """v + g.(y-p) + (y-p)^T Q (y-p)."""

    def __init__(self, p, v, g, q):
        super().__init__(len(p))
        self.p, self.v, self.g, self.q = np.asarray(p), float(v), np.asarray(g), np.asarray(q)

    def _evaluate(self, pts, order):
        d = pts - self.p
        val = self.v + d @ self.g + np.einsum("mi,ij,mj->m", d, self.q, d)
        if order == 0:
            return val, None, None
        grad = self.g + 2.0 * d @ self.q
        return val, grad, np.broadcast_to(2.0 * self.q, (len(pts),) + self.q.shape).copy()


def _builtin_specs(max_n=6):
    for n in range(3, max_n + 1):
        for k in range(1, n + 1):
            yield CurvatureSpec.sigma(n, k)
            yield CurvatureSpec.homotopy(n, k, 0.5)


def _suite_duality(seed, max_n=6):
    """delta_matrix * max_{|mu|=1} f(mu) = 1, i.e. delta_matrix = delta_1."""
    worst = 0.0
    rows = []
    for spec in _builtin_specs(max_n):
        dm = certify_delta_matrix(spec, seed=seed)
        d1 = compute_delta1(spec, seed=seed)
        err = abs(dm / d1 - 1.0)
        worst = max(worst, err)
        rows.append({"spec": spec.to_dict(), "delta_matrix": dm, "delta_1": d1})
    return {"pass": worst <= 1e-8, "worst_relative_error": worst, "specs": rows}


SUITES = {
    "invariance": covariance_audit,
    "lemma2": _suite_lemma2,
    "touching": _suite_touching,
    "duality": _suite_duality,
}


def verify_suite(name, seed=0):
    """Run one property suite (or ``"all"``); returns a dict with a ``pass`` key."""
    if name == "all":
        parts = {key: fn(seed) for key, fn in SUITES.items()}
        return {"pass": all(p["pass"] for p in parts.values()), "suites": parts}
    if name not in SUITES:
        raise KeyError("unknown suite %r (choose from %s, all)" % (name, ", ".join(SUITES)))
    return SUITES[name](seed)
