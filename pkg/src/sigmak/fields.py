"""Positive scalar fields on domains of R^n with exact derivatives.

A field answers ``evaluate(points, order)`` with values, gradients and
Hessians.  ``points`` is either one point (shape ``(n,)``) or a stack
(shape ``(m, n)``); results follow the same convention.  ``order`` = 0 skips
the derivatives.

Analytic fields (bubbles, their sums and products, Kelvin transforms,
affine pullbacks, ...) carry closed-form chain-rule derivatives.  Gridded
fields use fourth-order central differences and are evaluated at interior
grid nodes only.
"""
import json
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, SingularCenter

__all__ = [
    "Domain",
    "ScalarField",
    "ConstantField",
    "GeneralizedBubble",
    "SumField",
    "ProductField",
    "AffinePullback",
    "KelvinField",
    "ExponentialField",
    "QuadraticField",
    "SphereAffineField",
    "RadialProfileField",
    "GriddedField",
    "field_from_dict",
    "save_field",
    "load_field",
]

# Kelvin transforms refuse to evaluate this close (relative to the radius)
# to their center.
KELVIN_EXCLUSION = 1e-8


@dataclass(frozen=True)
class Domain:
    """``kind`` is ``"all"``, ``"ball"`` (open ball) or ``"exterior"``."""

    kind: str = "all"
    center: tuple = ()
    radius: float = 0.0

    def contains(self, pts):
        if self.kind == "all":
            return np.ones(len(pts), dtype=bool)
        dist = np.linalg.norm(pts - np.asarray(self.center), axis=-1)
        if self.kind == "ball":
            return dist < self.radius
        return dist > self.radius

    def to_dict(self):
        if self.kind == "all":
            return {"kind": "all"}
        return {"kind": self.kind, "center": list(self.center), "radius": self.radius}


class ScalarField:
    """Base class.  Subclasses implement ``_evaluate(pts, order)`` on (m, n)."""

    provenance = "analytic"

    def __init__(self, n, domain=None):
        self.n = int(n)
        self.domain = domain if domain is not None else Domain()

    def contains(self, pts):
        return self.domain.contains(pts)

    def _points(self, points):
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[-1] != self.n:
            raise ValueError("points must have %d coordinates" % self.n)
        return pts, single

    def evaluate(self, points, order=2):
        pts, single = self._points(points)
        inside = self.contains(pts)
        if not np.all(inside):
            raise DomainError("point outside the field's domain",
                              points=pts[~inside][:5])
        out = self._evaluate(pts, order)
        if single:
            out = tuple(None if o is None else o[0] for o in out)
        return out

    def value(self, points):
        return self.evaluate(points, order=0)[0]

    def __call__(self, points):
        return self.value(points)

    def _evaluate(self, pts, order):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError("%s is not serializable" % type(self).__name__)


class ConstantField(ScalarField):
    def __init__(self, n, c):
        super().__init__(n)
        self.c = float(c)

    def _evaluate(self, pts, order):
        m = len(pts)
        v = np.full(m, self.c)
        if order == 0:
            return v, None, None
        return v, np.zeros((m, self.n)), np.zeros((m, self.n, self.n))

    def to_dict(self):
        return {"type": "constant", "n": self.n, "c": self.c}


class GeneralizedBubble(ScalarField):
    """a * (1 + s^2 |x - c|^2)^(-p); the standard bubble has p = (n - 2)/2."""

    def __init__(self, n, amplitude=1.0, scale=1.0, center=None, power=None):
        super().__init__(n)
        self.a = float(amplitude)
        self.s = float(scale)
        self.center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        self.p = 0.5 * (n - 2) if power is None else float(power)

    @property
    def is_standard(self):
        return self.p == 0.5 * (self.n - 2)

    def _evaluate(self, pts, order):
        d = pts - self.center
        s2 = self.s ** 2
        q = 1.0 + s2 * np.einsum("ij,ij->i", d, d)
        v = self.a * q ** (-self.p)
        if order == 0:
            return v, None, None
        c1 = -2.0 * self.p * s2 * self.a * q ** (-self.p - 1.0)
        g = c1[:, None] * d
        c2 = 4.0 * self.p * (self.p + 1.0) * s2 ** 2 * self.a * q ** (-self.p - 2.0)
        hess = c1[:, None, None] * np.eye(self.n) + c2[:, None, None] * np.einsum("ij,ik->ijk", d, d)
        return v, g, hess

    def to_dict(self):
        out = {"type": "bubble", "n": self.n, "a": self.a, "s": self.s,
               "center": self.center.tolist()}
        if not self.is_standard:
            out["type"] = "generalized_bubble"
            out["p"] = self.p
        return out


class SumField(ScalarField):
    """Linear combination sum_i w_i u_i (positivity is the caller's business)."""

    def __init__(self, terms, weights=None):
        terms = list(terms)
        super().__init__(terms[0].n)
        self.terms = terms
        self.weights = np.ones(len(terms)) if weights is None else np.asarray(weights, dtype=float)

    def contains(self, pts):
        ok = np.ones(len(pts), dtype=bool)
        for t in self.terms:
            ok &= t.contains(pts)
        return ok

    def _evaluate(self, pts, order):
        v = np.zeros(len(pts))
        g = None if order == 0 else np.zeros((len(pts), self.n))
        hess = None if order == 0 else np.zeros((len(pts), self.n, self.n))
        for w, term in zip(self.weights, self.terms):
            tv, tg, th = term._evaluate(pts, order)
            v += w * tv
            if order:
                g += w * tg
                hess += w * th
        return v, g, hess

    def to_dict(self):
        return {"type": "sum", "n": self.n, "weights": self.weights.tolist(),
                "terms": [t.to_dict() for t in self.terms]}


class ProductField(ScalarField):
    """prod_i u_i^{p_i} for positive factors; derivatives via log-derivatives."""

    def __init__(self, factors, powers=None):
        factors = list(factors)
        super().__init__(factors[0].n)
        self.factors = factors
        self.powers = np.ones(len(factors)) if powers is None else np.asarray(powers, dtype=float)

    def contains(self, pts):
        ok = np.ones(len(pts), dtype=bool)
        for f in self.factors:
            ok &= f.contains(pts)
        return ok

    def _evaluate(self, pts, order):
        logv = np.zeros(len(pts))
        dl = np.zeros((len(pts), self.n))
        hl = np.zeros((len(pts), self.n, self.n))
        for p, f in zip(self.powers, self.factors):
            fv, fg, fh = f._evaluate(pts, order)
            logv += p * np.log(fv)
            if order:
                r = fg / fv[:, None]
                dl += p * r
                hl += p * (fh / fv[:, None, None] - np.einsum("ij,ik->ijk", r, r))
        v = np.exp(logv)
        if order == 0:
            return v, None, None
        g = v[:, None] * dl
        hess = v[:, None, None] * (hl + np.einsum("ij,ik->ijk", dl, dl))
        return v, g, hess

    def to_dict(self):
        return {"type": "product", "n": self.n, "powers": self.powers.tolist(),
                "factors": [f.to_dict() for f in self.factors]}


class AffinePullback(ScalarField):
    """x -> c * u(M x + b): rotations, dilations and translations of a field."""

    def __init__(self, field, matrix=None, offset=None, amplitude=1.0):
        super().__init__(field.n)
        self.field = field
        self.matrix = np.eye(field.n) if matrix is None else np.asarray(matrix, dtype=float)
        self.offset = np.zeros(field.n) if offset is None else np.asarray(offset, dtype=float)
        self.amplitude = float(amplitude)

    @classmethod
    def dilation(cls, field, factor):
        """u_R(x) = R^{(n-2)/2} u(R x)."""
        n = field.n
        return cls(field, factor * np.eye(n), None, factor ** (0.5 * (n - 2)))

    def _map(self, pts):
        return pts @ self.matrix.T + self.offset

    def contains(self, pts):
        return self.field.contains(self._map(pts))

    def _evaluate(self, pts, order):
        v, g, hess = self.field._evaluate(self._map(pts), order)
        c = self.amplitude
        if order == 0:
            return c * v, None, None
        m = self.matrix
        return c * v, c * g @ m, c * np.einsum("ai,mab,bj->mij", m, hess, m)

    def to_dict(self):
        return {"type": "affine", "n": self.n, "matrix": self.matrix.tolist(),
                "offset": self.offset.tolist(), "amplitude": self.amplitude,
                "field": self.field.to_dict()}


class KelvinField(ScalarField):
    """u_{x,lam}(y) = (lam/|y-x|)^{n-2} u(x + lam^2 (y-x)/|y-x|^2)."""

    def __init__(self, field, center, radius):
        super().__init__(field.n)
        if radius <= 0:
            raise ValueError("Kelvin radius must be positive")
        self.field = field
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.domain = Domain("exterior", tuple(self.center), KELVIN_EXCLUSION * self.radius)

    def invert(self, pts):
        d = np.atleast_2d(pts) - self.center
        rho2 = np.einsum("ij,ij->i", d, d)
        return self.center + self.radius ** 2 * d / rho2[:, None]

    def contains(self, pts):
        ok = self.domain.contains(pts)
        if np.any(ok):
            ok[ok] = self.field.contains(self.invert(pts[ok]))
        return ok

    def evaluate(self, points, order=2):
        pts, _ = self._points(points)
        if np.any(~self.domain.contains(pts)):
            raise SingularCenter("Kelvin transform evaluated at its center",
                                 center=self.center)
        return super().evaluate(points, order)

    def _evaluate(self, pts, order):
        n, lam = self.n, self.radius
        d = pts - self.center
        rho2 = np.einsum("ij,ij->i", d, d)
        z = self.center + lam ** 2 * d / rho2[:, None]
        uv, ug, uh = self.field._evaluate(z, order)
        phi = (lam ** 2 / rho2) ** (0.5 * (n - 2))
        v = phi * uv
        if order == 0:
            return v, None, None
        eye = np.eye(n)
        dd = np.einsum("ij,ik->ijk", d, d)
        # derivatives of the factor phi = lam^{n-2} |d|^{2-n}
        gphi = -(n - 2) * (phi / rho2)[:, None] * d
        hphi = -(n - 2) * (phi / rho2)[:, None, None] * (eye - n * dd / rho2[:, None, None])
        # Jacobian of the inversion (symmetric) and its second derivatives
        jac = (lam ** 2 / rho2)[:, None, None] * (eye - 2.0 * dd / rho2[:, None, None])
        gw = np.einsum("mij,mi->mj", jac, ug)
        hw = np.einsum("mai,mab,mbj->mij", jac, uh, jac)
        # sum_k u_k d^2 z_k / dy_i dy_j
        ud = np.einsum("mk,mk->m", ug, d)
        c4 = -2.0 * lam ** 2 / rho2 ** 2
        c6 = 8.0 * lam ** 2 / rho2 ** 3
        hw += c4[:, None, None] * (np.einsum("mj,mi->mij", ug, d) + np.einsum("mi,mj->mij", ug, d)
                                    + ud[:, None, None] * eye)
        hw += (c6 * ud)[:, None, None] * dd
        g = phi[:, None] * gw + uv[:, None] * gphi
        hess = (phi[:, None, None] * hw + uv[:, None, None] * hphi
                + np.einsum("mi,mj->mij", gphi, gw) + np.einsum("mi,mj->mij", gw, gphi))
        return v, g, hess

    def to_dict(self):
        return {"type": "kelvin", "n": self.n, "center": self.center.tolist(),
                "radius": self.radius, "field": self.field.to_dict()}


class ExponentialField(ScalarField):
    """a * exp(w . x)."""

    def __init__(self, n, amplitude, wavevector):
        super().__init__(n)
        self.a = float(amplitude)
        self.w = np.asarray(wavevector, dtype=float)

    def _evaluate(self, pts, order):
        v = self.a * np.exp(pts @ self.w)
        if order == 0:
            return v, None, None
        return v, v[:, None] * self.w, v[:, None, None] * np.outer(self.w, self.w)

    def to_dict(self):
        return {"type": "exponential", "n": self.n, "a": self.a, "w": self.w.tolist()}


class QuadraticField(ScalarField):
    """c0 + c |x - p|^2 restricted to a ball (e.g. the touching paraboloids)."""

    def __init__(self, n, constant, coefficient, center=None, radius=np.inf):
        center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        domain = Domain() if np.isinf(radius) else Domain("ball", tuple(center), float(radius))
        super().__init__(n, domain)
        self.c0 = float(constant)
        self.c = float(coefficient)
        self.center = center

    def _evaluate(self, pts, order):
        d = pts - self.center
        v = self.c0 + self.c * np.einsum("ij,ij->i", d, d)
        if order == 0:
            return v, None, None
        return v, 2.0 * self.c * d, np.broadcast_to(2.0 * self.c * np.eye(self.n), (len(pts), self.n, self.n)).copy()

    def to_dict(self):
        out = {"type": "quadratic", "n": self.n, "c0": self.c0, "c": self.c,
               "center": self.center.tolist()}
        if self.domain.kind == "ball":
            out["radius"] = self.domain.radius
        return out


class SphereAffineField(ScalarField):
    """The sphere function xi -> c0 + b . xi written in stereographic coordinates.

    With xi = P^{-1}(y) = (2y, |y|^2 - 1)/(1 + |y|^2) this is the rational
    function (alpha + beta.y + gamma |y|^2) / (1 + |y|^2).
    """

    def __init__(self, n, c0, b):
        super().__init__(n)
        self.c0 = float(c0)
        self.b = np.asarray(b, dtype=float)
        if self.b.shape != (n + 1,):
            raise ValueError("b must have n + 1 components")
        if self.c0 <= np.linalg.norm(self.b):
            raise ValueError("need c0 > |b| for a positive sphere function")

    def _evaluate(self, pts, order):
        alpha = self.c0 - self.b[-1]
        beta = 2.0 * self.b[:-1]
        gamma = self.c0 + self.b[-1]
        r2 = np.einsum("ij,ij->i", pts, pts)
        q = 1.0 + r2
        num = alpha + pts @ beta + gamma * r2
        v = num / q
        if order == 0:
            return v, None, None
        gn = beta + 2.0 * gamma * pts
        gq = 2.0 * pts
        g = gn / q[:, None] - (num / q ** 2)[:, None] * gq
        eye = np.eye(self.n)
        hess = (2.0 * gamma / q)[:, None, None] * eye
        hess -= (np.einsum("mi,mj->mij", gn, gq) + np.einsum("mi,mj->mij", gq, gn)) / (q ** 2)[:, None, None]
        hess -= (2.0 * num / q ** 2)[:, None, None] * eye
        hess += (2.0 * num / q ** 3)[:, None, None] * np.einsum("mi,mj->mij", gq, gq)
        return v, g, hess

    def to_dict(self):
        return {"type": "sphere_affine", "n": self.n, "c0": self.c0, "b": self.b.tolist()}


class RadialProfileField(ScalarField):
    """Radial field from nodal values u(r_i), by even cubic-spline interpolation."""

    def __init__(self, n, radii, values, center=None):
        radii = np.asarray(radii, dtype=float)
        values = np.asarray(values, dtype=float)
        center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        super().__init__(n, Domain("ball", tuple(center), float(radii[-1]) * (1 + 1e-12)))
        self.radii, self.values, self.center = radii, values, center
        start = 1 if radii[0] == 0.0 else 0
        x = np.concatenate([-radii[start:][::-1], radii])
        y = np.concatenate([values[start:][::-1], values])
        self.spline = CubicSpline(x, y)

    def _evaluate(self, pts, order):
        d = pts - self.center
        r = np.sqrt(np.einsum("ij,ij->i", d, d))
        v = self.spline(r)
        if order == 0:
            return v, None, None
        g1 = self.spline(r, 1)
        g2 = self.spline(r, 2)
        safe = np.where(r > 0, r, 1.0)
        xhat = d / safe[:, None]
        grad = g1[:, None] * xhat
        outer = np.einsum("mi,mj->mij", xhat, xhat)
        eye = np.eye(self.n)
        tang = np.where(r > 0, g1 / safe, g2)
        hess = g2[:, None, None] * outer + tang[:, None, None] * (eye - outer)
        small = r == 0
        hess[small] = g2[small, None, None] * eye
        return v, grad, hess

    def to_dict(self):
        return {"type": "radial_profile", "n": self.n, "radii": self.radii.tolist(),
                "values": self.values.tolist(), "center": self.center.tolist()}


# fourth-order central differences
_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


class GriddedField(ScalarField):
    """Values on a uniform tensor grid (row-major), evaluated at grid nodes.

    Derivatives use fourth-order central differences, so only nodes at least
    two cells away from the grid boundary are in the domain.
    """

    provenance = "gridded"

    def __init__(self, n, origin, spacing, shape, values):
        super().__init__(n)
        self.origin = np.asarray(origin, dtype=float)
        self.spacing = float(spacing)
        self.shape = tuple(int(s) for s in shape)
        self.values = np.asarray(values, dtype=float).reshape(self.shape)
        if len(self.shape) != n or len(self.origin) != n:
            raise ValueError("grid shape/origin must have n entries")

    @classmethod
    def from_field(cls, field, origin, spacing, shape):
        axes = [origin[i] + spacing * np.arange(shape[i]) for i in range(field.n)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, field.n)
        return cls(field.n, origin, spacing, shape, field.value(mesh))

    def _index(self, pts):
        rel = (pts - self.origin) / self.spacing
        idx = np.rint(rel).astype(int)
        on_node = np.all(np.abs(rel - idx) < 1e-6, axis=-1)
        interior = np.all((idx >= 2) & (idx <= np.array(self.shape) - 3), axis=-1)
        return idx, on_node & interior

    def contains(self, pts):
        return self._index(pts)[1]

    def _take(self, idx, shift):
        j = idx + shift
        return self.values[tuple(j.T)]

    def _evaluate(self, pts, order):
        idx, _ = self._index(pts)
        v = self._take(idx, np.zeros(self.n, dtype=int))
        if order == 0:
            return v, None, None
        h = self.spacing
        m, n = len(pts), self.n
        eye = np.eye(n, dtype=int)
        offsets = np.arange(-2, 3)
        g = np.zeros((m, n))
        hess = np.zeros((m, n, n))
        for i in range(n):
            for a, off in enumerate(offsets):
                val = self._take(idx, off * eye[i])
                g[:, i] += _D1[a] * val
                hess[:, i, i] += _D2[a] * val / h ** 2
            for j in range(i + 1, n):
                acc = np.zeros(m)
                for a, oi in enumerate(offsets):
                    for b, oj in enumerate(offsets):
                        if _D1[a] == 0.0 or _D1[b] == 0.0:
                            continue
                        acc += _D1[a] * _D1[b] * self._take(idx, oi * eye[i] + oj * eye[j])
                hess[:, i, j] = hess[:, j, i] = acc / h ** 2
        return v, g / h, hess

    def to_dict(self):
        return {"type": "gridded", "n": self.n,
                "grid": {"origin": self.origin.tolist(), "spacing": self.spacing,
                         "shape": list(self.shape)},
                "values": self.values.ravel().tolist()}


def field_from_dict(data):
    kind = data.get("type", "gridded" if "grid" in data else None)
    n = int(data["n"])
    if kind == "constant":
        return ConstantField(n, data["c"])
    if kind == "bubble":
        return GeneralizedBubble(n, data["a"], data["s"], data.get("center"))
    if kind == "generalized_bubble":
        return GeneralizedBubble(n, data["a"], data["s"], data.get("center"), data["p"])
    if kind == "sum":
        return SumField([field_from_dict(t) for t in data["terms"]], data.get("weights"))
    if kind == "product":
        return ProductField([field_from_dict(f) for f in data["factors"]], data.get("powers"))
    if kind == "affine":
        return AffinePullback(field_from_dict(data["field"]), data["matrix"], data["offset"],
                              data["amplitude"])
    if kind == "kelvin":
        return KelvinField(field_from_dict(data["field"]), data["center"], data["radius"])
    if kind == "exponential":
        return ExponentialField(n, data["a"], data["w"])
    if kind == "quadratic":
        return QuadraticField(n, data["c0"], data["c"], data.get("center"),
                              data.get("radius", np.inf))
    if kind == "sphere_affine":
        return SphereAffineField(n, data["c0"], data["b"])
    if kind == "radial_profile":
        return RadialProfileField(n, data["radii"], data["values"], data.get("center"))
    if kind == "gridded":
        grid = data["grid"]
        return GriddedField(n, grid["origin"], grid["spacing"], grid["shape"], data["values"])
    raise ValueError("unknown field type %r" % kind)


def save_field(field, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(field.to_dict(), fh)
        fh.write("\n")


def load_field(path):
    with open(path, encoding="utf-8") as fh:
        return field_from_dict(json.load(fh))
