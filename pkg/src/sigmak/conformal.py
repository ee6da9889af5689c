"""The conformal Schouten operator and the transforms that preserve it.

For a positive function u on a domain of R^n (n >= 3) the matrix

    A^u = -2/(n-2) u^{-(n+2)/(n-2)} D^2 u
          + 2n/(n-2)^2 u^{-2n/(n-2)} Du (x) Du
          - 2/(n-2)^2 u^{-2n/(n-2)} |Du|^2 I

has as eigenvalues the Schouten eigenvalues of the metric u^{4/(n-2)} g_flat,
measured in that metric.  Kelvin transforms and dilations act on u without
changing those eigenvalues (after relocating the point), which is what the
moving-sphere arguments rely on.
"""
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

from .errors import NonPositiveValue
from .fields import GeneralizedBubble, KelvinField, ProductField

__all__ = [
    "SchoutenMatrix",
    "MoebiusParams",
    "BubbleParams",
    "schouten_from_derivatives",
    "schouten_batch",
    "schouten_eigenvalues",
    "schouten_flat",
    "schouten_conformal_change",
    "round_sphere_schouten",
    "kelvin_transform",
    "invert_point",
    "stereographic_factor",
    "stereographic_projection",
    "inverse_stereographic",
    "stereographic_pull",
    "stereographic_push",
    "bubble_field",
    "bubble_kappa",
    "bubble_exact",
    "radial_schouten",
]


@dataclass(frozen=True)
class SchoutenMatrix:
    entries: np.ndarray

    @cached_property
    def eigenvalues(self):
        return np.linalg.eigvalsh(self.entries)


@dataclass(frozen=True)
class MoebiusParams:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("Moebius radius must be positive")


@dataclass(frozen=True)
class BubbleParams:
    """u(x) = amplitude * (1 + scale^2 |x - center|^2)^{-(n-2)/2}."""

    amplitude: float
    scale: float
    center: np.ndarray = dc_field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if not (self.amplitude > 0 and self.scale > 0):
            raise ValueError("bubble amplitude and scale must be positive")

    @property
    def n(self):
        return len(self.center)

    def to_dict(self):
        return {"type": "bubble", "a": self.amplitude, "s": self.scale,
                "center": np.asarray(self.center).tolist()}


def schouten_from_derivatives(v, g, hess):
    """A^u from stacked values (m,), gradients (m, n) and Hessians (m, n, n)."""
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0.0):
        raise NonPositiveValue("conformal factor must be positive", values=v[v <= 0.0][:5])
    n = g.shape[-1]
    c = n - 2.0
    p1 = v ** (-(n + 2.0) / c)
    p2 = v ** (-2.0 * n / c)
    gg = np.einsum("...i,...j->...ij", g, g)
    sq = np.einsum("...i,...i->...", g, g)
    out = (-2.0 / c) * p1[..., None, None] * hess + (2.0 * n / c ** 2) * p2[..., None, None] * gg
    out -= (2.0 / c ** 2) * (p2 * sq)[..., None, None] * np.eye(n)
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def schouten_batch(u, points):
    """A^u at a stack of points, shape (m, n, n)."""
    v, g, hess = u.evaluate(np.atleast_2d(points))
    return schouten_from_derivatives(v, g, hess)


def schouten_eigenvalues(u, points):
    """Ascending eigenvalues of A^u at a stack of points, shape (m, n)."""
    return np.linalg.eigvalsh(schouten_batch(u, points))


def schouten_flat(u, p):
    """A^u(p) for a single point on the flat background."""
    v, g, hess = u.evaluate(np.asarray(p, dtype=float))
    return SchoutenMatrix(schouten_from_derivatives(v, g, hess))


def stereographic_factor(n):
    """v0(y) = (2 / (1 + |y|^2))^{(n-2)/2}: the round metric is v0^{4/(n-2)} g_flat."""
    return GeneralizedBubble(n, amplitude=2.0 ** (0.5 * (n - 2)), scale=1.0)


def stereographic_projection(xi):
    """Projection from the north pole of S^n onto R^n (south pole -> 0)."""
    xi = np.asarray(xi, dtype=float)
    return xi[..., :-1] / (1.0 - xi[..., -1:])


def inverse_stereographic(y):
    y = np.asarray(y, dtype=float)
    r2 = np.sum(y * y, axis=-1, keepdims=True)
    return np.concatenate([2.0 * y, r2 - 1.0], axis=-1) / (1.0 + r2)


def round_sphere_schouten(n, point=None):
    """Eigenvalues of the round-sphere Schouten tensor, from A^{v0} at `point`.

    The stereographic factor v0 realizes the round metric, so its A-matrix
    gives lambda(A_{g0}) directly (any sample point; default the origin).
    """
    point = np.zeros(n) if point is None else np.asarray(point, dtype=float)
    return schouten_flat(stereographic_factor(n), point).eigenvalues


def _covariant_sphere(u, y):
    # Transformation law written with covariant derivatives of the round
    # metric g0 = phi^2 g_flat, phi = 2/(1+|y|^2), in stereographic charts.
    n = u.n
    v, g, hess = u.evaluate(np.atleast_2d(y))
    y = np.atleast_2d(y)
    r2 = np.einsum("ij,ij->i", y, y)
    phi = 2.0 / (1.0 + r2)
    domega = -2.0 * y / (1.0 + r2)[:, None]  # grad log(phi)
    eye = np.eye(n)
    cov = hess - np.einsum("mi,mj->mij", domega, g) - np.einsum("mi,mj->mij", g, domega)
    cov += np.einsum("mk,mk->m", domega, g)[:, None, None] * eye
    c = n - 2.0
    sq_g0 = np.einsum("mi,mi->m", g, g) / phi ** 2
    g0 = (phi ** 2)[:, None, None] * eye
    lam0 = round_sphere_schouten(n)[0]
    a_hat = (-2.0 / c) * cov / v[:, None, None]
    a_hat += (2.0 * n / c ** 2) * np.einsum("mi,mj->mij", g, g) / (v ** 2)[:, None, None]
    a_hat -= (2.0 / c ** 2) * (sq_g0 / v ** 2)[:, None, None] * g0
    a_hat += lam0 * g0
    # matrix in an orthonormal frame of u^{4/(n-2)} g0
    scale = v ** (4.0 / c) * phi ** 2
    out = a_hat / scale[:, None, None]
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def schouten_conformal_change(u, background, p):
    """Schouten matrix of u^{4/(n-2)} g in an orthonormal frame of that metric.

    ``background`` is ``"flat"`` or ``"round_sphere"``; for the sphere, `u` is
    a sphere function written in stereographic coordinates and `p` is a
    stereographic point.
    """
    if background == "flat":
        return schouten_flat(u, p)
    if background == "round_sphere":
        if np.any(u.value(np.atleast_2d(p)) <= 0.0):
            raise NonPositiveValue("conformal factor must be positive")
        return SchoutenMatrix(_covariant_sphere(u, p)[0])
    raise ValueError("background must be 'flat' or 'round_sphere'")


def kelvin_transform(u, m):
    """u_{x,lam}(y) = (lam/|y-x|)^{n-2} u(x + lam^2 (y-x)/|y-x|^2)."""
    return KelvinField(u, m.center, m.radius)


def invert_point(y, m):
    """The inversion y -> x + lam^2 (y-x)/|y-x|^2 (an involution)."""
    y = np.asarray(y, dtype=float)
    d = y - m.center
    return m.center + m.radius ** 2 * d / np.sum(d * d, axis=-1, keepdims=True)


def stereographic_pull(u_sphere):
    """v = (u o P^{-1}) v0 on R^n, so that v^{4/(n-2)} g_flat = P_*(u^{4/(n-2)} g0)."""
    return ProductField([u_sphere, stereographic_factor(u_sphere.n)], [1.0, 1.0])


def stereographic_push(v_flat):
    """Inverse of :func:`stereographic_pull` (sphere function in stereographic coordinates)."""
    return ProductField([v_flat, stereographic_factor(v_flat.n)], [1.0, -1.0])


def bubble_field(b):
    return GeneralizedBubble(b.n, b.amplitude, b.scale, b.center)


def bubble_kappa(n, s=1.0):
    """The constant kappa with lambda(A^u) = kappa e for the unit-amplitude bubble.

    Read off from A^u at the bubble's center.
    """
    eig = schouten_flat(GeneralizedBubble(n, 1.0, s), np.zeros(n)).eigenvalues
    return float(eig.mean())


def bubble_exact(spec, s=1.0, center=None):
    """Bubble parameters solving f(lambda(A^u)) = 1 identically.

    With lambda(A^{a u}) = a^{-4/(n-2)} kappa e, the amplitude is
    a = (kappa f(e))^{(n-2)/4}.
    """
    n = spec.n
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    kappa = bubble_kappa(n, s)
    a = (kappa * spec.f_e()) ** ((n - 2) / 4.0)
    return BubbleParams(a, float(s), center)


def radial_schouten(u, du, d2u, r, n):
    """Radial and tangential eigenvalues of A^u for u = u(|x|).

    The tangential eigenvalue has multiplicity n - 1.  At r = 0 the quotient
    u'/r is replaced by its limit u''(0).
    """
    u, du, d2u, r = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (u, du, d2u, r)))
    c = n - 2.0
    p1 = u ** (-(n + 2.0) / c)
    p2 = u ** (-2.0 * n / c)
    safe = np.where(r > 0, r, 1.0)
    du_r = np.where(r > 0, du / safe, d2u)
    lam_rad = -(2.0 / c) * p1 * d2u + (2.0 * (n - 1) / c ** 2) * p2 * du ** 2
    lam_tan = -(2.0 / c) * p1 * du_r - (2.0 / c ** 2) * p2 * du ** 2
    return lam_rad, lam_tan
