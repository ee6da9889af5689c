"""Elementary symmetric functions, Garding cones and curvature functions.

The curvature functions handled here are the family ``f = sigma_k^{1/k}`` on
the Garding cone ``Gamma_k`` and its deformations

    f_t(lam) = f(t * lam + (1 - t) * sigma_1(lam) * e),   0 <= t <= 1,

which connect the fully nonlinear equation (t = 1) to the semilinear scalar
curvature case (t = 0).  All functions are normalized to be homogeneous of
degree one.

Arrays of eigenvalue vectors are accepted everywhere; the last axis is the
eigenvalue index.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConeViolation

__all__ = [
    "elementary_symmetric",
    "sigma_k",
    "sigma_k_gradient",
    "in_gamma_k",
    "CurvatureSpec",
    "f_eval",
    "homotopy_eval",
    "homotopy_membership",
    "normalize_b",
    "compute_delta1",
    "concavity_probe",
    "check_hypotheses",
]


def elementary_symmetric(lam):
    """All elementary symmetric polynomials ``sigma_0 .. sigma_n`` of `lam`.

    Returns an array of shape ``lam.shape[:-1] + (n + 1,)``.  Built by the
    recurrence E_j <- E_j + x * E_{j-1}, one entry at a time.
    """
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    out = np.zeros(lam.shape[:-1] + (n + 1,))
    out[..., 0] = 1.0
    for i in range(n):
        x = lam[..., i, None]
        out[..., 1:i + 2] = out[..., 1:i + 2] + x * out[..., 0:i + 1]
    return out


def _check_k(k, n):
    if not 1 <= k <= n:
        raise ValueError("k must satisfy 1 <= k <= n (got k=%r, n=%r)" % (k, n))


def sigma_k(lam, k):
    """k-th elementary symmetric function of the eigenvalue vector(s) `lam`."""
    lam = np.asarray(lam, dtype=float)
    _check_k(k, lam.shape[-1])
    return elementary_symmetric(lam)[..., k]


def sigma_k_gradient(lam, k):
    """Gradient of sigma_k: component i is sigma_{k-1} of `lam` with entry i removed."""
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    _check_k(k, n)
    out = np.empty(lam.shape)
    for i in range(n):
        rest = np.delete(lam, i, axis=-1)
        out[..., i] = elementary_symmetric(rest)[..., k - 1]
    return out


def in_gamma_k(lam, k):
    """Membership in the Garding cone: sigma_j(lam) > 0 for all 1 <= j <= k."""
    lam = np.asarray(lam, dtype=float)
    _check_k(k, lam.shape[-1])
    sig = elementary_symmetric(lam)
    return np.all(sig[..., 1:k + 1] > 0.0, axis=-1)


@dataclass(frozen=True)
class CurvatureSpec:
    """A curvature function (f, Gamma) from the sigma_k family.

    ``kind`` is ``"sigma_k"`` or ``"homotopy"``; for the latter ``t`` is the
    deformation parameter and the base function is ``sigma_k^{1/k}``.
    """

    n: int
    k: int
    kind: str = "sigma_k"
    t: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError("dimension n must be an integer >= 3")
        _check_k(self.k, self.n)
        if self.kind not in ("sigma_k", "homotopy"):
            raise ValueError("kind must be 'sigma_k' or 'homotopy'")
        if not 0.0 <= self.t <= 1.0:
            raise ValueError("homotopy parameter t must lie in [0, 1]")
        if self.kind == "sigma_k" and self.t != 1.0:
            raise ValueError("sigma_k specs carry t = 1")

    @classmethod
    def sigma(cls, n, k):
        return cls(n=int(n), k=int(k))

    @classmethod
    def homotopy(cls, n, k, t):
        return cls(n=int(n), k=int(k), kind="homotopy", t=float(t))

    @property
    def base(self):
        return CurvatureSpec.sigma(self.n, self.k)

    def at(self, t):
        """The homotopy member of this spec's base family at parameter `t`."""
        return CurvatureSpec.homotopy(self.n, self.k, t)

    def to_dict(self):
        return {"n": self.n, "kind": self.kind, "k": self.k, "t": float(self.t)}

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {"n", "kind", "k", "t"}
        if unknown:
            raise ValueError("unknown CurvatureSpec keys: %s" % sorted(unknown))
        kind = data.get("kind", "sigma_k")
        t = float(data.get("t", 1.0))
        return cls(n=int(data["n"]), k=int(data["k"]), kind=kind, t=t)

    # -- evaluation -------------------------------------------------------

    def _shift(self, lam):
        lam = np.asarray(lam, dtype=float)
        if lam.shape[-1] != self.n:
            raise ValueError("eigenvalue vectors must have length n=%d" % self.n)
        if self.kind == "sigma_k":
            return lam
        s1 = lam.sum(axis=-1, keepdims=True)
        return self.t * lam + (1.0 - self.t) * s1

    def contains(self, lam):
        return in_gamma_k(self._shift(lam), self.k)

    def value(self, lam):
        """f(lam); raises ConeViolation if any vector lies outside the cone."""
        mu = self._shift(lam)
        inside = in_gamma_k(mu, self.k)
        if not np.all(inside):
            bad = np.argwhere(~np.atleast_1d(inside)).ravel()
            raise ConeViolation("eigenvalues outside Gamma", nodes=bad)
        return sigma_k(mu, self.k) ** (1.0 / self.k)

    def value_or_zero(self, lam):
        """f extended by zero outside the cone (f vanishes on its boundary)."""
        mu = self._shift(lam)
        inside = in_gamma_k(mu, self.k)
        sk = np.where(inside, sigma_k(mu, self.k), 1.0)
        return np.where(inside, sk ** (1.0 / self.k), 0.0)

    def gradient(self, lam):
        mu = self._shift(lam)
        inside = in_gamma_k(mu, self.k)
        if not np.all(inside):
            bad = np.argwhere(~np.atleast_1d(inside)).ravel()
            raise ConeViolation("eigenvalues outside Gamma", nodes=bad)
        sk = sigma_k(mu, self.k)
        g = (sk ** (1.0 / self.k - 1.0) / self.k)[..., None] * sigma_k_gradient(mu, self.k)
        if self.kind == "sigma_k":
            return g
        return self.t * g + (1.0 - self.t) * g.sum(axis=-1, keepdims=True)

    def f_e(self):
        """f evaluated at e = (1, ..., 1)."""
        return float(self.value(np.ones(self.n)))


def f_eval(spec, lam):
    return spec.value(lam)


def homotopy_eval(base, t, lam):
    return base.at(t).value(lam)


def homotopy_membership(base, t, lam):
    return base.at(t).contains(lam)


def normalize_b(spec):
    """The unique b > 0 with f(b e) = 1 (b = 1/f(e) by homogeneity)."""
    return 1.0 / spec.f_e()


def _sphere_ascent(spec, mu, iterations, tol):
    # projected gradient ascent of f on the unit sphere, Armijo backtracking
    mu = mu / np.linalg.norm(mu)
    val = float(spec.value(mu))
    step = 1.0
    for _ in range(iterations):
        g = spec.gradient(mu)
        g = g - np.dot(g, mu) * mu
        gnorm = np.linalg.norm(g)
        if gnorm < 1e-15:
            break
        step = min(4.0 * step, 1.0)
        while step > 1e-14:
            trial = mu + step * g
            trial /= np.linalg.norm(trial)
            if spec.contains(trial):
                tval = float(spec.value(trial))
                if tval >= val + 0.25 * step * gnorm ** 2:
                    break
            step *= 0.5
        else:
            break
        gain = tval - val
        mu, val = trial, tval
        if gain <= tol * tol * abs(val):
            break
    return mu, val


def compute_delta1(spec, tol=1e-8, samples=100_000, iterations=50, seed=0):
    """delta_1 = 1 / max{f(mu) : mu in closure(Gamma), |mu| = 1}.

    Then f(lam) < 1 whenever lam is in Gamma with |lam| < delta_1.  The
    maximum is located by seeded sampling on the unit sphere followed by
    projected gradient ascent from the best candidates.
    """
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((samples, spec.n))
    pts[samples // 2:] = np.abs(pts[samples // 2:])
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    vals = spec.value_or_zero(pts)
    order = np.argsort(vals)[::-1][:5]
    best = 0.0
    for idx in order:
        if vals[idx] <= 0.0:
            continue
        _, val = _sphere_ascent(spec, pts[idx], iterations, tol)
        best = max(best, val)
    if best <= 0.0:
        raise ConeViolation("no sample landed inside Gamma")
    return 1.0 / best


def fd_hessian(spec, lam):
    """Central finite-difference Hessian of f, h = max(1e-4, 1e-4 |lam|).

    `lam` may be a single vector or a stack of vectors (last axis = n); the
    whole stencil must lie inside the cone.
    """
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    h = np.maximum(1e-4, 1e-4 * np.linalg.norm(lam, axis=-1))[..., None, None]
    eye = np.eye(n)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    offs = [np.zeros(n)]
    offs += [s * eye[i] for i in range(n) for s in (1.0, -1.0)]
    offs += [si * eye[i] + sj * eye[j] for i, j in pairs
             for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
    stencil = lam[..., None, :] + h * np.array(offs)
    inside = spec.contains(stencil)
    if not np.all(inside):
        raise ConeViolation("finite-difference stencil leaves Gamma")
    vals = spec.value(stencil)
    h2 = h[..., 0, 0] ** 2
    hess = np.empty(lam.shape[:-1] + (n, n))
    f0 = vals[..., 0]
    for i in range(n):
        hess[..., i, i] = (vals[..., 1 + 2 * i] - 2.0 * f0 + vals[..., 2 + 2 * i]) / h2
    base = 1 + 2 * n
    for m, (i, j) in enumerate(pairs):
        q = vals[..., base + 4 * m: base + 4 * m + 4]
        hess[..., i, j] = hess[..., j, i] = (q[..., 0] - q[..., 1] - q[..., 2] + q[..., 3]) / (4.0 * h2)
    return hess


def concavity_probe(spec, lam, tol=1e-6):
    """True iff the finite-difference Hessian of f at `lam` has eigenvalues <= tol.

    Vectorized over stacks of points (returns a boolean array then).
    """
    hess = fd_hessian(spec, lam)
    return np.linalg.eigvalsh(hess).max(axis=-1) <= tol


def sample_cone(spec, count, rng, reach=0.6, cap=3.0):
    """Random points of Gamma kept away from the cone boundary.

    A direction v orthogonal to e is drawn, the boundary is located along
    e/sqrt(n) + rho v by bisection (rho capped at `cap`), and the sample is
    placed at a uniformly drawn fraction of at most `reach` of that distance.
    By convexity the sample then keeps a (1 - reach)-fraction of the
    clearance of e/sqrt(n).  Magnitudes lie in [10^0.5, 10^2], where the
    finite-difference Hessian error (which scales like 1/|lam|) is small.
    """
    n = spec.n
    center = np.ones(n) / np.sqrt(n)
    v = rng.standard_normal((count, n))
    v -= (v @ center)[:, None] * center
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    lo = np.zeros(count)
    hi = np.full(count, cap)
    edge = spec.contains(center + cap * v)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        inside = spec.contains(center + mid[:, None] * v)
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    rho = np.where(edge, cap, lo) * rng.uniform(0.0, reach, count)
    pts = center + rho[:, None] * v
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return pts * 10.0 ** rng.uniform(0.5, 2.0, (count, 1))


def check_hypotheses(spec, samples=2000, seed=0):
    """Sample-based checks of the structural hypotheses on (f, Gamma).

    Returns a dict mapping each hypothesis name to a boolean.
    """
    rng = np.random.default_rng(seed)
    n = spec.n
    pos = rng.uniform(0.01, 3.0, (samples, n))
    raw = rng.standard_normal((samples, n)) * 2.0
    inside = raw[spec.contains(raw)]
    pts = sample_cone(spec, samples, rng)
    res = {}
    res["cone_contains_positive_orthant"] = bool(np.all(spec.contains(pos)))
    res["cone_within_halfspace"] = bool(np.all(inside.sum(axis=1) > 0.0))
    # convexity of the cone along chords
    a, b = inside[: len(inside) // 2], inside[len(inside) // 2: 2 * (len(inside) // 2)]
    w = rng.uniform(0.0, 1.0, (len(a), 1))
    res["cone_convex"] = bool(np.all(spec.contains(w * a + (1 - w) * b)))
    scale = np.exp(rng.uniform(-5, 5, (len(inside), 1)))
    res["cone_is_cone"] = bool(np.all(spec.contains(scale * inside)))
    perm = np.array([rng.permutation(n) for _ in range(len(pts))])
    permuted = np.take_along_axis(pts, perm, axis=1)
    res["cone_symmetric"] = bool(np.all(spec.contains(permuted)))
    fv = spec.value(pts)
    res["f_symmetric"] = bool(np.allclose(spec.value(permuted), fv, rtol=1e-13, atol=0))
    s = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), len(pts)))
    res["f_homogeneous"] = bool(np.allclose(spec.value(s[:, None] * pts), s * fv, rtol=1e-12, atol=0))
    res["f_positive"] = bool(np.all(fv > 0.0))
    res["f_gradient_positive"] = bool(np.all(spec.gradient(pts) > 0.0))
    res["f_concave"] = bool(np.all(concavity_probe(spec, pts)))
    # f -> 0 approaching the boundary along a segment leaving the cone
    outside = raw[~spec.contains(raw)][:50]
    vanish = []
    for p, q in zip(pts[:50], outside):
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if spec.contains((1 - mid) * p + mid * q):
                lo = mid
            else:
                hi = mid
        edge = (1 - lo) * p + lo * q
        # sigma_k has a simple zero there, so f ~ dist^(1/k)
        vanish.append(float(spec.value(edge)) <= 1e-2 * float(spec.value(p)))
    res["f_vanishes_on_boundary"] = bool(all(vanish))
    res["f_unbounded_on_rays"] = bool(np.all(spec.value(1e12 * pts) > 1e6))
    return res
