import numpy as np
import pytest

from sigmak.conformal import (BubbleParams, MoebiusParams, bubble_exact, bubble_field, bubble_kappa,
                              inverse_stereographic, invert_point, kelvin_transform,
                              radial_schouten, round_sphere_schouten, schouten_conformal_change,
                              schouten_eigenvalues, schouten_flat, stereographic_factor,
                              stereographic_projection, stereographic_pull, stereographic_push)
from sigmak.curvature import CurvatureSpec
from sigmak.errors import NonPositiveValue, SingularCenter
from sigmak.fields import (AffinePullback, ConstantField, ExponentialField, GeneralizedBubble,
                           ProductField, SphereAffineField, SumField)


def direct_schouten(u, x):
    # the defining formula, entry by entry
    v, g, h = u.evaluate(x)
    n = u.n
    c = n - 2
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = (-2 / c * v ** (-(n + 2) / c) * h[i, j]
                         + 2 * n / c ** 2 * v ** (-2 * n / c) * g[i] * g[j]
                         - (i == j) * 2 / c ** 2 * v ** (-2 * n / c) * g @ g)
    return out


def reflection(d):
    d = d / np.linalg.norm(d)
    return np.eye(len(d)) - 2 * np.outer(d, d)


class TestFlatSchouten:
    def test_constant_is_zero(self):
        assert np.all(schouten_flat(ConstantField(4, 1.0), np.zeros(4)).entries == 0)

    def test_bubble_center_n3(self):
        a = schouten_flat(GeneralizedBubble(3), np.zeros(3)).entries
        assert np.allclose(a, 2 * np.eye(3), atol=1e-14)

    def test_matches_entrywise_formula(self):
        u = SumField([GeneralizedBubble(4, 1.0, 0.8, np.full(4, 0.2)), ExponentialField(4, 0.3, [0.1, 0.2, 0, -0.1])])
        for x in np.random.default_rng(0).uniform(-1, 1, (5, 4)):
            assert np.allclose(schouten_flat(u, x).entries, direct_schouten(u, x), rtol=1e-13, atol=1e-13)

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_scaling(self, n):
        u = GeneralizedBubble(n, 1.2, 0.6, None, power=1.1)
        x = np.linspace(0.1, 0.5, n)
        base = schouten_flat(u, x).entries
        for c in (0.01, 3.0, 100.0):
            scaled = schouten_flat(SumField([u], [c]), x).entries
            assert np.allclose(scaled, c ** (-4 / (n - 2)) * base, rtol=1e-12)

    def test_rotation_and_dilation(self):
        n = 4
        rng = np.random.default_rng(1)
        u = SumField([GeneralizedBubble(n, 1.0, 1.0, rng.normal(size=n)), GeneralizedBubble(n, 0.5, 2.0)])
        q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        x = rng.normal(size=n) * 0.3
        rotated = AffinePullback(u, q)
        assert np.allclose(schouten_flat(rotated, x).entries,
                           q.T @ schouten_flat(u, q @ x).entries @ q, atol=1e-12)
        dil = AffinePullback.dilation(u, 2.5)
        assert np.allclose(schouten_flat(dil, x).eigenvalues,
                           schouten_flat(u, 2.5 * x).eigenvalues, rtol=1e-11)

    def test_nonpositive(self):
        with pytest.raises(NonPositiveValue):
            schouten_flat(ConstantField(3, -1.0), np.zeros(3))

    def test_trace_is_laplacian(self):
        n = 5
        u = GeneralizedBubble(n, 1.0, 1.3, None, power=0.8)
        x = np.array([0.2, 0.1, -0.4, 0.3, 0.0])
        v, g, h = u.evaluate(x)
        tr = np.trace(schouten_flat(u, x).entries)
        assert tr == pytest.approx(-2 / (n - 2) * v ** (-(n + 2) / (n - 2)) * np.trace(h), rel=1e-12)


class TestBubbles:
    @pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
    def test_constant_eigenvalues(self, n):
        u = GeneralizedBubble(n, 1.0, 1.7, np.linspace(-1, 1, n))
        pts = np.random.default_rng(n).uniform(-3, 3, (200, n))
        eig = schouten_eigenvalues(u, pts)
        kappa = 2 * 1.7 ** 2
        assert bubble_kappa(n, 1.7) == pytest.approx(kappa, rel=1e-13)
        assert np.allclose(eig, kappa, rtol=1e-10)

    def test_nonstandard_power_is_not_constant(self):
        u = GeneralizedBubble(4, 1.0, 1.0, None, power=1.5)
        eig = schouten_eigenvalues(u, np.array([[0.0] * 4, [1.0, 0, 0, 0]]))
        assert np.ptp(eig) > 0.1

    @pytest.mark.parametrize("n,k", [(3, 1), (3, 2), (4, 2), (5, 3), (6, 6)])
    def test_exact_profile_solves(self, n, k):
        spec = CurvatureSpec.sigma(n, k)
        b = bubble_exact(spec, s=0.6)
        pts = np.random.default_rng(2).uniform(-4, 4, (100, n))
        f = spec.value(schouten_eigenvalues(bubble_field(b), pts))
        assert np.all(np.abs(f - 1) < 1e-12)

    def test_params(self):
        with pytest.raises(ValueError):
            BubbleParams(0.0, 1.0)
        assert BubbleParams(1.0, 2.0, np.zeros(4)).n == 4


class TestKelvin:
    def test_bubble_fixed_by_its_sphere(self):
        # (1 + s^2 |x|^2)^{-(n-2)/2} is fixed by inversion in |x| = 1/s
        for n in (3, 4, 6):
            u = GeneralizedBubble(n, 1.0, 2.0)
            k = kelvin_transform(u, MoebiusParams(np.zeros(n), 0.5))
            pts = np.random.default_rng(n).uniform(-2, 2, (50, n))
            assert np.allclose(k.value(pts), u.value(pts), rtol=1e-13)

    def test_involution(self):
        n = 4
        u = SumField([GeneralizedBubble(n, 1.0, 0.7, np.full(n, 0.3)), ConstantField(n, 0.2)])
        m = MoebiusParams(np.array([0.1, -0.2, 0.3, 0.0]), 1.3)
        twice = kelvin_transform(kelvin_transform(u, m), m)
        pts = np.random.default_rng(3).uniform(-2, 2, (50, n))
        for a, b in zip(twice.evaluate(pts), u.evaluate(pts)):
            assert np.allclose(a, b, rtol=1e-10, atol=1e-12)
        y = pts[0]
        assert np.allclose(invert_point(invert_point(y, m), m), y)

    def test_covariance(self):
        n = 3
        u = SumField([GeneralizedBubble(n, 1.0, 0.7, np.full(n, 0.3)), GeneralizedBubble(n, 0.4, 1.5, np.ones(n))])
        m = MoebiusParams(np.array([0.5, 0.0, -0.2]), 0.8)
        k = kelvin_transform(u, m)
        for y in np.random.default_rng(4).uniform(-2, 2, (20, n)):
            yhat = invert_point(y, m)
            o = reflection(y - m.center)
            lhs = schouten_flat(k, y).entries
            rhs = o @ schouten_flat(u, yhat).entries @ o
            assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10)

    def test_center(self):
        k = kelvin_transform(GeneralizedBubble(3), MoebiusParams(np.ones(3), 1.0))
        with pytest.raises(SingularCenter):
            k.evaluate(np.ones(3))
        with pytest.raises(ValueError):
            MoebiusParams(np.zeros(3), 0.0)


class TestSphere:
    @pytest.mark.parametrize("n", [3, 4, 5, 8])
    def test_round_sphere_eigenvalues(self, n):
        # v0 is a bubble with a = 2^{(n-2)/2}, s = 1, so kappa a^{-4/(n-2)} = 2/4
        for p in (None, np.linspace(-1, 2, n)):
            assert np.allclose(round_sphere_schouten(n, p), 0.5, rtol=1e-12)

    def test_projection_inverse(self):
        y = np.random.default_rng(5).normal(size=(30, 4))
        xi = inverse_stereographic(y)
        assert np.allclose(np.linalg.norm(xi, axis=1), 1)
        assert np.allclose(stereographic_projection(xi), y)

    def test_factor_is_conformal_factor(self):
        n = 3
        v0 = stereographic_factor(n)
        y = np.array([0.3, -0.4, 0.2])
        h = 1e-6
        jac = np.array([(inverse_stereographic(y + h * e) - inverse_stereographic(y - h * e)) / (2 * h)
                        for e in np.eye(n)])
        metric = jac @ jac.T
        assert np.allclose(metric, v0.value(y) ** (4 / (n - 2)) * np.eye(n), atol=1e-8)

    def test_pull_push_inverse(self):
        n = 4
        u = SphereAffineField(n, 2.0, np.array([0.3, -0.2, 0.1, 0.5, -0.4]))
        back = stereographic_push(stereographic_pull(u))
        pts = np.random.default_rng(6).uniform(-2, 2, (20, n))
        for a, b in zip(back.evaluate(pts), u.evaluate(pts)):
            assert np.allclose(a, b, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_two_paths_agree(self, n):
        rng = np.random.default_rng(n)
        b = rng.uniform(-0.4, 0.4, n + 1)
        u = ProductField([SphereAffineField(n, 1.5, b)], [-0.5 * (n - 2)])
        pts = rng.uniform(-2, 2, (20, n))
        flat = schouten_eigenvalues(stereographic_pull(u), pts)
        direct = np.array([schouten_conformal_change(u, "round_sphere", p).eigenvalues for p in pts])
        assert np.allclose(flat, direct, rtol=1e-10)
        # these sphere functions are pulled-back bubbles: constant eigenvalues
        assert np.ptp(flat) < 1e-10 * flat.max()

    def test_background_name(self):
        with pytest.raises(ValueError):
            schouten_conformal_change(ConstantField(3, 1.0), "hyperbolic", np.zeros(3))
        flat = schouten_conformal_change(ConstantField(3, 1.0), "flat", np.zeros(3))
        assert np.all(flat.entries == 0)


class TestRadial:
    def test_constant(self):
        lr, lt = radial_schouten(1.0, 0.0, 0.0, 0.7, 4)
        assert lr == 0 and lt == 0

    @pytest.mark.parametrize("n", [3, 4, 6])
    def test_matches_full_matrix(self, n):
        u = SumField([GeneralizedBubble(n, 1.0, 1.0, None, power=1.3), GeneralizedBubble(n, 0.5, 0.4)])
        e1 = np.eye(n)[0]
        for r in (0.0, 0.3, 1.7):
            v, g, h = u.evaluate(r * e1)
            lr, lt = radial_schouten(v, g[0], h[0, 0], r, n)
            a = schouten_flat(u, r * e1).entries
            assert lr == pytest.approx(a[0, 0], rel=1e-12)
            assert np.allclose(np.diag(a)[1:], lt, rtol=1e-12)

    def test_bubble(self):
        n, s = 5, 0.8
        r = np.linspace(0, 5, 30)
        q = 1 + s * s * r * r
        p = 0.5 * (n - 2)
        u = q ** -p
        du = -2 * p * s * s * r * q ** (-p - 1)
        d2u = -2 * p * s * s * q ** (-p - 1) + 4 * p * (p + 1) * s ** 4 * r * r * q ** (-p - 2)
        lr, lt = radial_schouten(u, du, d2u, r, n)
        assert np.allclose(lr, 2 * s * s) and np.allclose(lt, 2 * s * s)
