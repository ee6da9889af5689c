import math

import numpy as np
import pytest

from sigmak.conformal import MoebiusParams, bubble_exact, bubble_field, kelvin_transform, stereographic_push
from sigmak.curvature import CurvatureSpec, compute_delta1
from sigmak.errors import DomainError, NotFound, NotTouching
from sigmak.fields import (ConstantField, ExponentialField, GeneralizedBubble, QuadraticField,
                           RadialProfileField, SumField)
from sigmak.harness import (ball_points, certify_delta_matrix, covariance_audit, critical_lambda,
                            fit_touching_paraboloid, gradient_bound_check, harnack_audit,
                            harnack_branches, harnack_constant, harnack_rescale,
                            max_point_inequality, touching_comparison, touching_gap,
                            verify_suite)
from sigmak.radial import SolverConfig, bubble_on_grid, default_decay, newton_solve


def bubble_product(a, s, R, n):
    # sup over B_R at the center, inf over B_2R on the boundary
    return a * a * (1 + 4 * s * s * R * R) ** (-(n - 2) / 2)


class TestHarnackConstant:
    def test_n3(self):
        br = harnack_branches(3)
        assert br["main"] == 331776 == 2 ** 12 * 3 ** 4
        assert harnack_constant(3) == 331776

    @pytest.mark.parametrize("n", range(3, 11))
    def test_branches_rederived(self, n):
        br = harnack_branches(n)
        r = 2 ** (n + 6) * n ** 4
        # main branch: (sup u)(inf u) <= 8^{n-2} r^{n-2}
        assert br["main"] == float(8 ** (n - 2) * r ** (n - 2))
        assert br["main"] == float(2 ** ((n + 9) * (n - 2)) * n ** (4 * (n - 2)))
        # low branch: (2 gamma)^{(n-2)/2} with gamma at its threshold 2^{n+8} n^4
        gamma = 2 ** (n + 8) * n ** 4
        assert br["low"] == pytest.approx((2 * gamma) ** ((n - 2) / 2), rel=1e-14)
        assert br["low"] <= br["main"]
        assert br["case2_excluded"] and br["gradient_step_ok"]

    def test_monotone(self):
        values = [harnack_constant(n) for n in range(3, 11)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_bad_dimension(self):
        with pytest.raises(ValueError):
            harnack_constant(2)


class TestHarnackAudit:
    @pytest.mark.parametrize("n", [3, 4, 5])
    @pytest.mark.parametrize("s", [1.0, 10.0, 1000.0])
    def test_bubble_closed_form(self, n, s):
        spec = CurvatureSpec.sigma(n, 1)
        b = bubble_exact(spec, s)
        rep = harnack_audit(bubble_field(b), 1.0, delta=certify_delta_matrix(spec), samples=20000)
        assert rep.product == pytest.approx(bubble_product(b.amplitude, s, 1.0, n), rel=1e-10)
        assert rep.passed and rep.product <= rep.bound
        assert rep.sup_point == pytest.approx(np.zeros(n), abs=1e-6)
        assert np.linalg.norm(rep.inf_point) == pytest.approx(2.0, rel=1e-9)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_plateau(self, n):
        # a^2 = (2 n s^2)^{(n-2)/2} for the sigma_1 bubble, so the product tends to (n/2)^{(n-2)/2}
        spec = CurvatureSpec.sigma(n, 1)
        b = bubble_exact(spec, 1000.0)
        rep = harnack_audit(bubble_field(b), 1.0, delta=1.0, samples=5000)
        assert rep.product == pytest.approx((n / 2) ** ((n - 2) / 2), rel=1e-6)

    def test_dilation(self):
        n = 4
        u = SumField([GeneralizedBubble(n, 1.0, 2.0, np.array([0.1, 0, 0, 0])), GeneralizedBubble(n, 0.3, 0.5)])
        R = 0.37
        direct = harnack_audit(u, R, delta=1.0, samples=20000)
        scaled = harnack_audit(harnack_rescale(u, R), 1.0, delta=1.0, samples=20000)
        assert scaled.product == pytest.approx(R ** (n - 2) * direct.product, rel=1e-10)
        assert scaled.product / scaled.bound == pytest.approx(direct.product / direct.bound, rel=1e-10)

    def test_threshold_rescaling(self):
        n = 3
        u = GeneralizedBubble(n, 1.0, 1.0)
        rep = harnack_audit(harnack_rescale(u, 1.0, delta=4.0), 1.0, delta=1.0, samples=4000)
        assert rep.product == pytest.approx(4.0 ** 0.5 * harnack_audit(u, 1.0, delta=1.0, samples=4000).product)

    def test_constant_is_not_a_solution(self):
        spec = CurvatureSpec.sigma(3, 2)
        rep = harnack_audit(ConstantField(3, 1.7), 1.0, spec=spec, samples=2000)
        assert rep.product == pytest.approx(1.7 ** 2)
        assert rep.solution_certified is False
        assert rep.to_dict()["pass"] is True

    def test_solver_output(self):
        spec = CurvatureSpec.sigma(3, 2)
        cfg = SolverConfig()
        sol = newton_solve(spec, 1.01 * bubble_on_grid(spec, default_decay(spec), cfg), cfg)
        # the spline profile carries an O(h^2) second-derivative error between nodes
        rep = harnack_audit(sol.as_field(), 1.0, spec=spec, samples=5000, solution_tol=1e-3)
        assert rep.passed and rep.solution_certified
        assert rep.solution_defect < 1e-3
        off = harnack_audit(SumField([sol.as_field()], [1.05]), 1.0, spec=spec, samples=5000)
        assert off.solution_defect > 1e-2

    def test_domain(self):
        r = np.linspace(0, 2, 50)
        short = RadialProfileField(3, r, 1 / (1 + r * r) ** 0.5)
        with pytest.raises(DomainError):
            harnack_audit(short, 1.0, delta=1.0, samples=1000)
        with pytest.raises(ValueError):
            harnack_audit(short, 0.5, samples=1000)

    def test_deterministic(self):
        u = GeneralizedBubble(3, 1.0, 3.0)
        a = harnack_audit(u, 1.0, delta=1.0, samples=3000, seed=7).to_dict()
        b = harnack_audit(u, 1.0, delta=1.0, samples=3000, seed=7).to_dict()
        assert a == b


class TestDelta:
    def test_sigma1(self):
        assert certify_delta_matrix(CurvatureSpec.sigma(3, 1)) == pytest.approx(3 ** -0.5, rel=1e-10)

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_sigma_n(self, n):
        # AM-GM: the level set point closest to 0 is e, of length sqrt(n)
        spec = CurvatureSpec.sigma(n, n)
        assert spec.value(np.ones(n)) == pytest.approx(1.0)
        assert certify_delta_matrix(spec) == pytest.approx(math.sqrt(n), rel=1e-10)

    @pytest.mark.parametrize("spec", [CurvatureSpec.sigma(4, 2), CurvatureSpec.sigma(5, 3),
                                      CurvatureSpec.homotopy(4, 3, 0.5)])
    def test_equals_delta1(self, spec):
        # min |lambda| on {f = 1} equals 1 / max f on the unit sphere
        assert certify_delta_matrix(spec) == pytest.approx(compute_delta1(spec), rel=1e-8)

    def test_level_set_threshold(self):
        spec = CurvatureSpec.sigma(4, 2)
        d = certify_delta_matrix(spec)
        rng = np.random.default_rng(0)
        mu = rng.normal(size=(20000, 4))
        mu *= (0.999 * d / np.linalg.norm(mu, axis=1))[:, None]
        assert np.all(spec.value_or_zero(mu) < 1)


class TestGradientBound:
    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_bubble(self, n):
        s, a = 1.0, 0.4
        rep = gradient_bound_check(GeneralizedBubble(n, 1.0, s), a, samples=8000)
        assert rep.hypothesis_holds and rep.conclusion_holds and rep.sound
        # |grad u|/u = (n-2) s^2 r / (1 + s^2 r^2), largest at r = a on the sampled ball
        worst_ratio = (n - 2) * s * s * a / (1 + s * s * a * a)
        assert rep.conclusion_margin == pytest.approx((n - 2) / (2 * a) - worst_ratio, abs=1e-2)
        assert rep.conclusion_margin > 0

    def test_constant(self):
        rep = gradient_bound_check(ConstantField(4, 2.0), 0.7, samples=4000)
        assert rep.hypothesis_holds
        assert rep.conclusion_margin == pytest.approx(2 / 1.4)

    def test_steep_exponential_rejected(self):
        n, a = 3, 0.3
        rep = gradient_bound_check(ExponentialField(n, 1.0, [4 / a, 0, 0]), a, samples=4000)
        assert not rep.hypothesis_holds
        assert not rep.conclusion_holds
        assert rep.sound

    def test_domain(self):
        with pytest.raises(DomainError):
            gradient_bound_check(QuadraticField(3, 1.0, 0.1, radius=1.0), 0.5, samples=100)

    def test_report(self):
        d = gradient_bound_check(ConstantField(3, 1.0), 0.5, samples=500).to_dict()
        assert set(d["worst_triple"]) == {"x", "lambda", "y"} and d["sound"]


class TestMovingSphere:
    def test_kelvin_identity_at_critical_radius(self):
        # the bubble is fixed by inversion about x with lam^2 = 1/s^2 + |x - c|^2
        s, x = 2.0, np.array([0.3, -0.2, 0.1])
        u = GeneralizedBubble(3, 1.0, s)
        lam = math.sqrt(1 / s ** 2 + x @ x)
        k = kelvin_transform(u, MoebiusParams(x, lam))
        pts = np.random.default_rng(0).uniform(-3, 3, (100, 3))
        assert np.allclose(k.value(pts), u.value(pts), rtol=1e-12)

    @pytest.mark.parametrize("x", [np.zeros(3), np.array([0.3, -0.2, 0.1])])
    def test_critical_radius(self, x):
        s = 2.0
        u = GeneralizedBubble(3, 1.0, s)
        rep = critical_lambda(u, x, 5.0)
        expected = math.sqrt(1 / s ** 2 + x @ x)
        assert rep.lambda_x == pytest.approx(expected, rel=1e-6)
        assert rep.margin >= 0 and rep.lambda_x > 0

    def test_density_monotone(self):
        u = SumField([GeneralizedBubble(3, 1.0, 1.0), GeneralizedBubble(3, 0.5, 2.0, np.array([0.5, 0, 0]))])
        x = np.array([0.1, 0.2, 0.0])
        coarse = critical_lambda(u, x, 4.0, density=16).lambda_x
        fine = critical_lambda(u, x, 4.0, density=128).lambda_x
        assert fine <= coarse * (1 + 1e-9)

    def test_fast_decay_not_found(self):
        u = GeneralizedBubble(3, 1.0, 1.0, None, power=10.0)
        with pytest.raises(NotFound):
            critical_lambda(u, np.zeros(3), 100.0)

    def test_csv(self):
        rep = critical_lambda(GeneralizedBubble(3, 1.0, 1.0), np.zeros(3), 3.0, iterations=10)
        lines = rep.to_csv().splitlines()
        assert lines[0] == "lambda,margin" and len(lines) == 9
        assert rep.to_dict()["density"] == 64


class TestTouching:
    def test_identical(self):
        u = GeneralizedBubble(4, 1.0, 1.0)
        p = np.array([0.1, 0.2, 0.0, 0.3])
        assert touching_comparison(u, u, p)
        assert abs(touching_gap(u, u, p)) < 1e-14

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_quadratic_perturbation_gap(self, n):
        # xi = u - c |y - p|^2: values and gradients agree, hessians differ by 2c I
        u = SumField([GeneralizedBubble(n, 1.0, 1.0), GeneralizedBubble(n, 0.5, 2.0, np.full(n, 0.2))])
        p = np.linspace(-0.3, 0.4, n)
        for c in (1e-3, 0.1, 1.0):
            xi = SumField([u, QuadraticField(n, 0.0, 1.0, p)], [1.0, -c])
            expected = -4 * c / (n - 2) * u.value(p) ** (-(n + 2) / (n - 2))
            assert touching_gap(u, xi, p) == pytest.approx(expected, rel=1e-10)
            assert touching_comparison(u, xi, p)

    def test_fitted_paraboloid(self):
        n = 3
        u = GeneralizedBubble(n, 1.0, 1.0)
        xi, point = fit_touching_paraboloid(u, np.zeros(n), 1.0)
        pts = ball_points(n, 0.999, 4000, 1)
        assert np.all(u.value(pts) >= xi.value(pts) - 1e-12)
        assert touching_comparison(u, xi, point, tol=1e-6)
        assert touching_gap(u, xi, point) < 0

    def test_not_touching(self):
        u = GeneralizedBubble(3, 1.0, 1.0)
        p = np.array([0.2, 0.0, 0.1])
        with pytest.raises(NotTouching):
            touching_comparison(u, SumField([u, ConstantField(3, 0.1)], [1.0, -1.0]), p)
        tilted = SumField([u, ExponentialField(3, 1e-3, [5.0, 0, 0])], [1.0, 1.0])
        with pytest.raises(NotTouching):
            touching_comparison(u, SumField([tilted, ConstantField(3, 1e-3 * np.exp(1.0))], [1.0, -1.0]), p)


class TestMaxPoint:
    @pytest.mark.parametrize("n,k", [(3, 1), (3, 2), (4, 2), (5, 5)])
    def test_constant_solution(self, n, k):
        spec = CurvatureSpec.sigma(n, k)
        # lambda(A_{g0}) = e/2, so a^{-4/(n-2)} f(e)/2 = 1
        a = (spec.f_e() / 2) ** ((n - 2) / 4)
        rep = max_point_inequality(ConstantField(n, a), spec, samples=2000)
        assert rep.value == pytest.approx(1.0, abs=1e-10)
        assert rep

    def test_scaling_direction(self):
        n, spec = 4, CurvatureSpec.sigma(4, 2)
        a = (spec.f_e() / 2) ** ((n - 2) / 4)
        # f(u^{-4/(n-2)} lambda) decreases in u
        assert not max_point_inequality(ConstantField(n, 0.9 * a), spec, samples=1000)
        assert max_point_inequality(ConstantField(n, 1.1 * a), spec, samples=1000)

    def test_solver_solution_on_sphere(self):
        spec = CurvatureSpec.sigma(3, 2)
        cfg = SolverConfig()
        sol = newton_solve(spec, 1.01 * bubble_on_grid(spec, default_decay(spec), cfg), cfg)
        rep = max_point_inequality(stereographic_push(sol.as_field()), spec, samples=4000)
        assert rep.holds and rep.value <= 1 + 1e-10
        assert set(rep.to_dict()) == {"max_point", "max_value", "value", "holds"}


class TestSuites:
    def test_covariance(self):
        out = covariance_audit(seed=3, fields=9, moebius=3, points=20)
        assert out["pass"] and out["checks"] == 9 * 3 * 20

    def test_lemma2(self):
        out = verify_suite("lemma2", seed=1)
        assert out["pass"] and out["violators_rejected"] == 10 and out["certified"] == 50

    def test_touching(self):
        assert verify_suite("touching")["pass"]

    def test_unknown(self):
        with pytest.raises(KeyError):
            verify_suite("nope")
