import json

import numpy as np
import pytest

from sigmak.errors import DomainError, SingularCenter
from sigmak.fields import (AffinePullback, ConstantField, ExponentialField, GeneralizedBubble,
                           GriddedField, KelvinField, ProductField, QuadraticField,
                           RadialProfileField, SphereAffineField, SumField, field_from_dict,
                           load_field, save_field)


def sample_fields(n=3):
    b = GeneralizedBubble(n, 1.3, 0.7, np.linspace(-0.2, 0.3, n))
    return [
        ConstantField(n, 2.0),
        b,
        GeneralizedBubble(n, 0.9, 1.4, None, power=1.7),
        SumField([b, ConstantField(n, 0.5)], [2.0, 1.0]),
        ProductField([b, GeneralizedBubble(n, 1.0, 0.5)], [1.5, -0.5]),
        AffinePullback(b, np.eye(n)[::-1] * 1.2, np.full(n, 0.1), 0.8),
        KelvinField(b, np.full(n, 2.0), 0.9),
        ExponentialField(n, 1.5, np.linspace(0.1, -0.3, n)),
        QuadraticField(n, 1.0, 0.3, np.ones(n)),
        SphereAffineField(n, 2.0, np.linspace(0.2, -0.5, n + 1)),
    ]


def central_differences(field, x, h=1e-4):
    n = field.n
    g = np.zeros(n)
    hess = np.zeros((n, n))
    for i, ei in enumerate(np.eye(n)):
        g[i] = (field.value(x + h * ei) - field.value(x - h * ei)) / (2 * h)
        for j, ej in enumerate(np.eye(n)):
            hess[i, j] = (field.value(x + h * ei + h * ej) - field.value(x + h * ei - h * ej)
                          - field.value(x - h * ei + h * ej) + field.value(x - h * ei - h * ej)) / (4 * h * h)
    return g, hess


@pytest.mark.parametrize("field", sample_fields(), ids=lambda f: type(f).__name__)
def test_derivatives_against_differences(field):
    rng = np.random.default_rng(0)
    for x in rng.uniform(-1, 1, (5, field.n)):
        v, g, hess = field.evaluate(x)
        assert v == pytest.approx(field.value(x))
        g_fd, h_fd = central_differences(field, x)
        scale = 1 + abs(v)
        assert np.allclose(g, g_fd, atol=1e-7 * scale)
        assert np.allclose(hess, h_fd, atol=1e-5 * scale)
        assert np.allclose(hess, hess.T)


@pytest.mark.parametrize("field", sample_fields(4), ids=lambda f: type(f).__name__)
def test_serialization_round_trip(field, tmp_path):
    pts = np.random.default_rng(1).uniform(-1, 1, (7, 4))
    again = field_from_dict(json.loads(json.dumps(field.to_dict())))
    for a, b in zip(field.evaluate(pts), again.evaluate(pts)):
        assert np.array_equal(a, b)
    path = tmp_path / "f.json"
    save_field(field, path)
    assert np.array_equal(load_field(path).value(pts), field.value(pts))


def test_batch_equals_single():
    field = sample_fields()[4]
    pts = np.random.default_rng(2).uniform(-1, 1, (6, 3))
    v, g, h = field.evaluate(pts)
    for i, p in enumerate(pts):
        vi, gi, hi = field.evaluate(p)
        assert vi == v[i] and np.array_equal(gi, g[i]) and np.array_equal(hi, h[i])


def test_point_dimension_checked():
    with pytest.raises(ValueError):
        ConstantField(3, 1.0).value(np.zeros(4))


def test_domains():
    q = QuadraticField(3, 1.0, 1.0, radius=0.5)
    with pytest.raises(DomainError):
        q.value(np.ones(3))
    k = KelvinField(GeneralizedBubble(3), np.zeros(3), 1.0)
    with pytest.raises(SingularCenter):
        k.value(np.zeros(3))
    with pytest.raises(ValueError):
        SphereAffineField(3, 1.0, [1.0, 0, 0, 0.5])


def test_dilation():
    b = GeneralizedBubble(5, 1.0, 2.0)
    d = AffinePullback.dilation(b, 3.0)
    x = np.array([0.1, 0.2, 0.0, -0.3, 0.05])
    assert d.value(x) == pytest.approx(3.0 ** 1.5 * b.value(3 * x))


def test_radial_profile_interpolates():
    b = GeneralizedBubble(3, 1.0, 1.0)
    r = np.linspace(0, 4, 401)
    prof = RadialProfileField(3, r, b.value(np.c_[r, 0 * r, 0 * r]))
    x = np.array([[0.31, -0.7, 0.2], [0.0, 0.0, 0.0]])
    v, g, hess = prof.evaluate(x)
    bv, bg, bh = b.evaluate(x)
    assert np.allclose(v, bv, atol=1e-7)
    assert np.allclose(g, bg, atol=1e-5)
    assert np.allclose(hess, bh, atol=1e-3)
    with pytest.raises(DomainError):
        prof.value(np.array([5.0, 0, 0]))


def test_gridded_fourth_order():
    b = GeneralizedBubble(3, 1.0, 1.0, np.array([0.1, -0.2, 0.05]))
    x = np.array([0.4, 0.2, -0.3])
    exact = b.evaluate(x)
    errs = []
    for h in (0.1, 0.05, 0.025):
        grid = GriddedField.from_field(b, x - 3 * h, h, (7, 7, 7))
        v, g, hess = grid.evaluate(x)
        assert v == exact[0]
        errs.append(max(np.abs(g - exact[1]).max(), np.abs(hess - exact[2]).max()))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 3.7)


def test_gridded_domain_is_interior_nodes():
    grid = GriddedField.from_field(ConstantField(3, 1.0), np.zeros(3), 0.1, (6, 6, 6))
    assert grid.contains(np.array([[0.2, 0.2, 0.3], [0.1, 0.2, 0.2], [0.25, 0.2, 0.2]])).tolist() == [True, False, False]
    with pytest.raises(ValueError):
        field_from_dict({"type": "nope", "n": 3})
