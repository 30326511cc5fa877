"""Quadrature rules checked against the exact barycentric integrals."""

import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nnelast.quadrature import (
    TRI_DEG5_7PT,
    exact_simplex_integral,
    exact_triangle_integral,
    quad_rule,
    triangle_rule,
)


def _rule_value(rule, exps):
    vals = np.prod(rule.points ** np.asarray(exps), axis=1)
    return float(rule.weights @ vals)


def test_exact_integral_examples():
    assert_allclose(exact_simplex_integral(1, 1, 0, 0), 1 / 20, rtol=1e-15)
    assert_allclose(exact_simplex_integral(0, 0, 0, 0), 1.0, rtol=0)
    # (l_i, l_i)/(l_i, l_j) = 2 for i != j
    assert exact_simplex_integral(2, 0, 0, 0) / exact_simplex_integral(1, 1, 0, 0) == 2.0


def test_exact_integral_rejects_bad_exponents():
    with pytest.raises(ValueError):
        exact_simplex_integral(-1, 0, 0, 0)


@pytest.mark.parametrize("kind,degree", [("deg2_4pt", 2), ("deg5_14pt", 5)])
def test_tet_rule_exactness(kind, degree):
    rule = quad_rule(kind)
    assert rule.degree == degree
    worst = 0.0
    for exps in itertools.product(range(degree + 1), repeat=4):
        if sum(exps) > degree:
            continue
        exact = exact_simplex_integral(*exps)
        worst = max(worst, abs(_rule_value(rule, exps) - exact) / exact)
    assert worst <= 1e-12


def test_tet_rule_basics():
    for kind, npts in (("deg2_4pt", 4), ("deg5_14pt", 14)):
        rule = quad_rule(kind)
        assert rule.npoints == npts
        assert (rule.weights > 0).all()
        assert_allclose(rule.weights.sum(), 1.0, rtol=1e-14)
        assert_allclose(rule.points.sum(axis=1), 1.0, rtol=1e-14)


def test_specific_values():
    assert abs(_rule_value(quad_rule("deg2_4pt"), (1, 1, 0, 0)) - 1 / 20) < 1e-13
    assert abs(
        _rule_value(quad_rule("deg5_14pt"), (2, 2, 1, 0)) - exact_simplex_integral(2, 2, 1, 0)
    ) <= 1e-12 * exact_simplex_integral(2, 2, 1, 0)


def test_unknown_kind():
    with pytest.raises(ValueError):
        quad_rule("deg9_whatever")


def test_triangle_rule_exactness():
    rule = TRI_DEG5_7PT
    worst = 0.0
    for exps in itertools.product(range(6), repeat=3):
        if sum(exps) > 5:
            continue
        exact = exact_triangle_integral(*exps)
        worst = max(worst, abs(_rule_value(rule, exps) - exact) / exact)
    assert worst <= 1e-12
    assert_allclose(rule.weights.sum(), 1.0, rtol=1e-14)


def test_triangle_rule_selection():
    assert triangle_rule(2).npoints == 3
    assert triangle_rule(5).npoints == 7
    with pytest.raises(ValueError):
        triangle_rule(9)


def test_physical_points_map():
    rule = quad_rule("deg2_4pt")
    verts = np.array([[0.0, 0, 0], [2, 0, 0], [0, 2, 0], [0, 0, 2]])
    pts = rule.physical_points(verts)
    assert pts.shape == (4, 3)
    assert_allclose(pts, rule.points @ verts, atol=0)
