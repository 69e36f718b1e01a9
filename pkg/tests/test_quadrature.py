import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from polyelast.quadrature import (map_to_simplices, segment_rule, simplex_rule,
                                  tetrahedron_rule, triangle_rule)


def monomial_integral_segment(p):
    return 1.0 / (p + 1)


def monomial_integral_triangle(p, q):
    # int over {x,y>=0, x+y<=1} of x^p y^q
    return math.factorial(p) * math.factorial(q) / math.factorial(p + q + 2)


def monomial_integral_tet(p, q, r):
    return (math.factorial(p) * math.factorial(q) * math.factorial(r)
            / math.factorial(p + q + r + 3))


@pytest.mark.parametrize("degree", [1, 2, 3, 5, 8, 10, 13])
def test_segment_rule_exactness(degree):
    x, w = segment_rule(degree)
    for p in range(degree + 1):
        assert_allclose(w @ x[:, 0] ** p, monomial_integral_segment(p), rtol=1e-13)


@pytest.mark.parametrize("degree", [1, 2, 3, 5, 8, 10])
def test_triangle_rule_exactness(degree):
    x, w = triangle_rule(degree)
    assert_allclose(w.sum(), 0.5, rtol=1e-14)
    for p in range(degree + 1):
        for q in range(degree + 1 - p):
            val = (w * x[:, 0] ** p * x[:, 1] ** q).sum()
            assert_allclose(val, monomial_integral_triangle(p, q), rtol=1e-12)


@pytest.mark.parametrize("degree", [1, 2, 4, 6, 10])
def test_tetrahedron_rule_exactness(degree):
    x, w = tetrahedron_rule(degree)
    assert_allclose(w.sum(), 1.0 / 6.0, rtol=1e-14)
    for p in range(degree + 1):
        for q in range(degree + 1 - p):
            for r in range(degree + 1 - p - q):
                val = (w * x[:, 0] ** p * x[:, 1] ** q * x[:, 2] ** r).sum()
                assert_allclose(val, monomial_integral_tet(p, q, r), rtol=1e-12)


def test_simplex_rule_dispatch():
    assert simplex_rule(1, 3)[0].shape[1] == 1
    assert simplex_rule(2, 3)[0].shape[1] == 2
    assert simplex_rule(3, 3)[0].shape[1] == 3
    with pytest.raises(ValueError):
        simplex_rule(4, 2)


def test_mapped_triangle_area_and_moment():
    verts = np.array([[[1.0, 1.0], [3.0, 1.0], [1.0, 2.0]]])
    pts, wts = map_to_simplices(verts, 2)
    assert_allclose(wts.sum(), 1.0, rtol=1e-14)  # area 2*1/2
    assert_allclose((wts[:, None] * pts).sum(axis=0) / wts.sum(),
                    verts[0].mean(axis=0), rtol=1e-14)


def test_mapped_segment_in_2d_and_triangle_in_3d():
    seg = np.array([[[0.0, 0.0], [3.0, 4.0]]])
    pts, wts = map_to_simplices(seg, 5)
    assert_allclose(wts.sum(), 5.0, rtol=1e-14)  # length

    tri3 = np.array([[[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]])
    pts, wts = map_to_simplices(tri3, 3)
    assert_allclose(wts.sum(), 0.5, rtol=1e-14)
    assert_allclose(pts[:, 2], 1.0)
