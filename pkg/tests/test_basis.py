"""Quadrature exactness and orthonormal basis construction tests."""

import numpy as np
import pytest

from polydg.basis import (DgSpace, ElementBasis, edge_quadrature, n_local,
                          monomial_exponents, polygon_quadrature)
from polydg.mesh import build_regular_mesh

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def regular_polygon(n, radius=1.0):
    ang = 2.0 * np.pi * np.arange(n) / n
    return radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)


def test_polygon_quadrature_monomial_exactness():
    # all monomials x^i y^j, i + j <= q, on the unit square: integral
    # is 1 / ((i+1)(j+1))
    for q in (0, 2, 4, 6):
        quad = polygon_quadrature(UNIT_SQUARE, q)
        assert quad.weights.sum() == pytest.approx(1.0, rel=1e-13)
        for i in range(q + 1):
            for j in range(q + 1 - i):
                val = quad.integrate(lambda x, y: x ** i * y ** j)
                assert val == pytest.approx(1.0 / ((i + 1) * (j + 1)),
                                            rel=1e-12)


def test_polygon_quadrature_hexagon_symmetry():
    hexagon = regular_polygon(6)
    quad = polygon_quadrature(hexagon, 3)
    assert quad.integrate(lambda x, y: x) == pytest.approx(0.0, abs=1e-13)
    assert quad.integrate(lambda x, y: y) == pytest.approx(0.0, abs=1e-13)
    assert np.all(quad.weights > 0)


def test_edge_quadrature():
    q = edge_quadrature(np.array([0.0, 0.0]), np.array([2.0, 0.0]), 1)
    assert q.weights.sum() == pytest.approx(2.0)
    q = edge_quadrature(np.array([0.0, 0.0]), np.array([1.0, 0.0]), 1)
    assert q.integrate(lambda x, y: x) == pytest.approx(0.5)
    # degree-7 monomial with a 4-node rule
    q = edge_quadrature(np.array([0.0, 0.0]), np.array([1.0, 0.0]), 7)
    assert len(q.weights) == 4
    assert q.integrate(lambda x, y: x ** 7) == pytest.approx(1.0 / 8.0,
                                                             rel=1e-13)


def test_n_local_and_exponent_order():
    assert [n_local(p) for p in range(4)] == [1, 3, 6, 10]
    # graded lexicographic: 1, x, y, x^2, xy, y^2, ...
    assert monomial_exponents(2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1),
                                     (0, 2)]


@pytest.mark.parametrize("p", [0, 1, 2, 3])
def test_orthonormal_basis_gram_identity(p):
    basis = ElementBasis(regular_polygon(5, 0.8) + 2.0, p)
    G = basis.gram()
    assert np.max(np.abs(G - np.eye(n_local(p)))) < 1e-10


def test_first_basis_function_is_inverse_sqrt_area():
    verts = 2.0 * UNIT_SQUARE  # area 4
    basis = ElementBasis(verts, 0)
    vals = basis.eval(np.array([[0.3, 0.7], [1.5, 1.9]]))
    assert np.allclose(vals, 0.5)


def test_scaling_robustness():
    tiny = 1e-3 * regular_polygon(6)
    basis = ElementBasis(tiny, 3)
    G = basis.gram()
    assert np.max(np.abs(G - np.eye(10))) < 1e-10


def test_space_on_clipped_mesh():
    # boundary cells of a clipped hexagon mesh include pentagons; the basis
    # must stay orthonormal there
    mesh = build_regular_mesh("hexagon", 0.04, (0, 0, 1, 1))
    space = DgSpace(mesh, 3)
    for c in range(mesh.n_cells):
        G = space.bases[c].gram()
        assert np.max(np.abs(G - np.eye(10))) < 1e-10


def test_projection_of_polynomial_is_exact():
    mesh = build_regular_mesh("square", 0.25, (0, 0, 1, 1))
    space = DgSpace(mesh, 2)
    coeffs = space.project(lambda x, y: 1.0 + 2.0 * x - y + x * y)
    for c in range(mesh.n_cells):
        pts = space.bases[c].quadrature.nodes
        vals = space.evaluate(coeffs, c, pts)
        exact = 1.0 + 2.0 * pts[:, 0] - pts[:, 1] + pts[:, 0] * pts[:, 1]
        assert np.max(np.abs(vals - exact)) < 1e-12
