import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fiberdpg import fespace


def test_two_point_gauss():
    r = fespace.quadrature_rule(3)
    assert np.allclose(np.sort(r.points), [-1 / np.sqrt(3), 1 / np.sqrt(3)])
    assert np.allclose(r.weights, [1.0, 1.0])


def test_degree_two_rule_integrates_square():
    r = fespace.quadrature_rule(2)
    assert np.sum(r.weights * r.points**2) == pytest.approx(2 / 3, rel=1e-15)


@given(st.integers(0, 40))
def test_weights_positive_and_sum_to_two(deg):
    r = fespace.quadrature_rule(deg)
    assert r.npoints == -(-(deg + 1) // 2)
    assert np.all(r.weights > 0)
    assert r.weights.sum() == pytest.approx(2.0)


@given(st.integers(0, 30))
def test_rule_exactness(deg):
    r = fespace.quadrature_rule(deg)
    for k in range(deg + 1):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert np.sum(r.weights * r.points**k) == pytest.approx(exact, abs=1e-13)


def test_negative_degree_rejected():
    with pytest.raises(ValueError):
        fespace.quadrature_rule(-1)


def test_h1_p1_midpoint_and_partition_of_unity():
    mid = fespace.QuadratureRule(1, np.array([0.0]), np.array([2.0]))
    b = fespace.tabulate("h1", 1, mid)
    assert np.allclose(b.values[:, 0], 0.25)  # 2D hats at the centre
    val, _ = fespace.h1_table(1, np.array([0.0]))
    assert np.allclose(val[:, 0], 0.5)
    r = fespace.quadrature_rule(7)
    b = fespace.tabulate("h1", 1, r)
    assert np.allclose(b.values.sum(axis=0), 1.0)
    assert np.allclose(b.d_xi.sum(axis=0), 0.0)


def test_legendre_p2_at_zero():
    val, _ = fespace.legendre_table(2, [0.0])
    assert val[2, 0] == pytest.approx(-0.5)


@pytest.mark.parametrize("family, p, dim", [("h1", 3, 16), ("l2", 3, 16), ("l2", 0, 1),
                                            ("trace", 4, 5)])
def test_dimensions(family, p, dim):
    b = fespace.tabulate(family, p, fespace.quadrature_rule(2 * p + 2))
    assert b.dim == dim


def test_unsupported_family():
    with pytest.raises(ValueError):
        fespace.tabulate("hcurl", 2, fespace.quadrature_rule(4))
    with pytest.raises(ValueError):
        fespace.tabulate("h1", 0, fespace.quadrature_rule(4))


@pytest.mark.parametrize("table", [fespace.legendre_table, fespace.h1_table])
def test_derivatives_match_finite_differences(table):
    x = np.linspace(-0.95, 0.95, 17)
    h = 1e-6
    val_p, _ = table(6, x + h)
    val_m, _ = table(6, x - h)
    _, der = table(6, x)
    assert np.allclose((val_p - val_m) / (2 * h), der, atol=1e-7)


def test_legendre_mass_diagonal_spd():
    p = 6
    r = fespace.quadrature_rule(2 * p + 2)
    b = fespace.tabulate("l2", p, r)
    _, _, w = r.tensor()
    M = (b.values * w) @ b.values.T
    assert np.allclose(M, M.T)
    assert np.allclose(M - np.diag(np.diag(M)), 0.0, atol=1e-13)
    assert np.all(np.linalg.eigvalsh(M) > 0)
    d1 = fespace.legendre_mass(p)
    assert np.allclose(np.diag(M), np.outer(d1, d1).ravel())


@settings(max_examples=30, deadline=None)
@given(deg=st.integers(1, 6), coeffs=st.lists(st.floats(-3, 3), min_size=7, max_size=7))
def test_line_projection_reproduces_polynomials(deg, coeffs):
    poly = np.polynomial.Polynomial(coeffs[: deg + 1])
    breaks = np.array([-2.0, -0.5, 0.3, 1.0, 2.5])
    v, b = fespace.project_line_l2(poly, breaks, deg)
    x = np.linspace(-2, 2.5, 41)
    assert np.allclose(fespace.eval_line(v, b, breaks, x), poly(x), atol=1e-9)
    v2, b2 = fespace.interpolate_line(poly, breaks, deg)
    assert np.allclose(v2, poly(breaks))
    assert np.allclose(fespace.eval_line(v2, b2, breaks, x), poly(x), atol=1e-9)
