"""Reference-element shape functions and Gauss quadrature.

All element spaces are tensor products of two 1D families on [-1, 1]:

* Legendre polynomials ``P_0 .. P_p`` (broken L2 fields, test spaces, edge
  fluxes), orthogonal so their mass matrices are diagonal;
* hierarchical H1 functions: the two vertex hats followed by integrated
  Legendre bubbles ``(P_k - P_{k-2}) / sqrt(2 (2k - 1))``.

Edge parametrisations always run in the direction of increasing global
coordinate, so neighbouring elements of the structured mesh agree on the sign
of odd bubbles without orientation flags.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

FAMILIES = ("h1", "l2", "trace")


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on [-1, 1] and its tensor square."""

    degree: int
    points: np.ndarray
    weights: np.ndarray

    @property
    def npoints(self) -> int:
        return self.points.size

    def tensor(self):
        """Return (xi, eta, w) flattened with xi running fastest."""
        xi, eta = np.meshgrid(self.points, self.points, indexing="xy")
        w = np.outer(self.weights, self.weights)
        return xi.ravel(), eta.ravel(), w.ravel()


@lru_cache(maxsize=None)
def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def quadrature_rule(degree: int) -> QuadratureRule:
    """Gauss rule exact for polynomials of total degree ``degree`` in 1D."""
    if degree < 0:
        raise ValueError("quadrature degree must be non-negative")
    n = max(1, -(-(degree + 1) // 2))
    x, w = _gauss(n)
    return QuadratureRule(degree, x, w)


def legendre_table(p: int, x):
    """Values and derivatives of P_0..P_p at ``x``; arrays of shape (p+1, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    val = np.zeros((p + 1, x.size))
    der = np.zeros((p + 1, x.size))
    val[0] = 1.0
    if p >= 1:
        val[1] = x
        der[1] = 1.0
    for n in range(1, p):
        val[n + 1] = ((2 * n + 1) * x * val[n] - n * val[n - 1]) / (n + 1)
        der[n + 1] = der[n - 1] + (2 * n + 1) * val[n]
    return val, der


def h1_table(p: int, x):
    """Hierarchical H1 functions [N0, N1, phi_2..phi_p] and derivatives."""
    if p < 1:
        raise ValueError("H1 family requires p >= 1")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    leg, _ = legendre_table(p, x)
    val = np.empty((p + 1, x.size))
    der = np.empty((p + 1, x.size))
    val[0] = 0.5 * (1.0 - x)
    val[1] = 0.5 * (1.0 + x)
    der[0] = -0.5
    der[1] = 0.5
    for k in range(2, p + 1):
        val[k] = (leg[k] - leg[k - 2]) / np.sqrt(2.0 * (2 * k - 1))
        der[k] = np.sqrt((2 * k - 1) / 2.0) * leg[k - 1]
    return val, der


def legendre_mass(p: int) -> np.ndarray:
    """Diagonal of the reference mass matrix of P_0..P_p."""
    k = np.arange(p + 1)
    return 2.0 / (2 * k + 1)


def h1_quad_index(p: int) -> np.ndarray:
    """1D index pairs (a, b) of the 2D H1 basis in topological order.

    Order: vertices v0(-1,-1), v1(1,-1), v2(1,1), v3(-1,1); then bubbles of the
    bottom, right, top, left edges; then interior bubbles.
    """
    pairs = [(0, 0), (1, 0), (1, 1), (0, 1)]
    bubbles = range(2, p + 1)
    pairs += [(k, 0) for k in bubbles]
    pairs += [(1, k) for k in bubbles]
    pairs += [(k, 1) for k in bubbles]
    pairs += [(0, k) for k in bubbles]
    pairs += [(k, l) for l in bubbles for k in bubbles]
    return np.array(pairs, dtype=np.int64)


def tensor_index(p: int) -> np.ndarray:
    """1D index pairs (a, b) of the tensor Legendre basis, a fastest."""
    a, b = np.meshgrid(np.arange(p + 1), np.arange(p + 1), indexing="xy")
    return np.stack([a.ravel(), b.ravel()], axis=1)


@dataclass(frozen=True)
class Basis:
    """Tabulated basis: ``values[i, q]`` and reference derivatives.

    For the 1D ``trace`` family ``d_eta`` is ``None`` and ``d_xi`` holds the
    derivative along the edge.
    """

    family: str
    p: int
    values: np.ndarray
    d_xi: np.ndarray
    d_eta: np.ndarray | None

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def _tensorize(index, va, da, rule):
    # points ordered with xi fastest, matching QuadratureRule.tensor
    nq = rule.npoints
    a, b = index[:, 0], index[:, 1]
    val = (va[a][:, None, :] * va[b][:, :, None]).reshape(len(index), nq * nq)
    dxi = (da[a][:, None, :] * va[b][:, :, None]).reshape(len(index), nq * nq)
    deta = (va[a][:, None, :] * da[b][:, :, None]).reshape(len(index), nq * nq)
    return val, dxi, deta


def tabulate(family: str, p: int, rule: QuadratureRule) -> Basis:
    """Tabulate a basis family at the points of ``rule``.

    ``h1`` and ``l2`` live on the reference quad (tensor rule), ``trace`` on
    the reference edge.
    """
    if family not in FAMILIES:
        raise ValueError(f"unsupported basis family {family!r}")
    if family == "h1":
        if p < 1:
            raise ValueError("h1 family requires p >= 1")
        va, da = h1_table(p, rule.points)
        return Basis(family, p, *_tensorize(h1_quad_index(p), va, da, rule))
    if p < 0:
        raise ValueError("polynomial order must be non-negative")
    va, da = legendre_table(p, rule.points)
    if family == "trace":
        return Basis(family, p, va, da, None)
    return Basis(family, p, *_tensorize(tensor_index(p), va, da, rule))


# -- continuous piecewise-polynomial traces on a line ------------------------


def _line_mass(breaks, degree, nquad):
    """Global mass matrix and quadrature data of a continuous 1D H1 space."""
    nel = len(breaks) - 1
    n = nel + 1 + nel * (degree - 1)
    rule = quadrature_rule(2 * degree + 2 if nquad is None else nquad)
    val, _ = h1_table(degree, rule.points)
    h = np.diff(breaks)
    gidx = element_line_dofs(nel, degree)
    mass = np.zeros((n, n))
    loc = (val * rule.weights) @ val.T
    for e in range(nel):
        mass[np.ix_(gidx[e], gidx[e])] += 0.5 * h[e] * loc
    return mass, rule, val, gidx


def element_line_dofs(nel, degree):
    """Global dofs [left vertex, right vertex, bubbles...] of each line element."""
    nb = degree - 1
    idx = np.empty((nel, degree + 1), dtype=np.int64)
    idx[:, 0] = np.arange(nel)
    idx[:, 1] = np.arange(1, nel + 1)
    idx[:, 2:] = nel + 1 + np.arange(nel)[:, None] * nb + np.arange(nb)
    return idx


def split_line_coeffs(coeffs, nel, degree):
    """Split global line coefficients into (vertex values, bubbles per element)."""
    coeffs = np.asarray(coeffs)
    return coeffs[: nel + 1], coeffs[nel + 1:].reshape(nel, degree - 1)


def project_line_l2(f, breaks, degree, nquad=None):
    """L2 projection of ``f`` onto continuous degree-``degree`` polynomials."""
    breaks = np.asarray(breaks, dtype=float)
    nel = len(breaks) - 1
    mass, rule, val, gidx = _line_mass(breaks, degree, nquad)
    h = np.diff(breaks)
    xq = 0.5 * (breaks[:-1, None] + breaks[1:, None]) + 0.5 * h[:, None] * rule.points
    fq = np.asarray(f(xq))
    rhs = np.zeros(mass.shape[0], dtype=fq.dtype)
    for e in range(nel):
        rhs[gidx[e]] += 0.5 * h[e] * (val * rule.weights) @ fq[e]
    coeffs = np.linalg.solve(mass, rhs)
    return split_line_coeffs(coeffs, nel, degree)


def interpolate_line(f, breaks, degree, nquad=None):
    """Projection-based interpolant: exact at breakpoints, bubbles by L2 fit.

    Reproduces polynomials of degree <= ``degree`` exactly and is consistent
    at shared corners of orthogonal boundary lines.
    """
    breaks = np.asarray(breaks, dtype=float)
    nel = len(breaks) - 1
    verts = np.asarray(f(breaks))
    rule = quadrature_rule(2 * degree + 2 if nquad is None else nquad)
    val, der = h1_table(degree, rule.points)
    h = np.diff(breaks)
    xq = 0.5 * (breaks[:-1, None] + breaks[1:, None]) + 0.5 * h[:, None] * rule.points
    fq = np.asarray(f(xq))
    lin = verts[:-1, None] * val[0] + verts[1:, None] * val[1]
    bub = val[2:]
    m = (bub * rule.weights) @ bub.T
    rhs = (fq - lin) @ (bub * rule.weights).T
    bubbles = np.linalg.solve(m, rhs.T).T if degree > 1 else np.zeros((nel, 0), dtype=fq.dtype)
    return verts, bubbles


def eval_line(verts, bubbles, breaks, x):
    """Evaluate a continuous line function at points ``x``."""
    breaks = np.asarray(breaks, dtype=float)
    x = np.asarray(x, dtype=float)
    degree = np.shape(bubbles)[1] + 1
    e = np.clip(np.searchsorted(breaks, x, side="right") - 1, 0, len(breaks) - 2)
    xi = 2 * (x - breaks[e]) / (breaks[e + 1] - breaks[e]) - 1
    val, _ = h1_table(max(degree, 1), xi.ravel())
    val = val.reshape((-1,) + x.shape)
    out = verts[e] * val[0] + verts[e + 1] * val[1]
    for k in range(degree - 1):
        out = out + bubbles[e, k] * val[2 + k]
    return out
