"""Direct solution of block-tridiagonal (layered) trace systems.

The default factorization is block Thomas elimination along the layer index,
which costs ``O(n_layers * m**3)`` for block size ``m``.  A general sparse LU
(scipy's SuperLU) is available behind the same interface for cross-checks.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .errors import SingularSystemError


class LayeredMatrix:
    """Block-tridiagonal matrix with uniform block size ``m``.

    ``diag[j]`` couples block j with itself, ``upper[j]`` block j with j+1 and
    ``lower[j]`` block j+1 with j.
    """

    def __init__(self, n_blocks, m, dtype=complex):
        self.n_blocks = n_blocks
        self.m = m
        self.blocks = np.zeros((3, n_blocks, m, m), dtype=dtype)

    @property
    def diag(self):
        return self.blocks[0]

    @property
    def upper(self):
        return self.blocks[1, :-1]

    @property
    def lower(self):
        return self.blocks[2, :-1]

    @property
    def dtype(self):
        return self.blocks.dtype

    @property
    def shape(self):
        n = self.n_blocks * self.m
        return (n, n)

    @classmethod
    def from_blocks(cls, diag, upper, lower):
        diag = np.asarray(diag)
        nb, m, _ = diag.shape
        dtype = np.result_type(diag, upper, lower)
        mat = cls(nb, m, dtype)
        mat.blocks[0] = diag
        if nb > 1:
            mat.blocks[1, :-1] = upper
            mat.blocks[2, :-1] = lower
        return mat

    def scatter(self, rhs, mats, vecs, gmap):
        """Add element matrices ``mats[e]`` at global indices ``gmap[e]``."""
        _kernels.scatter_blocks(self.blocks, rhs, mats, vecs, gmap, self.m)

    def matvec(self, x):
        nb, m = self.n_blocks, self.m
        xb = np.asarray(x).reshape(nb, m, -1)
        y = np.einsum("jab,jbk->jak", self.diag, xb)
        if nb > 1:
            y[:-1] += np.einsum("jab,jbk->jak", self.upper, xb[1:])
            y[1:] += np.einsum("jab,jbk->jak", self.lower, xb[:-1])
        return y.reshape(np.shape(x))

    def __matmul__(self, x):
        return self.matvec(x)

    def apply_dirichlet(self, rhs, dofs, values):
        """Eliminate prescribed unknowns symmetrically, in place."""
        dofs = np.asarray(dofs, dtype=np.int64).ravel()
        values = np.broadcast_to(np.asarray(values, dtype=self.dtype), dofs.shape)
        xfix = np.zeros(self.n_blocks * self.m, dtype=self.dtype)
        xfix[dofs] = values
        rhs -= self.matvec(xfix)
        mask = np.zeros(self.n_blocks * self.m, dtype=bool)
        mask[dofs] = True
        mask = mask.reshape(self.n_blocks, self.m)
        for j in range(self.n_blocks):
            mj = mask[j]
            if not mj.any():
                continue
            self.blocks[0, j][mj, :] = 0
            self.blocks[0, j][:, mj] = 0
            if j + 1 < self.n_blocks:
                self.blocks[1, j][mj, :] = 0
                self.blocks[2, j][:, mj] = 0
            if j > 0:
                self.blocks[1, j - 1][:, mj] = 0
                self.blocks[2, j - 1][mj, :] = 0
            idx = np.flatnonzero(mj)
            self.blocks[0, j][idx, idx] = 1
        rhs[dofs] = values

    def to_sparse(self):
        nb, m = self.n_blocks, self.m
        rows, cols, vals = [], [], []
        base = np.arange(m)
        r0, c0 = np.meshgrid(base, base, indexing="ij")
        for j in range(nb):
            rows.append(r0 + j * m)
            cols.append(c0 + j * m)
            vals.append(self.diag[j])
            if j + 1 < nb:
                rows += [r0 + j * m, r0 + (j + 1) * m]
                cols += [c0 + (j + 1) * m, c0 + j * m]
                vals += [self.blocks[1, j], self.blocks[2, j]]
        rows = np.concatenate([r.ravel() for r in rows])
        cols = np.concatenate([c.ravel() for c in cols])
        vals = np.concatenate([v.ravel() for v in vals])
        keep = vals != 0
        return sp.csc_matrix((vals[keep], (rows[keep], cols[keep])), shape=self.shape)

    def to_dense(self):
        return self.to_sparse().toarray()


@dataclass(frozen=True)
class Factorization:
    method: str
    n_blocks: int
    m: int
    pivots: tuple = ()  # LU factors of the Schur pivot blocks
    couplings: tuple = ()  # S_j^{-1} U_j
    lowers: tuple = ()
    splu: object = None

    def solve(self, rhs):
        return solve(self, rhs)


def _check_pivot(lu, j):
    d = np.abs(np.diag(lu[0]))
    if not np.all(np.isfinite(d)) or d.min() <= 1e-13 * max(d.max(), 1e-300):
        raise SingularSystemError("singular pivot block", layer=j)


def factorize(matrix: LayeredMatrix, method="block") -> Factorization:
    """Factorize a layered matrix by block Thomas elimination (or sparse LU)."""
    nb, m = matrix.n_blocks, matrix.m
    if method == "sparse":
        try:
            lu = spla.splu(matrix.to_sparse())
        except RuntimeError as exc:
            raise SingularSystemError(str(exc)) from exc
        return Factorization("sparse", nb, m, splu=lu)
    if method != "block":
        raise ValueError(f"unknown factorization method {method!r}")
    pivots, couplings = [], []
    schur = matrix.diag[0].copy()
    for j in range(nb):
        with warnings.catch_warnings():
            # exact zero pivots are reported below with the layer index
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu = sla.lu_factor(schur, check_finite=False)
        _check_pivot(lu, j)
        pivots.append(lu)
        if j + 1 < nb:
            w = sla.lu_solve(lu, matrix.blocks[1, j], check_finite=False)
            couplings.append(w)
            schur = matrix.diag[j + 1] - matrix.blocks[2, j] @ w
    lowers = tuple(matrix.blocks[2, j].copy() for j in range(nb - 1))
    return Factorization("block", nb, m, tuple(pivots), tuple(couplings), lowers)


def solve(fact: Factorization, rhs):
    """Solve with an existing factorization; ``rhs`` may have several columns."""
    rhs = np.asarray(rhs)
    n = fact.n_blocks * fact.m
    if rhs.shape[0] != n:
        raise ValueError(f"rhs has {rhs.shape[0]} rows, system has {n}")
    if fact.method == "sparse":
        return fact.splu.solve(np.asarray(rhs, dtype=np.result_type(rhs, fact.splu.U.dtype)))
    nb, m = fact.n_blocks, fact.m
    b = rhs.reshape(nb, m, -1)
    dtype = np.result_type(b, fact.pivots[0][0])
    y = np.empty(b.shape, dtype=dtype)
    y[0] = sla.lu_solve(fact.pivots[0], b[0], check_finite=False)
    for j in range(1, nb):
        y[j] = sla.lu_solve(fact.pivots[j], b[j] - fact.lowers[j - 1] @ y[j - 1], check_finite=False)
    for j in range(nb - 2, -1, -1):
        y[j] -= fact.couplings[j] @ y[j + 1]
    return y.reshape(rhs.shape)


def solve_refined(matrix: LayeredMatrix, fact: Factorization, rhs, steps=1):
    """Solve followed by ``steps`` rounds of iterative refinement."""
    x = solve(fact, rhs)
    for _ in range(steps):
        x = x + solve(fact, rhs - matrix.matvec(x))
    return x


def relative_residual(matrix: LayeredMatrix, x, rhs) -> float:
    nb = np.linalg.norm(rhs)
    return float(np.linalg.norm(matrix.matvec(x) - rhs) / (nb if nb > 0 else 1.0))
