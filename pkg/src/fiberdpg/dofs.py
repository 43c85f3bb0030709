"""Layer-ordered numbering of skeleton (trace) unknowns.

Unknowns attached to vertices and edges are grouped into blocks by z: block
``j < n_z`` holds the vertices and horizontal edges of row ``j`` together with
the vertical edges of layer ``j``; block ``n_z`` holds row ``n_z`` only.  An
element of layer ``j`` then touches blocks ``j`` and ``j + 1`` and the global
matrix is block tridiagonal.  All blocks share one size ``m``; the unused tail
of the last block is padding that the solver pins to the identity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TraceLayout:
    n_x: int
    n_z: int
    nv: int  # unknowns per vertex
    ne: int  # unknowns per edge (horizontal and vertical)

    @property
    def row_size(self) -> int:
        return (self.n_x + 1) * self.nv + self.n_x * self.ne

    @property
    def block_size(self) -> int:
        return self.row_size + (self.n_x + 1) * self.ne

    @property
    def n_blocks(self) -> int:
        return self.n_z + 1

    @property
    def size(self) -> int:
        return self.n_blocks * self.block_size

    def vertex(self, i, j):
        """Global indices (..., nv) of the unknowns at vertex (i, j)."""
        i, j = np.asarray(i), np.asarray(j)
        base = j * self.block_size + i * self.nv
        return base[..., None] + np.arange(self.nv)

    def hedge(self, i, j):
        i, j = np.asarray(i), np.asarray(j)
        base = j * self.block_size + (self.n_x + 1) * self.nv + i * self.ne
        return base[..., None] + np.arange(self.ne)

    def vedge(self, i, j):
        i, j = np.asarray(i), np.asarray(j)
        base = j * self.block_size + self.row_size + i * self.ne
        return base[..., None] + np.arange(self.ne)

    def padding(self) -> np.ndarray:
        start = self.n_z * self.block_size + self.row_size
        return np.arange(start, self.size)

    def element_map(self, segments) -> np.ndarray:
        """Local-to-global index map for every element, shape (n_el, n_loc).

        Local order: the ``nv`` unknowns of vertices v0..v3, then for each
        ``(offset, count)`` in ``segments`` the slice ``[offset, offset+count)``
        of the edge unknowns of the bottom, right, top and left edges.
        """
        jj, ii = np.meshgrid(np.arange(self.n_z), np.arange(self.n_x), indexing="ij")
        i, j = ii.ravel(), jj.ravel()
        parts = [
            self.vertex(i, j),
            self.vertex(i + 1, j),
            self.vertex(i + 1, j + 1),
            self.vertex(i, j + 1),
        ]
        edges = [self.hedge(i, j), self.vedge(i + 1, j), self.hedge(i, j + 1), self.vedge(i, j)]
        for off, cnt in segments:
            parts += [e[:, off:off + cnt] for e in edges]
        return np.concatenate(parts, axis=1)

    def boundary_line(self, side, offset=0, count=None, with_vertices=True):
        """Global indices of unknowns on one boundary side.

        ``side`` is one of ``"bottom"`` (z = 0), ``"top"``, ``"left"``
        (x = x_min), ``"right"``.  Edge unknowns are restricted to the slice
        ``[offset, offset + count)``.  Returned arrays are (vertex_dofs,
        edge_dofs), each ordered along the line.
        """
        count = self.ne - offset if count is None else count
        if side in ("bottom", "top"):
            j = 0 if side == "bottom" else self.n_z
            i = np.arange(self.n_x)
            verts = self.vertex(np.arange(self.n_x + 1), j)
            eds = self.hedge(i, j)[:, offset:offset + count]
        else:
            i = 0 if side == "left" else self.n_x
            j = np.arange(self.n_z)
            verts = self.vertex(i, np.arange(self.n_z + 1))
            eds = self.vedge(i, j)[:, offset:offset + count]
        if not with_vertices:
            verts = verts[:0]
        return verts, eds
