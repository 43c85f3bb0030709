"""Layered structured quadrilateral mesh of the (x, z) slab.

Elements are numbered layer-major (``e = j * n_x + i`` for column ``i`` and
layer ``j``) so that every z-layer is a contiguous block.  Skeleton edges are
either horizontal (constant z, global normal +z) or vertical (constant x,
global normal +x).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Mesh:
    x: np.ndarray  # column breakpoints, increasing, includes +-core_halfwidth
    z: np.ndarray  # layer breakpoints, increasing
    core_halfwidth: float
    z_pml: float  # start of the absorbing layer (== z[-1] when absent)
    core_col: np.ndarray = field(init=False)
    pml_layer: np.ndarray = field(init=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        z = np.asarray(self.z, dtype=float)
        if np.any(np.diff(x) <= 0) or np.any(np.diff(z) <= 0):
            raise ConfigError("mesh breakpoints must be strictly increasing")
        xc = 0.5 * (x[1:] + x[:-1])
        zc = 0.5 * (z[1:] + z[:-1])
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "core_col", np.abs(xc) < self.core_halfwidth)
        object.__setattr__(self, "pml_layer", zc > self.z_pml)

    @property
    def n_x(self) -> int:
        return self.x.size - 1

    @property
    def n_z(self) -> int:
        return self.z.size - 1

    @property
    def n_elements(self) -> int:
        return self.n_x * self.n_z

    @property
    def hx(self) -> np.ndarray:
        return np.diff(self.x)

    @property
    def hz(self) -> np.ndarray:
        return np.diff(self.z)

    @property
    def n_interior_layers(self) -> int:
        """Number of layers in front of the absorbing layer."""
        return int(np.count_nonzero(~self.pml_layer))

    def element(self, i: int, j: int) -> int:
        return j * self.n_x + i

    def column_layer(self, e):
        e = np.asarray(e)
        return e % self.n_x, e // self.n_x

    def element_areas(self) -> np.ndarray:
        return np.outer(self.hz, self.hx).ravel()

    def region_tags(self):
        """Per element (material, zone) with material in {core, cladding}."""
        tags = []
        for j in range(self.n_z):
            zone = "pml" if self.pml_layer[j] else "interior"
            for i in range(self.n_x):
                tags.append(("core" if self.core_col[i] else "cladding", zone))
        return tags

    def vertex_id(self, i, j):
        return np.asarray(j) * (self.n_x + 1) + np.asarray(i)

    def skeleton_edges(self):
        """Edge list as a dict of arrays.

        ``kind`` is 0 for horizontal and 1 for vertical edges; ``elements``
        holds the (minus, plus) neighbours with respect to the global normal
        (-1 on the boundary) and ``signs`` the matching outward-normal signs
        ``n_K . nu``.
        """
        nx, nz = self.n_x, self.n_z
        kind, v0, v1, em, ep = [], [], [], [], []
        for j in range(nz + 1):
            for i in range(nx):
                kind.append(0)
                v0.append(self.vertex_id(i, j))
                v1.append(self.vertex_id(i + 1, j))
                em.append(self.element(i, j - 1) if j > 0 else -1)
                ep.append(self.element(i, j) if j < nz else -1)
        for j in range(nz):
            for i in range(nx + 1):
                kind.append(1)
                v0.append(self.vertex_id(i, j))
                v1.append(self.vertex_id(i, j + 1))
                em.append(self.element(i - 1, j) if i > 0 else -1)
                ep.append(self.element(i, j) if i < nx else -1)
        em = np.array(em)
        ep = np.array(ep)
        elements = np.stack([em, ep], axis=1)
        # the element below/left of an edge sees the global normal as outward
        signs = np.where(elements >= 0, np.array([1, -1])[None, :], 0)
        return {
            "kind": np.array(kind),
            "vertices": np.stack([v0, v1], axis=1),
            "elements": elements,
            "signs": signs,
        }

    def interior_submesh(self) -> "Mesh":
        """Mesh of the layers ahead of the absorbing layer (heat domain)."""
        nzi = self.n_interior_layers
        z = self.z[: nzi + 1]
        return Mesh(self.x, z, self.core_halfwidth, z[-1])


def transverse_breakpoints(n_transverse, core_halfwidth, clad_halfwidth, clad_growth=2.0):
    """Breakpoints with uniform core elements and graded cladding elements.

    A quarter of the elements (at least one) go to each cladding side, the rest
    uniformly across the core.  Cladding widths grow geometrically away from
    the core by ``clad_growth``.
    """
    if n_transverse < 4:
        raise ConfigError("need at least 4 transverse elements")
    if not 0 < core_halfwidth < clad_halfwidth:
        raise ConfigError("core must lie strictly inside the cladding")
    n_clad = max(1, -(-n_transverse // 4))
    n_core = n_transverse - 2 * n_clad
    if n_core < 1:
        n_clad -= 1
        n_core = n_transverse - 2 * n_clad
    clad_len = clad_halfwidth - core_halfwidth
    widths = float(clad_growth) ** np.arange(n_clad)
    widths *= clad_len / widths.sum()
    right = core_halfwidth + np.concatenate([[0.0], np.cumsum(widths)])
    right[-1] = clad_halfwidth
    core = np.linspace(-core_halfwidth, core_halfwidth, n_core + 1)
    return np.concatenate([-right[::-1], core[1:-1], right])


def build_layered_mesh(config, nondim) -> Mesh:
    """Mesh of [-r_clad, r_clad] x [0, L + L_pml] in non-dimensional units."""
    nlam = config.num_wavelengths
    epw = config.elems_per_wavelength
    npml = config.pml_wavelengths
    if nlam < 1 or epw < 1 or npml < 0:
        raise ConfigError("wavelength and element counts must be positive")
    x = transverse_breakpoints(
        config.n_transverse_elems, nondim.a_core, nondim.a_clad, config.clad_growth
    )
    h = nondim.wavelength_hat / epw
    nz_int = nlam * epw
    nz = nz_int + npml * epw
    z = h * np.arange(nz + 1)
    z[nz_int] = nondim.L_tilde
    return Mesh(x, z, nondim.a_core, z[nz_int])
