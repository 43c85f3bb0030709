"""Broken ultraweak DPG discretization of the scaled TE slab Maxwell system.

With E = E_y(x, z), H = (H_x, H_z) and the coordinate stretch s(z) of the
absorbing layer, the first-order system multiplied through by s reads

    -dE/dz + i w s H_x = f_1
    s dE/dx + i w s H_z = f_2
    dH_x/dz - s dH_z/dx - i w s n^2 E + s n gamma g E = f_3

with gamma = l0g0 * gain_scale.  All derivatives are moved onto broken test
functions (F_x, F_z, G); the skeleton carries a continuous trace E^ and an
edge flux H^ = nu_z H_x - s nu_x H_z for the global edge normal nu.  Optimal
test functions come from the adjoint graph norm ||A* v||^2 + ||v||^2.  Field
unknowns are condensed element by element, leaving a layered trace system.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from . import fespace, solver
from .dofs import TraceLayout
from .errors import InvalidParameterError, NumericalBreakdownError

EDGES = ("bottom", "right", "top", "left")
# vertices at the start and end of each edge parameter
_EDGE_VERTS = ((0, 1), (1, 2), (3, 2), (0, 3))
_BATCH = 48


def pml_stretch(z, z_pml, pml_length, sigma_max, omega_hat):
    """Complex stretch s(z) = 1 - i sigma_max ((z - z_pml)/L_pml)^3 / omega."""
    z = np.asarray(z, dtype=float)
    if pml_length <= 0:
        return np.ones(z.shape, dtype=complex)
    r = np.clip((z - z_pml) / pml_length, 0.0, None)
    return 1.0 - 1j * sigma_max * r**3 / omega_hat


def _tensor_mass(p):
    a = fespace.tensor_index(p)
    m1 = fespace.legendre_mass(p)
    return m1[a[:, 0]] * m1[a[:, 1]]


class MaxwellDiscretization:
    """Mesh-dependent tables shared by every Maxwell problem on one mesh."""

    def __init__(self, mesh, p=5, delta_p=1, cache_size=512):
        if p < 1 or delta_p < 0:
            raise InvalidParameterError("need p >= 1 and delta_p >= 0")
        self.mesh = mesh
        self.p = p
        self.delta_p = delta_p
        # exact-sequence order of the trial space is p + 1 (E^ has degree p + 1)
        self.pt = p + 1 + delta_p
        self.rule = fespace.quadrature_rule(2 * self.pt + 2)
        self.nq1 = self.rule.npoints
        xi, eta, w = self.rule.tensor()
        self.xi, self.eta, self.w = xi, eta, w
        self.nq = w.size

        self.test = fespace.tabulate("l2", self.pt, self.rule)
        self.trial = fespace.tabulate("l2", p, self.rule)
        self.nt1 = self.test.dim
        self.nu1 = self.trial.dim
        self.n_test = 3 * self.nt1
        self.n_field = 3 * self.nu1

        self.layout = TraceLayout(mesh.n_x, mesh.n_z, nv=1, ne=2 * p + 1)
        self.n_trace = 4 + 4 * p + 4 * (p + 1)
        self.gmap = self.layout.element_map([(0, p), (p, p + 1)])

        t = self.rule.points
        self._edge_tables(t)
        self.pml_length = mesh.z[-1] - mesh.z_pml
        self.cache = OrderedDict()
        self.cache_size = cache_size

        # element geometry and quadrature points
        ii, jj = np.meshgrid(np.arange(mesh.n_x), np.arange(mesh.n_z), indexing="xy")
        self.col = ii.ravel()
        self.lay = jj.ravel()
        x0, hx = mesh.x[self.col], mesh.hx[self.col]
        z0, hz = mesh.z[self.lay], mesh.hz[self.lay]
        self.hx, self.hz = hx, hz
        self.jac = hx * hz / 4
        self.xq = x0[:, None] + 0.5 * hx[:, None] * (xi + 1)
        self.zq = z0[:, None] + 0.5 * hz[:, None] * (eta + 1)
        self.ze = z0[:, None] + 0.5 * hz[:, None] * (t + 1)  # points on vertical edges
        self.core_q = (np.abs(self.xq) < mesh.core_halfwidth) & mesh.core_col[self.col][:, None]
        self.interior = ~mesh.pml_layer[self.lay]

        self.field_mass = _tensor_mass(p)
        self.test_mass = _tensor_mass(self.pt)

    def _edge_tables(self, t):
        pt, p = self.pt, self.p
        leg_t, _ = fespace.legendre_table(pt, t)
        ends, _ = fespace.legendre_table(pt, np.array([-1.0, 1.0]))
        idx = fespace.tensor_index(pt)
        a, b = idx[:, 0], idx[:, 1]
        # test values on each edge, shape (nt1, nq1)
        self.test_edge = {
            "bottom": leg_t[a] * ends[b, 0][:, None],
            "top": leg_t[a] * ends[b, 1][:, None],
            "left": ends[a, 0][:, None] * leg_t[b],
            "right": ends[a, 1][:, None] * leg_t[b],
        }
        self.e_trace, _ = fespace.h1_table(p + 1, t)  # [N0, N1, bubbles]
        self.h_trace, _ = fespace.legendre_table(p, t)

    def quad_points(self):
        return self.xq, self.zq

    def stretch(self, omega_hat, sigma_max):
        m = self.mesh
        sq = pml_stretch(self.zq, m.z_pml, self.pml_length, sigma_max, omega_hat)
        se = pml_stretch(self.ze, m.z_pml, self.pml_length, sigma_max, omega_hat)
        return sq, se

    def trace_local(self, edge, kind):
        """Local trace indices of the E-bubbles or H dofs of one element edge."""
        e = EDGES.index(edge)
        p = self.p
        if kind == "E":
            return 4 + e * p + np.arange(p)
        return 4 + 4 * p + e * (p + 1) + np.arange(p + 1)

    def cache_put(self, key, value):
        self.cache[key] = value
        while len(self.cache) > self.cache_size:
            self.cache.popitem(last=False)


@dataclass
class LocalSystem:
    """Element data for a group of elements sharing identical material samples.

    ``W = L^{-1} B`` and ``c = L^{-1} l`` with ``G = L L^H``; ``S`` and ``r``
    are the condensed trace matrix and load; ``X_t``, ``X_r`` recover the
    field unknowns from the traces.
    """

    W: np.ndarray
    c: np.ndarray
    S: np.ndarray
    r: np.ndarray
    X_t: np.ndarray
    X_r: np.ndarray


class MaxwellProblem:
    """One linear Maxwell system (frozen material) on a discretization."""

    def __init__(self, disc, omega_hat, n=1.0, gain=0.0, gain_scale=0.0, l0g0=1e-6,
                 sigma_max=40.0, field_id="s", load=None):
        if omega_hat <= 0:
            raise InvalidParameterError("omega_hat must be positive")
        shape = (disc.mesh.n_elements, disc.nq)
        self.disc = disc
        self.field_id = field_id
        self.omega_hat = float(omega_hat)
        self.n = np.broadcast_to(np.asarray(n, dtype=float), shape)
        if np.any(self.n < 1) or not np.all(np.isfinite(self.n)):
            raise InvalidParameterError("refractive index must be finite and >= 1")
        self.gain = np.broadcast_to(np.asarray(gain, dtype=float), shape)
        self.gain_scale = float(gain_scale)
        self.l0g0 = float(l0g0)
        self.sigma_max = float(sigma_max)
        self.load = load
        self.s_q, self.s_e = disc.stretch(self.omega_hat, self.sigma_max)
        pml = ~disc.interior
        if np.any(self.gain[pml] != 0):
            raise InvalidParameterError("gain must vanish inside the absorbing layer")
        self._systems = None
        self._index = None

    @property
    def gamma(self):
        return self.l0g0 * self.gain_scale

    def systems(self):
        if self._systems is None:
            self._systems, self._index = assemble(self)
        return self._systems, self._index


def _load_samples(problem, elems):
    d = problem.disc
    f = problem.load(d.xq[elems], d.zq[elems])
    return [np.broadcast_to(np.asarray(fc, dtype=complex), (len(elems), d.nq)) for fc in f]


def assemble_element(problem, elems) -> LocalSystem:
    """Enriched stiffness, Gram factorization and condensed system of ``elems``.

    ``elems`` is an array of element ids computed as one batch; the returned
    arrays carry a leading batch axis.
    """
    d = problem.disc
    elems = np.atleast_1d(np.asarray(elems))
    nb = elems.size
    nt1 = d.nt1
    jac = d.jac[elems][:, None, None]
    A, Aw, gram = _adjoint_gram(problem, elems)

    # field columns: B[i, (c, k)] = int u_k conj(A*v_i)_c
    Bf = (Aw.reshape(-1, d.nq) @ d.trial.values.T).reshape(nb, 3 * nt1, d.n_field)
    Bf *= jac
    Bt = _trace_columns(d, problem.s_e[elems], elems)
    B = np.concatenate([Bf, Bt], axis=2)

    load = np.zeros((nb, 3 * nt1), dtype=complex)
    if problem.load is not None:
        f = _load_samples(problem, elems)
        for c in range(3):
            load[:, c * nt1:(c + 1) * nt1] = jac[:, :, 0] * ((f[c] * d.w) @ d.test.values.T)

    try:
        L = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        for k in range(nb):
            try:
                np.linalg.cholesky(gram[k])
            except np.linalg.LinAlgError:
                raise NumericalBreakdownError("Gram matrix not positive definite",
                                              element=int(elems[k])) from None
        raise
    sol = np.linalg.solve(L, np.concatenate([B, load[:, :, None]], axis=2))
    W, c = sol[:, :, :-1], sol[:, :, -1]
    WH = np.conj(W).transpose(0, 2, 1)
    Aloc = WH @ W
    rloc = (WH @ c[:, :, None])[:, :, 0]
    nf = d.n_field
    Aff, Aft = Aloc[:, :nf, :nf], Aloc[:, :nf, nf:]
    Atf, Att = Aloc[:, nf:, :nf], Aloc[:, nf:, nf:]
    X = np.linalg.solve(Aff, np.concatenate([Aft, rloc[:, :nf, None]], axis=2))
    X_t, X_r = X[:, :, :-1], X[:, :, -1]
    S = Att - Atf @ X_t
    r = rloc[:, nf:] - (Atf @ X_r[:, :, None])[:, :, 0]
    S = 0.5 * (S + np.conj(S).transpose(0, 2, 1))
    return LocalSystem(W, c, S, r, X_t, X_r)


def _adjoint_gram(problem, elems):
    """Adjoint images A*v of the test basis and the graph-norm Gram matrices."""
    d = problem.disc
    nb = elems.size
    om = problem.omega_hat
    jac = d.jac[elems][:, None, None]
    ax = (2.0 / d.hx[elems])[:, None, None]
    az = (2.0 / d.hz[elems])[:, None, None]
    sc = np.conj(problem.s_q[elems])[:, None]
    n = problem.n[elems]
    ng = n * problem.gamma * problem.gain[elems]
    V, Dx, Dz = d.test.values, d.test.d_xi, d.test.d_eta
    nt1, nq = d.nt1, d.nq

    # blocks F_x, F_z, G; components (E, H_x, H_z); shape (nb, 3*nt1, 3, nq)
    A = np.zeros((nb, 3 * nt1, 3, nq), dtype=complex)
    A[:, :nt1, 0] = az * Dz
    A[:, :nt1, 1] = -1j * om * sc * V
    A[:, nt1:2 * nt1, 0] = -sc * ax * Dx
    A[:, nt1:2 * nt1, 2] = -1j * om * sc * V
    A[:, 2 * nt1:, 0] = (sc[:, 0] * (1j * om * n**2 + ng))[:, None] * V
    A[:, 2 * nt1:, 1] = -az * Dz
    A[:, 2 * nt1:, 2] = sc * ax * Dx

    Aw = np.conj(A) * d.w
    flat = A.reshape(nb, 3 * nt1, 3 * nq)
    gram = jac * (Aw.reshape(nb, 3 * nt1, 3 * nq) @ flat.transpose(0, 2, 1))
    diag = np.arange(3 * nt1)
    gram[:, diag, diag] += jac[:, :, 0] * np.tile(d.test_mass, 3)
    return A, Aw, gram


def _trace_columns(d, s_edge, elems):
    """Columns of B belonging to the element trace unknowns."""
    nb = elems.size
    nt1 = d.nt1
    wq = d.rule.weights
    B = np.zeros((nb, 3 * nt1, d.n_trace), dtype=complex)
    hx = d.hx[elems][:, None, None]
    hz = d.hz[elems][:, None, None]
    for e, edge in enumerate(EDGES):
        tv = d.test_edge[edge] * wq  # (nt1, nq1)
        horizontal = edge in ("bottom", "top")
        sign = 1.0 if edge in ("top", "right") else -1.0
        half = 0.5 * (hx if horizontal else hz)
        # E^ pairs with F_x on horizontal edges (-n_z) and with s F_z on vertical ones (s n_x)
        e_funcs = d.e_trace  # [N0, N1, bubbles]
        if horizontal:
            ecol = (-sign) * half * (tv @ e_funcs.T)[None]
            rows = slice(0, nt1)
        else:
            ecol = sign * half * np.einsum("iq,kq,eq->eik", tv, e_funcs, s_edge)
            rows = slice(nt1, 2 * nt1)
        v0, v1 = _EDGE_VERTS[e]
        B[:, rows, v0] += ecol[..., 0]
        B[:, rows, v1] += ecol[..., 1]
        B[:, rows, d.trace_local(edge, "E")] += ecol[..., 2:]
        hcol = sign * half * (tv @ d.h_trace.T)[None]
        B[:, 2 * nt1:, d.trace_local(edge, "H")] += hcol
    return B


def _material_keys(problem):
    """Group elements with identical element systems."""
    d = problem.disc
    if problem.load is not None:
        return None
    ne = d.mesh.n_elements
    pml = ~d.interior
    keys = []
    gam = problem.gamma
    for e in range(ne):
        parts = [np.array([d.hx[e], d.hz[e], problem.omega_hat, gam, problem.sigma_max]),
                 problem.n[e], problem.gain[e] if gam else np.zeros(0)]
        if pml[e]:
            parts.append(d.zq[e, :1] - d.mesh.z_pml)
        keys.append(np.concatenate(parts).tobytes())
    return keys


def assemble(problem):
    """Local systems for all elements; returns (unique systems, element index)."""
    d = problem.disc
    ne = d.mesh.n_elements
    keys = _material_keys(problem)
    if keys is None:
        rep = np.arange(ne)
        index = np.arange(ne)
        uniq_keys = [None] * ne
    else:
        first = {}
        index = np.empty(ne, dtype=np.int64)
        rep = []
        uniq_keys = []
        for e, k in enumerate(keys):
            if k not in first:
                first[k] = len(rep)
                rep.append(e)
                uniq_keys.append(k)
            index[e] = first[k]
        rep = np.array(rep)
    nu = len(rep)
    have = [d.cache.get(k) if k is not None else None for k in uniq_keys]
    todo = [u for u in range(nu) if have[u] is None]
    parts = {}
    for start in range(0, len(todo), _BATCH):
        chunk = todo[start:start + _BATCH]
        sysb = assemble_element(problem, rep[chunk])
        for off, u in enumerate(chunk):
            one = LocalSystem(sysb.W[off], sysb.c[off], sysb.S[off], sysb.r[off],
                              sysb.X_t[off], sysb.X_r[off])
            parts[u] = one
            if uniq_keys[u] is not None:
                d.cache_put(uniq_keys[u], one)
    systems = [have[u] if have[u] is not None else parts[u] for u in range(nu)]
    return systems, index


@dataclass
class BoundaryData:
    """Prescribed E^ on boundary sides as (vertex values, bubbles) per side.

    Sides missing from ``values`` but listed in ``pec`` get E^ = 0.  Later
    entries of ``order`` win at shared corners.
    """

    values: dict = field(default_factory=dict)
    pec: tuple = ("left", "right", "top")

    def order(self):
        return [s for s in self.pec if s not in self.values] + list(self.values)


def inlet_boundary(verts, bubbles):
    return BoundaryData(values={"bottom": (verts, bubbles)})


def _dirichlet(disc, bc):
    lay, p = disc.layout, disc.p
    vals = {}
    for side in bc.order():
        vd, ed = lay.boundary_line(side, offset=0, count=p)
        if side in bc.values:
            v, b = bc.values[side]
            v = np.asarray(v, dtype=complex)
            b = np.asarray(b, dtype=complex).reshape(ed.shape)
        else:
            v = np.zeros(vd.shape[0], dtype=complex)
            b = np.zeros(ed.shape, dtype=complex)
        for g, val in zip(vd.ravel(), v.ravel()):
            vals[int(g)] = val
        for g, val in zip(ed.ravel(), b.ravel()):
            vals[int(g)] = val
    for g in lay.padding():
        vals[int(g)] = 0.0
    dofs = np.fromiter(vals.keys(), dtype=np.int64)
    values = np.array(list(vals.values()), dtype=complex)
    return dofs, values


@dataclass
class FieldSolution:
    """Discrete field: Legendre coefficients per element plus skeleton traces."""

    disc: MaxwellDiscretization
    E: np.ndarray  # (n_el, (p+1)^2)
    Hx: np.ndarray
    Hz: np.ndarray
    traces: np.ndarray  # global trace vector
    solver_residual: float = 0.0
    field_id: str = "s"

    def at_quadrature(self):
        U = self.disc.trial.values
        return self.E @ U, self.Hx @ U, self.Hz @ U

    def l2_norm(self, which="E", interior_only=True):
        return np.sqrt(self.l2_inner(getattr(self, which), interior_only))

    def l2_inner(self, coeffs, interior_only=True):
        d = self.disc
        mask = d.interior if interior_only else np.ones(d.mesh.n_elements, dtype=bool)
        val = (np.abs(coeffs[mask]) ** 2) @ d.field_mass
        return float(np.sum(d.jac[mask] * val))

    def relative_change(self, other):
        """||E - E_other|| / ||E|| over the pre-absorber region."""
        num = self.l2_inner(self.E - other.E)
        den = self.l2_inner(self.E)
        return float(np.sqrt(num / den)) if den > 0 else (0.0 if num == 0 else np.inf)

    def local_traces(self):
        return self.traces[self.disc.gmap]

    def row_trace(self, j):
        """E^ on row j as (vertex values, bubbles) and H^ Legendre coefficients."""
        lay, p = self.disc.layout, self.disc.p
        n_x = lay.n_x
        verts = self.traces[lay.vertex(np.arange(n_x + 1), j)[:, 0]]
        hed = self.traces[lay.hedge(np.arange(n_x), j)]
        return verts, hed[:, :p], hed[:, p:]

    def power_flux(self, j):
        """-1/2 int Re(E^ conj(H^_x)) dx over the horizontal edges of row j."""
        d = self.disc
        m = d.mesh
        if not 0 <= j <= m.n_z:
            raise IndexError(f"layer interface {j} outside 0..{m.n_z}")
        verts, bub, hcoef = self.row_trace(j)
        et = verts[:-1, None] * d.e_trace[0] + verts[1:, None] * d.e_trace[1] + bub @ d.e_trace[2:]
        ht = hcoef @ d.h_trace
        integrand = np.real(et * np.conj(ht)) @ d.rule.weights
        return float(-0.5 * np.sum(0.5 * m.hx * integrand))

    def power_curve(self):
        m = self.disc.mesh
        return m.z.copy(), np.array([self.power_flux(j) for j in range(m.n_z + 1)])

    def eval_E(self, x, j):
        """E^ trace along row j at points x."""
        verts, bub, _ = self.row_trace(j)
        return fespace.eval_line(verts, bub, self.disc.mesh.x, x)


def solve_linear_maxwell(problem, bc, method="block", refine=1) -> FieldSolution:
    """Assemble, condense, solve the layered trace system and back-substitute."""
    d = problem.disc
    systems, index = problem.systems()
    lay = d.layout
    S = np.stack([s.S for s in systems])[index]
    r = np.stack([s.r for s in systems])[index]
    mat = solver.LayeredMatrix(lay.n_blocks, lay.block_size, complex)
    rhs = np.zeros(lay.size, dtype=complex)
    mat.scatter(rhs, S, r, d.gmap)
    dofs, values = _dirichlet(d, bc)
    mat.apply_dirichlet(rhs, dofs, values)
    fact = solver.factorize(mat, method)
    x = solver.solve_refined(mat, fact, rhs, steps=refine)
    res = solver.relative_residual(mat, x, rhs)
    ut = x[d.gmap]
    X_t = np.stack([s.X_t for s in systems])
    X_r = np.stack([s.X_r for s in systems])
    uf = X_r[index] - np.einsum("eij,ej->ei", X_t[index], ut)
    nu1 = d.nu1
    return FieldSolution(d, uf[:, :nu1], uf[:, nu1:2 * nu1], uf[:, 2 * nu1:], x, res,
                         problem.field_id)


def residual(problem, solution):
    """Per-element DPG residuals eta_K (adjoint graph norm) and the total."""
    d = problem.disc
    systems, index = problem.systems()
    u = np.concatenate([solution.E, solution.Hx, solution.Hz, solution.local_traces()], axis=1)
    eta2 = np.empty(d.mesh.n_elements)
    for e in range(d.mesh.n_elements):
        s = systems[index[e]]
        rt = s.c - s.W @ u[e]
        eta2[e] = np.vdot(rt, rt).real
    return np.sqrt(eta2), float(np.sqrt(eta2.sum()))


def gram_min_eigenvalues(problem, elems):
    """Smallest Gram eigenvalue of each element in ``elems`` (diagnostic)."""
    _, _, gram = _adjoint_gram(problem, np.atleast_1d(np.asarray(elems)))
    return np.linalg.eigvalsh(gram)[:, 0]
