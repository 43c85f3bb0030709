"""Broken primal DPG for the scaled heat equation with implicit Euler steps.

One step solves

    (T, v) + dt a0 (Lam grad T, grad v) - dt a0 <sig, v> = (T_old + dt Q0 Q, v)

for a continuous temperature T of degree p and an edge flux
sig = (Lam grad T) . nu of degree p - 1 on every skeleton edge, with broken
test functions of degree p + delta_p.  The test norm is the energy norm of
the step operator, (v, v) + dt a0 (Lam grad v, grad v).  ``Lam`` is
diag(1, alpha_z^2).  Element bubbles are condensed; the remaining layered
system does not change between steps and is factorized once.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import fespace, solver
from .dofs import TraceLayout
from .errors import InvalidParameterError, NumericalBreakdownError, SingularSystemError

SIDES = ("bottom", "right", "top", "left")
_OUT_SIGN = {"bottom": -1.0, "right": 1.0, "top": 1.0, "left": -1.0}


@dataclass(frozen=True)
class AnisotropyTensor:
    alpha_z: float

    def __post_init__(self):
        if not 0 < self.alpha_z <= 1:
            raise InvalidParameterError("alpha_z must lie in (0, 1]")

    @property
    def matrix(self):
        return np.diag([1.0, self.alpha_z**2])


@dataclass(frozen=True)
class HeatState:
    """Temperature coefficients: global trace vector plus condensed bubbles."""

    coeffs: np.ndarray
    interior: np.ndarray
    step: int = 0
    time: float = 0.0


class HeatSolver:
    """Factorized heat step operator on a fixed mesh.

    ``dt=None`` selects the stationary operator (no mass term), used for
    steady-state residuals.  Sides in ``dirichlet`` hold T = 0; the others
    are insulated.
    """

    def __init__(self, mesh, p, alpha_0, Q_0, alpha_z, dt, delta_p=1, rule=None,
                 dirichlet=SIDES):
        if p < 1:
            raise InvalidParameterError("heat order must be >= 1")
        if alpha_0 <= 0 or Q_0 <= 0:
            raise InvalidParameterError("alpha_0 and Q_0 must be positive")
        if dt is not None and dt <= 0:
            raise InvalidParameterError("time step must be positive")
        self.mesh = mesh
        self.p = p
        self.pt = p + delta_p
        self.alpha_0 = float(alpha_0)
        self.Q_0 = float(Q_0)
        self.lam = AnisotropyTensor(alpha_z)
        self.dt = dt
        self.dirichlet = tuple(dirichlet)
        self.rule = rule if rule is not None else fespace.quadrature_rule(2 * self.pt + 2)
        xi, eta, w = self.rule.tensor()
        self.w = w
        self.nq = w.size
        self.layout = TraceLayout(mesh.n_x, mesh.n_z, nv=1, ne=2 * p - 1)
        self.gmap = self.layout.element_map([(0, p - 1), (p - 1, p)])
        self.n_trace = self.gmap.shape[1]
        self.h1 = fespace.tabulate("h1", p, self.rule)
        self.n_int = (p - 1) ** 2
        self.n_h1_trace = 4 + 4 * (p - 1)

        ii, jj = np.meshgrid(np.arange(mesh.n_x), np.arange(mesh.n_z), indexing="xy")
        self.col, self.lay = ii.ravel(), jj.ravel()
        self.hx = mesh.hx[self.col]
        self.hz = mesh.hz[self.lay]
        self.jac = self.hx * self.hz / 4
        self.xq = mesh.x[self.col][:, None] + 0.5 * self.hx[:, None] * (xi + 1)
        self.zq = mesh.z[self.lay][:, None] + 0.5 * self.hz[:, None] * (eta + 1)
        self._build()

    # -- element systems ---------------------------------------------------

    def _build(self):
        keys = {}
        index = np.empty(self.mesh.n_elements, dtype=np.int64)
        reps = []
        for e in range(self.mesh.n_elements):
            k = (self.hx[e], self.hz[e])
            if k not in keys:
                keys[k] = len(reps)
                reps.append(e)
            index[e] = keys[k]
        self.index = index
        self.local = [self._element(e) for e in reps]
        lay = self.layout
        S = np.stack([s["S"] for s in self.local])[index]
        self.matrix = solver.LayeredMatrix(lay.n_blocks, lay.block_size, float)
        self.matrix.scatter(np.zeros(lay.size), S, np.zeros(S.shape[:2]), self.gmap)
        self.fixed = self._dirichlet_dofs()
        self.matrix.apply_dirichlet(np.zeros(lay.size), self.fixed, 0.0)
        self.fact = solver.factorize(self.matrix)
        self.R_t = np.stack([s["R_t"] for s in self.local])
        self.X_t = np.stack([s["X_t"] for s in self.local])
        self.X_R = np.stack([s["X_R"] for s in self.local])

    def _element(self, e):
        p, pt = self.p, self.pt
        ax, az = 2.0 / self.hx[e], 2.0 / self.hz[e]
        jac = self.jac[e]
        a2 = self.lam.alpha_z**2
        tau = self.dt if self.dt is not None else 1.0
        cm = 1.0 if self.dt is not None else 0.0
        k = tau * self.alpha_0
        test = fespace.tabulate("l2", pt, self.rule)
        V, Vx, Vz = test.values, ax * test.d_xi, az * test.d_eta
        N, Nx, Nz = self.h1.values, ax * self.h1.d_xi, az * self.h1.d_eta
        w = self.w * jac
        gram = (V * w) @ V.T + k * ((Vx * w) @ Vx.T + a2 * (Vz * w) @ Vz.T)
        BT = cm * (V * w) @ N.T + k * ((Vx * w) @ Nx.T + a2 * (Vz * w) @ Nz.T)
        Bs = self._flux_columns(e, k)
        B = np.concatenate([BT, Bs], axis=1)
        load = V * w  # l_i = sum_q load[i, q] f(q)
        try:
            L = np.linalg.cholesky(gram)
        except np.linalg.LinAlgError:
            raise NumericalBreakdownError("heat Gram matrix not positive definite", element=e) from None
        W = np.linalg.solve(L, B)
        C = np.linalg.solve(L, load)
        A = W.T @ W
        R = W.T @ C
        # unknown order: H1 (vertices, edge bubbles, interior), then fluxes
        nh = self.n_h1_trace
        nI = self.n_int
        t_idx = np.r_[np.arange(nh), nh + nI + np.arange(4 * p)]
        i_idx = nh + np.arange(nI)
        Att = A[np.ix_(t_idx, t_idx)]
        if nI:
            AII = A[np.ix_(i_idx, i_idx)]
            AIt = A[np.ix_(i_idx, t_idx)]
            X = np.linalg.solve(AII, np.concatenate([AIt, R[i_idx]], axis=1))
            X_t, X_R = X[:, :len(t_idx)], X[:, len(t_idx):]
            S = Att - AIt.T @ X_t
            R_t = R[t_idx] - AIt.T @ X_R
        else:
            X_t = np.zeros((0, len(t_idx)))
            X_R = np.zeros((0, self.nq))
            S, R_t = Att, R[t_idx]
        return {"S": 0.5 * (S + S.T), "R_t": R_t, "X_t": X_t, "X_R": X_R, "W": W, "C": C,
                "t_idx": t_idx, "i_idx": i_idx}

    def _flux_columns(self, e, k):
        p, pt = self.p, self.pt
        t = self.rule.points
        wq = self.rule.weights
        leg_t, _ = fespace.legendre_table(pt, t)
        ends, _ = fespace.legendre_table(pt, np.array([-1.0, 1.0]))
        idx = fespace.tensor_index(pt)
        a, b = idx[:, 0], idx[:, 1]
        trace = {
            "bottom": leg_t[a] * ends[b, 0][:, None],
            "top": leg_t[a] * ends[b, 1][:, None],
            "left": ends[a, 0][:, None] * leg_t[b],
            "right": ends[a, 1][:, None] * leg_t[b],
        }
        sig, _ = fespace.legendre_table(p - 1, t)
        cols = []
        for side in SIDES:
            half = 0.5 * (self.hx[e] if side in ("bottom", "top") else self.hz[e])
            cols.append(-k * _OUT_SIGN[side] * half * (trace[side] * wq) @ sig.T)
        return np.concatenate(cols, axis=1)

    def _dirichlet_dofs(self):
        lay = self.layout
        dofs = [lay.padding()]
        for side in SIDES:
            if side in self.dirichlet:
                v, ed = lay.boundary_line(side, offset=0, count=self.p - 1)
                dofs += [v.ravel(), ed.ravel()]
            else:  # insulated: zero normal flux
                _, ed = lay.boundary_line(side, offset=self.p - 1, count=self.p,
                                          with_vertices=False)
                dofs.append(ed.ravel())
        return np.unique(np.concatenate(dofs))

    # -- states ------------------------------------------------------------

    def zero_state(self) -> HeatState:
        return HeatState(np.zeros(self.layout.size), np.zeros((self.mesh.n_elements, self.n_int)))

    def _local_h1(self, state):
        loc = state.coeffs[self.gmap[:, : self.n_h1_trace]]
        return np.concatenate([loc, state.interior], axis=1)

    def values(self, state):
        """Temperature at the quadrature points, shape (n_el, nq)."""
        return self._local_h1(state) @ self.h1.values

    def interpolate(self, f) -> HeatState:
        """Projection-based interpolant of f(x, z) (vertices, edges, then bubbles)."""
        m, p, lay = self.mesh, self.p, self.layout
        u = np.zeros(lay.size)
        for j in range(m.n_z + 1):
            v, b = fespace.interpolate_line(lambda s: f(s, np.full_like(s, m.z[j])), m.x, p)
            u[lay.vertex(np.arange(m.n_x + 1), j)[:, 0]] = v
            u[lay.hedge(np.arange(m.n_x), j)[:, : p - 1]] = b
        for i in range(m.n_x + 1):
            _, b = fespace.interpolate_line(lambda s: f(np.full_like(s, m.x[i]), s), m.z, p)
            u[lay.vedge(i, np.arange(m.n_z))[:, : p - 1]] = b
        st = HeatState(u, np.zeros((m.n_elements, self.n_int)))
        if self.n_int:
            rem = f(self.xq, self.zq) - self.values(st)
            Nb = self.h1.values[self.n_h1_trace:]
            M = (Nb * self.w) @ Nb.T
            st = replace(st, interior=np.linalg.solve(M, ((rem * self.w) @ Nb.T).T).T)
        return st

    # -- stepping ----------------------------------------------------------

    def _solve(self, f, step, time):
        rhs = self._rhs(f)
        try:
            u = solver.solve(self.fact, rhs)
        except SingularSystemError as exc:
            raise SingularSystemError(f"heat solve failed at step {step}: {exc}") from exc
        ut = u[self.gmap]
        interior = (np.einsum("eiq,eq->ei", self.X_R[self.index], f)
                    - np.einsum("eij,ej->ei", self.X_t[self.index], ut))
        return HeatState(u, interior, step, time)

    def step(self, state: HeatState, Q_hat) -> HeatState:
        """One implicit Euler step with heat source samples ``Q_hat`` (n_el, nq)."""
        if self.dt is None:
            raise InvalidParameterError("stationary solver cannot time step")
        Q_hat = np.broadcast_to(np.asarray(Q_hat, dtype=float), (self.mesh.n_elements, self.nq))
        f = self.values(state) + self.dt * self.Q_0 * Q_hat
        return self._solve(f, state.step + 1, state.time + self.dt)

    def stationary(self, Q_hat) -> HeatState:
        if self.dt is not None:
            raise InvalidParameterError("use a solver built with dt=None")
        Q_hat = np.broadcast_to(np.asarray(Q_hat, dtype=float), (self.mesh.n_elements, self.nq))
        return self._solve(self.Q_0 * Q_hat, 0, np.inf)

    def _rhs(self, f):
        ft = np.einsum("eiq,eq->ei", self.R_t[self.index], f)
        rhs = np.bincount(self.gmap.ravel(), weights=ft.ravel(), minlength=self.layout.size)
        rhs[self.fixed] = 0.0
        return rhs

    def steady_residual(self, state, Q_hat) -> float:
        """Relative residual of the stationary equations at ``state``.

        With T_old = T_new the step equations reduce to the stationary
        problem tested in the same norm; the residual is scaled by the
        source part of the load.
        """
        Q_hat = np.broadcast_to(np.asarray(Q_hat, dtype=float), (self.mesh.n_elements, self.nq))
        src = self.Q_0 * Q_hat * (self.dt if self.dt is not None else 1.0)
        old = self.values(state) if self.dt is not None else 0.0
        r = self.matrix.matvec(state.coeffs) - self._rhs(old + src)
        den = np.linalg.norm(self._rhs(src))
        return float(np.linalg.norm(r) / den) if den > 0 else float(np.linalg.norm(r))

    def residual(self, state, Q_hat, old=None):
        """DPG residual in the test norm, relative to the load norm."""
        Q_hat = np.broadcast_to(np.asarray(Q_hat, dtype=float), (self.mesh.n_elements, self.nq))
        f = self.Q_0 * Q_hat
        if self.dt is not None:
            f = (self.values(old) if old is not None else 0.0) + self.dt * f
        u = self._local_h1(state)
        flux = state.coeffs[self.gmap[:, self.n_h1_trace:]]
        num = den = 0.0
        for e in range(self.mesh.n_elements):
            s = self.local[self.index[e]]
            ue = np.concatenate([u[e], flux[e]])
            c = s["C"] @ f[e]
            r = c - s["W"] @ ue
            num += r @ r
            den += c @ c
        return float(np.sqrt(num / den)) if den > 0 else float(np.sqrt(num))

    # -- diagnostics -------------------------------------------------------

    def boundary_heat_flux(self, state, sides=None) -> float:
        """Outward heat flux -alpha_0 int sig n_out ds over boundary sides."""
        lay, p, m = self.layout, self.p, self.mesh
        total = 0.0
        for side in (self.dirichlet if sides is None else sides):
            _, ed = lay.boundary_line(side, offset=p - 1, count=p, with_vertices=False)
            h = m.hx if side in ("bottom", "top") else m.hz
            # only the P_0 coefficient integrates to a nonzero value
            total += _OUT_SIGN[side] * np.sum(h * state.coeffs[ed[:, 0]])
        return float(-self.alpha_0 * total)

    def source_integral(self, Q_hat) -> float:
        Q_hat = np.broadcast_to(np.asarray(Q_hat, dtype=float), (self.mesh.n_elements, self.nq))
        return float(self.Q_0 * np.sum(self.jac[:, None] * self.w * Q_hat))

    def l2_norm(self, state) -> float:
        v = self.values(state)
        return float(np.sqrt(np.sum(self.jac[:, None] * self.w * v**2)))


def heat_step(state, Q_hat, heat_solver: HeatSolver) -> HeatState:
    return heat_solver.step(state, Q_hat)


def boundary_heat_flux(state, heat_solver: HeatSolver) -> float:
    return heat_solver.boundary_heat_flux(state)
