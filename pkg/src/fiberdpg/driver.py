"""Picard solve of the two gain-coupled Maxwell systems and the thermal loop.

Each Picard iteration freezes the gain at the irradiances of the previous
iterate of BOTH fields, solves the two linear systems, and stops once the
relative L2 change of the signal field drops below the tolerance.  The
coupled run alternates a converged Picard solve, one implicit Euler heat
step driven by the quantum-defect heat of the converged fields, and a
thermo-optic update of the refractive index.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import gain, heat, maxwell, mesh, modes, params
from .errors import (InvalidParameterError, NonConvergenceError, UndefinedEfficiencyError,
                     FiberDPGError)

log = logging.getLogger(__name__)

FIELDS = ("s", "p")


@dataclass(frozen=True)
class MaterialState:
    """Refractive index and temperature change at Maxwell quadrature points."""

    n_bar: np.ndarray
    dT: np.ndarray
    dn_dT: float
    ambient: bool = True

    @property
    def n(self):
        return self.n_bar + self.dn_dT * self.dT

    @property
    def delta_n(self):
        return self.dn_dT * self.dT


def update_material(material: MaterialState, dT_new, phys=None) -> MaterialState:
    """n <- n_bar + dn/dT * dT_new; dT_new lives on the Maxwell quadrature points."""
    dT_new = np.asarray(dT_new, dtype=float)
    if dT_new.shape != material.n_bar.shape:
        full = np.zeros(material.n_bar.shape)
        full[: dT_new.shape[0]] = dT_new
        dT_new = full
    if not np.all(np.isfinite(dT_new)):
        raise InvalidParameterError("temperature change must be finite")
    dn = material.dn_dT if phys is None else phys.dn_dT
    return MaterialState(material.n_bar, dT_new, dn, ambient=not np.any(dT_new))


@dataclass
class PicardRecord:
    iterations: int
    rel_change: list
    eta_s: list
    eta_p: list
    eta_iters: list = field(default_factory=list)
    converged: bool = True
    seconds: float = 0.0


@dataclass
class StepRecord:
    step: int
    time_ms: float
    picard_iterations: int
    peak_dT: float
    P_s: np.ndarray
    P_p: np.ndarray
    heat_flux: float
    source_power: float


@dataclass
class RunHistory:
    picard: list = field(default_factory=list)
    steps: list = field(default_factory=list)

    def last_picard(self) -> PicardRecord:
        return self.picard[-1]


class FiberModel:
    """Mesh, discretization, inlet data and constants of one configuration."""

    def __init__(self, config):
        self.config = config
        self.phys = config.physical()
        self.scales = config.scales()
        self.nd = params.nondimensionalize(self.phys, self.scales, config)
        self.mesh = mesh.build_layered_mesh(config, self.nd)
        self.disc = maxwell.MaxwellDiscretization(self.mesh, config.order_p, config.delta_p)
        d = self.disc
        self.core_q = d.core_q & d.interior[:, None]
        n_bar = np.where(d.core_q, self.nd.n_core, self.nd.n_clad)
        self.ambient = MaterialState(n_bar, np.zeros_like(n_bar), self.phys.dn_dT)
        geom = modes.SlabGeometry.from_nondim(self.nd)
        self.modes = {}
        self.inlet = {}
        for k in FIELDS:
            mode = modes.solve_fundamental_mode(self.nd.omega_hat(k), geom, power=self.nd.power(k))
            self.modes[k] = mode
            v, b = modes.mode_trace(mode, self.mesh, d.p + 1)
            self.inlet[k] = maxwell.inlet_boundary(v, b)
        self._heat = None

    @property
    def gamma(self):
        return self.nd.l0g0 * self.nd.gain_scale

    @property
    def power_scale(self):
        """Watts per unit of non-dimensional power flux."""
        return self.scales.P_0 * self.nd.slab_depth_hat

    @property
    def active(self):
        return self.config.active_gain and self.nd.gain_scale > 0

    def problem(self, k, material, gain_hat):
        return maxwell.MaxwellProblem(
            self.disc, self.nd.omega_hat(k), n=material.n, gain=gain_hat,
            gain_scale=self.nd.gain_scale if self.config.active_gain else 0.0,
            l0g0=self.nd.l0g0, sigma_max=self.config.pml_sigma_max, field_id=k)

    def irradiance(self, sol, material):
        """Non-dimensional irradiance at quadrature points (zero outside the core)."""
        E, Hx, Hz = sol.at_quadrature()
        if self.config.irradiance_model == "poynting":
            I = gain.poynting_irradiance_hat(E, Hx, Hz)
        else:
            I = gain.irradiance_hat(E, material.n)
        return np.where(self.core_q, I, 0.0)

    def gains(self, sols, material):
        """(g_s, g_p, Q) non-dimensional, from the given fields (None = zero)."""
        shape = material.n.shape
        I = {k: (self.irradiance(sols[k], material) if sols.get(k) is not None else np.zeros(shape))
             for k in FIELDS}
        gs, gp, q = gain.gain_hat(I["s"], I["p"], self.phys, self.scales)
        mask = self.core_q if self.config.active_gain else np.zeros(shape, dtype=bool)
        return np.where(mask, gs, 0.0), np.where(mask, gp, 0.0), np.where(mask, q, 0.0), I

    def heat_solver(self):
        if self._heat is None:
            sub = self.mesh.interior_submesh()
            self._heat = heat.HeatSolver(sub, self.config.order_p, self.nd.alpha_0, self.nd.Q_0,
                                         self.nd.alpha_z, self.nd.dt_hat,
                                         delta_p=self.config.delta_p, rule=self.disc.rule)
        return self._heat

    def n_heat_elements(self):
        return self.mesh.n_x * self.mesh.n_interior_layers


def picard_solve(model: FiberModel, material: MaterialState, eps=None, i_max=None, initial=None,
                 residual_each=None):
    """Algorithm: freeze gains at the previous iterate, solve both fields, repeat.

    Returns ({"s": sol_s, "p": sol_p}, PicardRecord).  ``initial`` warm-starts
    the gain evaluation; by default both fields start at zero.
    """
    cfg = model.config
    eps = cfg.picard_tol if eps is None else eps
    i_max = cfg.picard_max_iters if i_max is None else i_max
    every = cfg.residual_each_iteration if residual_each is None else residual_each
    if eps <= 0 or i_max < 1:
        raise InvalidParameterError("need eps > 0 and i_max >= 1")
    t0 = time.perf_counter()
    prev = dict(initial) if initial else {"s": None, "p": None}
    rec = PicardRecord(0, [], [], [])
    for it in range(1, i_max + 1):
        gs, gp, _, _ = model.gains(prev, material)
        probs = {"s": model.problem("s", material, gs), "p": model.problem("p", material, gp)}
        sols = {k: maxwell.solve_linear_maxwell(probs[k], model.inlet[k], cfg.solver_method)
                for k in FIELDS}
        if prev["s"] is None:
            change = 1.0
        else:
            change = sols["s"].relative_change(prev["s"])
        rec.rel_change.append(change)
        rec.iterations = it
        done = change < eps
        if every or done or it == 1 or it == i_max:
            rec.eta_iters.append(it)
            rec.eta_s.append(maxwell.residual(probs["s"], sols["s"])[1])
            rec.eta_p.append(maxwell.residual(probs["p"], sols["p"])[1])
        log.debug("picard %d: change %.3e", it, change)
        prev = sols
        if done:
            rec.seconds = time.perf_counter() - t0
            return sols, rec
    rec.converged = False
    rec.seconds = time.perf_counter() - t0
    raise NonConvergenceError(f"Picard iteration did not converge in {i_max} iterations", history=rec)


def power_curves(model, sols):
    z, Ps = sols["s"].power_curve()
    _, Pp = sols["p"].power_curve()
    return z, Ps, Pp


def interior_rows(model):
    return model.mesh.n_interior_layers + 1


def efficiency_curve(P_s, P_p, start=1):
    """(P_s(z) - P_s(0)) / (P_p(0) - P_p(z)) for z indices >= start."""
    P_s = np.asarray(P_s, dtype=float)
    P_p = np.asarray(P_p, dtype=float)
    den = P_p[0] - P_p[start:]
    thresh = 1e-9 * abs(P_p[0])
    bad = np.flatnonzero(den <= thresh)
    if bad.size:
        idx = int(bad[0] + start)
        raise UndefinedEfficiencyError("no pump power absorbed", index=idx)
    return (P_s[start:] - P_s[0]) / den


def energy_balance(model, sols, material):
    """Absorbed pump, signal gain and deposited heat (non-dimensional powers)."""
    nrow = interior_rows(model)
    _, Ps, Pp = power_curves(model, sols)
    gs, gp, q, I = model.gains(sols, material)
    d = model.disc
    gam = model.gamma if model.config.active_gain else 0.0
    wq = d.jac[:, None] * d.w
    heat = gam * float(np.sum(wq * q))
    absorbed = Pp[0] - Pp[nrow - 1]
    gained = Ps[nrow - 1] - Ps[0]
    return {"absorbed_pump": absorbed, "signal_gain": gained, "heat": heat,
            "imbalance": absorbed - gained - heat}


def heat_source_hat(model, sols, material):
    """Q-hat on the heat elements from the converged fields (physical gain)."""
    _, _, q, _ = model.gains(sols, material)
    return q[: model.n_heat_elements()]


def peak_location(model, values):
    """(x, z, value) of the largest sample."""
    d = model.disc
    k = int(np.argmax(values))
    e, qi = np.unravel_index(k, values.shape)
    return d.xq[e, qi], d.zq[e, qi], float(values[e, qi])


def coupled_run(config, n_steps=None, callback=None, model=None):
    """Maxwell/heat time loop.

    Returns (model, history, final fields, heat state, material).  A prebuilt
    ``model`` (for instance one with altered non-dimensional constants)
    replaces the one built from ``config``.
    """
    model = FiberModel(config) if model is None else model
    hs = model.heat_solver()
    steps = int(round(config.t_max_ms / config.dt_ms)) if n_steps is None else int(n_steps)
    material = model.ambient
    state = hs.zero_state()
    history = RunHistory()
    sols = None
    for n in range(steps):
        try:
            sols, rec = picard_solve(model, material, initial=sols)
        except FiberDPGError as exc:
            exc.args = (f"time step {n}: {exc.args[0]}",) + exc.args[1:]
            raise
        history.picard.append(rec)
        Q = heat_source_hat(model, sols, material)
        state = hs.step(state, Q)
        dT = hs.values(state)
        material = update_material(material, dT, model.phys)
        _, Ps, Pp = power_curves(model, sols)
        history.steps.append(StepRecord(
            step=n + 1, time_ms=(n + 1) * config.dt_ms, picard_iterations=rec.iterations,
            peak_dT=float(dT.max()) * model.scales.T_0, P_s=Ps, P_p=Pp,
            heat_flux=hs.boundary_heat_flux(state), source_power=hs.source_integral(Q)))
        if callback is not None:
            callback(model, n, sols, state, material)
        log.info("step %d/%d: %d Picard iterations, peak dT %.4g K", n + 1, steps,
                 rec.iterations, history.steps[-1].peak_dT)
    return model, history, sols, state, material
