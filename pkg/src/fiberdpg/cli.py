"""Command line entry points: ``fiberdpg {mode,solve,couple,sweep}``.

Every subcommand reads an optional config file and writes plain CSV into the
output directory together with a MANIFEST.  On failure the MANIFEST is still
written, marked incomplete, and the exit code is nonzero.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from contextlib import nullcontext

import numpy as np

from . import driver, io, modes, params
from .errors import FiberDPGError, NonConvergenceError

log = logging.getLogger("fiberdpg")


def _parser():
    ap = argparse.ArgumentParser(prog="fiberdpg", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("mode", "print the fundamental slab modes"),
                        ("solve", "Picard solve at ambient temperature"),
                        ("couple", "Maxwell/heat time loop"),
                        ("sweep", "Picard iteration counts over (N_lambda, g_a)")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", metavar="PATH", help="key = value config file")
        p.add_argument("--out", metavar="DIR", default=".", help="output directory (default .)")
        p.add_argument("--reproducible", action="store_true",
                       help="omit the timestamp line so outputs are byte-identical")
        p.add_argument("--threads", type=int, metavar="N", help="BLAS thread count (capped at the available cores)")
        if name == "couple":
            p.add_argument("--steps", type=int, help="number of time steps (default t_max/dt)")
    return ap


def _available_cores():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - not on Linux
        return os.cpu_count() or 1


def _thread_limit(n):
    if n is None:
        return nullcontext()
    if n < 1:
        raise FiberDPGError("--threads must be >= 1")
    from threadpoolctl import threadpool_limits

    # more BLAS threads than cores makes the spin-waiting OpenBLAS pool crawl;
    # the numba kernels are serial, so only the BLAS pools need capping
    return threadpool_limits(limits=min(n, _available_cores()))


# -- tables ----------------------------------------------------------------


def power_rows(model, sols):
    """(z [m], P_signal [W], P_pump [W]) on the mesh rows ahead of the absorber."""
    z, Ps, Pp = driver.power_curves(model, sols)
    nrow = driver.interior_rows(model)
    ps, l0 = model.power_scale, model.scales.l_0
    return [(z[j] * l0, Ps[j] * ps, Pp[j] * ps) for j in range(nrow)]


def residual_rows(rec):
    eta = {it: (s, p) for it, s, p in zip(rec.eta_iters, rec.eta_s, rec.eta_p)}
    nan = (math.nan, math.nan)
    return [(i + 1, c) + eta.get(i + 1, nan) for i, c in enumerate(rec.rel_change)]


def temperature_rows(model, state):
    hs = model.heat_solver()
    dT = hs.values(state) * model.scales.T_0
    d, l0 = model.disc, model.scales.l_0
    ne = dT.shape[0]
    x, z = d.xq[:ne] * l0, d.zq[:ne] * l0
    order = np.lexsort((x.ravel(), z.ravel()))
    return [(x.ravel()[k], z.ravel()[k], dT.ravel()[k]) for k in order]


def refindex_rows(model, material):
    """n(x) on the quadrature row through the temperature peak."""
    d = model.disc
    ne = model.n_heat_elements()
    dT = material.dT[:ne]
    e, q = np.unravel_index(int(np.argmax(dT)), dT.shape)
    z_peak = d.zq[e, q]
    layer = e // model.mesh.n_x
    elems = np.arange(layer * model.mesh.n_x, (layer + 1) * model.mesh.n_x)
    sel = np.isclose(d.zq[elems], z_peak)
    x = d.xq[elems][sel]
    n = material.n[elems][sel]
    order = np.argsort(x)
    l0 = model.scales.l_0
    return z_peak * l0, [(x[k] * l0, n[k]) for k in order]


def history_rows(history):
    rows = []
    for st in history.steps:
        rows.append((st.step, st.time_ms, st.picard_iterations, st.peak_dT,
                     float(st.P_s[0]), float(st.P_p[0]), st.heat_flux, st.source_power))
    return rows


HISTORY_HEADER = ("step", "time_ms", "picard_iterations", "peak_dT_kelvin", "P_signal_in_hat",
                  "P_pump_in_hat", "boundary_flux_hat", "source_integral_hat")


# -- subcommands -----------------------------------------------------------


def cmd_mode(cfg, out):
    phys, scales = cfg.physical(), cfg.scales()
    nd = params.nondimensionalize(phys, scales, cfg)
    geom = modes.SlabGeometry.from_nondim(nd)
    print(f"V_number = {params.v_number(phys):.6f}")
    print(f"numerical_aperture = {params.numerical_aperture(phys):.6f}")
    rows = []
    sols = {}
    for k, name in (("s", "signal"), ("p", "pump")):
        m = modes.solve_fundamental_mode(nd.omega_hat(k), geom, power=1.0)
        sols[k] = m
        print(f"{name}: n_eff = {m.n_eff:.10f}  beta = {m.beta / scales.l_0:.8e} 1/m  "
              f"slab_V = {m.V:.6f}  decay = {m.gamma_clad / scales.l_0:.6e} 1/m")
        rows.append((name, m.n_eff, m.beta / scales.l_0, m.kappa_core / scales.l_0,
                     m.gamma_clad / scales.l_0, m.V))
    out.write_csv("mode.csv", ("field", "n_eff", "beta_per_m", "kappa_per_m", "gamma_per_m",
                               "slab_V"), rows)
    x = np.linspace(-nd.a_clad, nd.a_clad, 401)
    out.write_csv("mode_profile.csv", ("x", "E_signal", "E_pump"),
                  zip(x * scales.l_0, sols["s"].profile(x), sols["p"].profile(x)))


def cmd_solve(cfg, out):
    model = driver.FiberModel(cfg)
    try:
        sols, rec = driver.picard_solve(model, model.ambient)
    except NonConvergenceError as exc:
        if exc.history is not None:
            out.write_csv("residual.csv", ("iter", "rel_change", "eta_s", "eta_p"),
                          residual_rows(exc.history))
        raise
    out.write_csv("power.csv", ("z", "P_signal", "P_pump"), power_rows(model, sols))
    out.write_csv("residual.csv", ("iter", "rel_change", "eta_s", "eta_p"), residual_rows(rec))
    rows = power_rows(model, sols)
    print(f"converged in {rec.iterations} Picard iterations; "
          f"P_signal(L) = {rows[-1][1]:.6g} W, P_pump(L) = {rows[-1][2]:.6g} W")


def cmd_couple(cfg, out, steps=None):
    seen = {}

    def keep(model, n, sols, state, material):
        seen.update(model=model, sols=sols, state=state, material=material, n=n)

    history = driver.RunHistory()
    try:
        model, history, sols, state, material = driver.coupled_run(cfg, n_steps=steps,
                                                                   callback=keep)
    except FiberDPGError:
        if seen:
            _write_couple(out, seen["model"], seen["sols"], seen["state"], seen["material"],
                          None)
        raise
    _write_couple(out, model, sols, state, material, history)
    st = history.steps[-1]
    print(f"{len(history.steps)} steps, t = {st.time_ms:.4g} ms, peak dT = {st.peak_dT:.6g} K")


def _write_couple(out, model, sols, state, material, history):
    out.write_csv("power.csv", ("z", "P_signal", "P_pump"), power_rows(model, sols))
    out.write_csv("temperature.csv", ("x", "z", "dT_kelvin"), temperature_rows(model, state))
    z_peak, rows = refindex_rows(model, material)
    out.write_csv("refindex.csv", ("x", "n"), rows)
    if history is not None:
        out.write_csv("history.csv", HISTORY_HEADER, history_rows(history))
        out.write_csv("residual.csv", ("iter", "rel_change", "eta_s", "eta_p"),
                      residual_rows(history.last_picard()))


def sweep_table(cfg, callback=None):
    """{(N_lambda, g_a): iterations or None on non-convergence}."""
    table = {}
    for g in cfg.sweep_gain_scales:
        for nl in cfg.sweep_wavelengths:
            model = driver.FiberModel(cfg.with_updates(num_wavelengths=int(nl), gain_scale=g))
            try:
                _, rec = driver.picard_solve(model, model.ambient)
                table[nl, g] = rec.iterations
            except NonConvergenceError:
                table[nl, g] = None
            if callback is not None:
                callback(nl, g, table[nl, g])
    return table


def cmd_sweep(cfg, out):
    def report(nl, g, its):
        log.info("N_lambda = %d, g_a = %g: %s", nl, g, its if its is not None else "no convergence")

    table = sweep_table(cfg, report)
    header = ("gain_scale",) + tuple(f"N_{int(nl)}" for nl in cfg.sweep_wavelengths)
    rows = [(g,) + tuple(table[nl, g] if table[nl, g] is not None else "nc"
                         for nl in cfg.sweep_wavelengths)
            for g in cfg.sweep_gain_scales]
    out.write_csv("iterations.csv", header, rows)
    for r in rows:
        print("  ".join(str(v) for v in r))


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    out = None
    try:
        out = io.OutputDir(args.out, reproducible=args.reproducible)
        cfg = io.load_config(args.config) if args.config else io.SimulationConfig()
        with _thread_limit(args.threads):
            if args.command == "mode":
                cmd_mode(cfg, out)
            elif args.command == "solve":
                cmd_solve(cfg, out)
            elif args.command == "couple":
                cmd_couple(cfg, out, args.steps)
            else:
                cmd_sweep(cfg, out)
    except (FiberDPGError, OSError) as exc:
        print(f"fiberdpg {args.command}: error: {exc}", file=sys.stderr)
        if out is not None:
            try:
                out.write_manifest(complete=False, message=str(exc))
            except OSError:
                pass
        return 1
    out.write_manifest(complete=True)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
