"""Compare the numba and numpy paths of the hot kernels.

Run: python benchmarks/bench_kernels.py [--repeat 5]

The scatter benchmark uses the element-to-trace map of a real Maxwell
discretization (default 16 x 50 elements, p = 5) with random complex element
matrices; the gain benchmark evaluates the saturated Yb gain at 10^6 points.
Both paths are checked for agreement before timing.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from fiberdpg import _kernels, io, maxwell, mesh, params
from fiberdpg.solver import LayeredMatrix


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def scatter_case(p, nt, nlam):
    cfg = io.SimulationConfig(order_p=p, n_transverse_elems=nt, num_wavelengths=nlam)
    nd = params.nondimensionalize(cfg.physical(), cfg.scales(), cfg)
    disc = maxwell.MaxwellDiscretization(mesh.build_layered_mesh(cfg, nd), p)
    lay = disc.layout
    rng = np.random.default_rng(0)
    ne, nl = disc.gmap.shape
    mats = rng.standard_normal((ne, nl, nl)) + 1j * rng.standard_normal((ne, nl, nl))
    vecs = rng.standard_normal((ne, nl)) + 1j * rng.standard_normal((ne, nl))
    gmap = np.ascontiguousarray(disc.gmap)

    def run(kernel):
        mat = LayeredMatrix(lay.n_blocks, lay.block_size, complex)
        rhs = np.zeros(lay.size, dtype=complex)
        kernel(mat.blocks, rhs, mats, vecs, gmap, lay.block_size)
        return mat.blocks, rhs

    return run, ne


def gain_case(n):
    phys = io.SimulationConfig().physical()
    rng = np.random.default_rng(1)
    i_s = rng.uniform(0, 2e10, n)
    i_p = rng.uniform(0, 2e10, n)
    args = (1 / phys.photon_energy("s"), 1 / phys.photon_energy("p"), phys.sigma_abs_s,
            phys.sigma_ems_s, phys.sigma_abs_p, phys.sigma_ems_p, phys.N_total, phys.tau)
    return (lambda kernel: kernel(i_s, i_p, *args))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--order", type=int, default=5)
    ap.add_argument("--n-transverse", type=int, default=16)
    ap.add_argument("--wavelengths", type=int, default=25)
    ap.add_argument("--points", type=int, default=1_000_000)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba is not importable; only the numpy path can be timed")

    print(f"{'kernel':<10} {'size':>10} {'numpy [s]':>12} {'numba [s]':>12} {'speedup':>8}")
    run, ne = scatter_case(args.order, args.n_transverse, args.wavelengths)
    ref = run(_kernels.scatter_blocks_numpy)
    results = [("scatter", ne, lambda: run(_kernels.scatter_blocks_numpy),
                lambda: run(_kernels.scatter_blocks_numba), ref, run)]
    grun = gain_case(args.points)
    gref = grun(_kernels.gain_kernel_numpy)
    results.append(("gain", args.points, lambda: grun(_kernels.gain_kernel_numpy),
                    lambda: grun(_kernels.gain_kernel_numba), gref, grun))

    for name, size, f_np, f_nb, reference, runner in results:
        t_np = best_of(f_np, args.repeat)
        if _kernels.HAVE_NUMBA:
            impl = _kernels.scatter_blocks_numba if name == "scatter" else _kernels.gain_kernel_numba
            got = runner(impl)  # first call compiles
            for a, b in zip(reference, got):
                scale = np.max(np.abs(a)) or 1.0
                assert np.max(np.abs(a - b)) <= 1e-12 * scale, f"{name}: paths disagree"
            t_nb = best_of(f_nb, args.repeat)
            print(f"{name:<10} {size:>10d} {t_np:>12.4f} {t_nb:>12.4f} {t_np / t_nb:>8.2f}")
        else:
            print(f"{name:<10} {size:>10d} {t_np:>12.4f} {'-':>12} {'-':>8}")


if __name__ == "__main__":
    main()
