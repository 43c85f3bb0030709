"""Hot inner loops with a numba path and a pure-numpy fallback.

The numba kernels are used when numba imports and the environment variable
``FIBERDPG_DISABLE_NUMBA`` is unset (or ``0``).  Both paths are always
importable as ``*_numpy`` / ``*_numba`` so tests and benchmarks can compare
them directly.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("FIBERDPG_DISABLE_NUMBA", "0").lower() not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLE


# -- block scatter --------------------------------------------------------


def scatter_blocks_numpy(blocks, rhs, mats, vecs, gmap, m):
    """Accumulate element matrices into block-tridiagonal storage.

    ``blocks`` has shape (3, nb, m, m): diagonal, upper (j, j+1) and lower
    (j+1, j) blocks.  ``rhs`` is the flat global vector.
    """
    nb = blocks.shape[1]
    blk = gmap // m
    loc = gmap % m
    ba = blk[:, :, None]
    bb = blk[:, None, :]
    kind = np.where(ba == bb, 0, np.where(bb == ba + 1, 1, 2))
    row_blk = np.where(kind == 2, bb, ba)
    flat = ((kind * nb + row_blk) * m + loc[:, :, None]) * m + loc[:, None, :]
    size = blocks.size
    target = blocks.reshape(-1)
    flat = flat.ravel()
    vals = mats.ravel()
    if np.iscomplexobj(blocks):
        target += np.bincount(flat, weights=vals.real, minlength=size)
        target += 1j * np.bincount(flat, weights=vals.imag, minlength=size)
        rhs += np.bincount(gmap.ravel(), weights=vecs.real.ravel(), minlength=rhs.size)
        rhs += 1j * np.bincount(gmap.ravel(), weights=vecs.imag.ravel(), minlength=rhs.size)
    else:
        target += np.bincount(flat, weights=vals, minlength=size)
        rhs += np.bincount(gmap.ravel(), weights=vecs.ravel(), minlength=rhs.size)


def _scatter_blocks_py(blocks, rhs, mats, vecs, gmap, m):
    ne, nl = gmap.shape
    for e in range(ne):
        for a in range(nl):
            ga = gmap[e, a]
            ba = ga // m
            ia = ga - ba * m
            rhs[ga] += vecs[e, a]
            for b in range(nl):
                gb = gmap[e, b]
                bb = gb // m
                ib = gb - bb * m
                if ba == bb:
                    blocks[0, ba, ia, ib] += mats[e, a, b]
                elif bb == ba + 1:
                    blocks[1, ba, ia, ib] += mats[e, a, b]
                else:
                    blocks[2, bb, ia, ib] += mats[e, a, b]


# -- steady-state gain at sample points -------------------------------------


def gain_kernel_numpy(i_s, i_p, flux_s, flux_p, sa_s, se_s, sa_p, se_p, n_total, tau):
    """Excited population and both gains for irradiance arrays.

    ``flux_k`` converts irradiance to photon flux (1 / hbar omega_k).
    """
    phi_s = i_s * flux_s
    phi_p = i_p * flux_p
    num = phi_s * sa_s + phi_p * sa_p
    den = 1.0 / tau + phi_s * (sa_s + se_s) + phi_p * (sa_p + se_p)
    n_exc = n_total * num / den
    g_s = -sa_s * n_total + (sa_s + se_s) * n_exc
    g_p = -sa_p * n_total + (sa_p + se_p) * n_exc
    return n_exc, g_s, g_p


def _gain_kernel_py(i_s, i_p, flux_s, flux_p, sa_s, se_s, sa_p, se_p, n_total, tau):
    n = i_s.size
    n_exc = np.empty(n)
    g_s = np.empty(n)
    g_p = np.empty(n)
    rate0 = 1.0 / tau
    for k in range(n):
        phi_s = i_s[k] * flux_s
        phi_p = i_p[k] * flux_p
        num = phi_s * sa_s + phi_p * sa_p
        den = rate0 + phi_s * (sa_s + se_s) + phi_p * (sa_p + se_p)
        ne_k = n_total * num / den
        n_exc[k] = ne_k
        g_s[k] = -sa_s * n_total + (sa_s + se_s) * ne_k
        g_p[k] = -sa_p * n_total + (sa_p + se_p) * ne_k
    return n_exc, g_s, g_p


if HAVE_NUMBA:
    scatter_blocks_numba = numba.njit(cache=True)(_scatter_blocks_py)
    _gain_numba_flat = numba.njit(cache=True)(_gain_kernel_py)

    def gain_kernel_numba(i_s, i_p, *args):
        shape = np.shape(i_s)
        out = _gain_numba_flat(
            np.ascontiguousarray(i_s, dtype=np.float64).ravel(),
            np.ascontiguousarray(i_p, dtype=np.float64).ravel(),
            *[float(a) for a in args],
        )
        return tuple(o.reshape(shape) for o in out)

else:  # pragma: no cover
    scatter_blocks_numba = None
    gain_kernel_numba = None


def scatter_blocks(blocks, rhs, mats, vecs, gmap, m):
    if USE_NUMBA:
        scatter_blocks_numba(blocks, rhs, mats, vecs, np.ascontiguousarray(gmap), m)
    else:
        scatter_blocks_numpy(blocks, rhs, mats, vecs, gmap, m)


def gain_kernel(i_s, i_p, *args):
    i_s = np.asarray(i_s, dtype=float)
    i_p = np.asarray(i_p, dtype=float)
    i_s, i_p = np.broadcast_arrays(i_s, i_p)
    if USE_NUMBA and i_s.size > 64:
        return gain_kernel_numba(i_s, i_p, *args)
    return gain_kernel_numpy(i_s, i_p, *args)
