"""Two-manifold ytterbium steady-state gain and quantum-defect heating.

Irradiances are in W/m^2, gains in 1/m and heat in W/m^3 unless a function
name carries ``_hat`` (non-dimensional, scaled by I_0, g_0 and g_0 I_0).
Callers are responsible for zeroing gain and heat outside the doped core.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidParameterError


@dataclass(frozen=True)
class GainSample:
    N_excited: np.ndarray
    g_s: np.ndarray
    g_p: np.ndarray
    Q: np.ndarray


def _check_irradiance(*arrays):
    for a in arrays:
        a = np.asarray(a)
        if not np.all(np.isfinite(a)) or np.any(a < 0):
            raise InvalidParameterError("irradiance must be finite and non-negative")


def _kernel_args(phys):
    return (
        1.0 / phys.photon_energy("s"),
        1.0 / phys.photon_energy("p"),
        phys.sigma_abs_s,
        phys.sigma_ems_s,
        phys.sigma_abs_p,
        phys.sigma_ems_p,
        phys.N_total,
        phys.tau,
    )


def excited_population(I_s, I_p, phys):
    """Steady-state excited-ion concentration [ion/m^3]."""
    _check_irradiance(I_s, I_p)
    n_exc, _, _ = _kernels.gain_kernel(I_s, I_p, *_kernel_args(phys))
    return n_exc if np.ndim(n_exc) else float(n_exc)


def gain_coefficient(k, I_s, I_p, phys):
    """Gain g_k [1/m] of field ``k`` in {"s", "p"} inside the doped core."""
    if k not in ("s", "p"):
        raise InvalidParameterError(f"unknown field id {k!r}")
    _check_irradiance(I_s, I_p)
    _, g_s, g_p = _kernels.gain_kernel(I_s, I_p, *_kernel_args(phys))
    g = g_s if k == "s" else g_p
    return g if np.ndim(g) else float(g)


def evaluate(I_s, I_p, phys) -> GainSample:
    """Population, both gains and heat deposition in one pass."""
    _check_irradiance(I_s, I_p)
    n_exc, g_s, g_p = _kernels.gain_kernel(I_s, I_p, *_kernel_args(phys))
    q = -(g_p * np.asarray(I_p) + g_s * np.asarray(I_s))
    return GainSample(n_exc, g_s, g_p, q)


def saturation_population(phys, k="p"):
    """Bleaching limit of the excited population under field ``k`` alone."""
    sa = phys.sigma_abs_p if k == "p" else phys.sigma_abs_s
    se = phys.sigma_ems_p if k == "p" else phys.sigma_ems_s
    return phys.N_total * sa / (sa + se)


def irradiance(E, n, phys=None, c=None, eps_0=None):
    """Plane-wave irradiance 0.5 n c eps_0 |E|^2 [W/m^2]."""
    if phys is not None:
        c, eps_0 = phys.c, phys.eps_0
    return 0.5 * np.asarray(n) * c * eps_0 * np.abs(E) ** 2


def irradiance_hat(E_hat, n):
    """Non-dimensional plane-wave irradiance 0.5 n |E|^2 (units of I_0)."""
    return 0.5 * np.asarray(n) * np.abs(E_hat) ** 2


def poynting_irradiance_hat(E_hat, Hx_hat, Hz_hat):
    """Magnitude of the time-averaged Poynting vector of a TE field."""
    sx = 0.5 * np.real(E_hat * np.conj(Hz_hat))
    sz = -0.5 * np.real(E_hat * np.conj(Hx_hat))
    return np.hypot(sx, sz)


def heat_source(I_s, I_p, phys):
    """Heat deposition -(g_p I_p + g_s I_s) [W/m^3] from the physical gain."""
    s = evaluate(I_s, I_p, phys)
    return s.Q if np.ndim(s.Q) else float(s.Q)


def gain_hat(I_s_hat, I_p_hat, phys, scales):
    """Non-dimensional (g_s, g_p, Q) from non-dimensional irradiances."""
    I_s = np.asarray(I_s_hat) * scales.I_0
    I_p = np.asarray(I_p_hat) * scales.I_0
    s = evaluate(I_s, I_p, phys)
    return s.g_s / scales.g_0, s.g_p / scales.g_0, s.Q / (scales.g_0 * scales.I_0)
