"""Fundamental TE mode of the symmetric step-index slab.

With half-width ``a``, the even TE0 mode solves ``u tan u = w`` where
``u = kappa a``, ``w = gamma a`` and ``u^2 + w^2 = V^2``.  The left side minus
the right side is increasing on ``(0, min(pi/2, V))``, so bisection on that
branch always brackets the root.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import fespace
from .errors import InvalidParameterError


@dataclass(frozen=True)
class SlabGeometry:
    a: float  # core half-width (non-dimensional)
    n_core: float
    n_clad: float

    @classmethod
    def from_nondim(cls, nd):
        return cls(nd.a_core, nd.n_core, nd.n_clad)


@dataclass(frozen=True)
class ModeSolution:
    beta: float
    n_eff: float
    kappa_core: float
    gamma_clad: float
    amplitude: float
    omega_hat: float
    a: float
    V: float

    def profile(self, x):
        """Transverse field E(x) (real, even)."""
        x = np.abs(np.asarray(x, dtype=float))
        ka = self.kappa_core * self.a
        inside = np.cos(self.kappa_core * np.minimum(x, self.a))
        outside = math.cos(ka) * np.exp(-self.gamma_clad * np.maximum(x - self.a, 0.0))
        return self.amplitude * np.where(x <= self.a, inside, outside)

    def power(self):
        """Forward power flux beta/(2 omega) * int |E|^2 dx over the whole line."""
        return self.beta / (2 * self.omega_hat) * self.amplitude**2 * _unit_energy(
            self.kappa_core, self.gamma_clad, self.a
        )

    def dispersion_residual(self):
        return abs(self.kappa_core * math.tan(self.kappa_core * self.a) - self.gamma_clad)


def _unit_energy(kappa, gamma, a):
    ka = kappa * a
    return a + math.sin(2 * ka) / (2 * kappa) + math.cos(ka) ** 2 / gamma


def solve_fundamental_mode(omega_hat, geometry: SlabGeometry, power=1.0, tol=1e-14) -> ModeSolution:
    """Even TE0 mode normalized to carry ``power`` (non-dimensional)."""
    g = geometry
    if not g.n_core > g.n_clad:
        raise InvalidParameterError("guidance requires n_core > n_clad")
    if tol <= 0 or omega_hat <= 0 or g.a <= 0:
        raise InvalidParameterError("tolerance, frequency and half-width must be positive")
    V = omega_hat * g.a * math.sqrt(g.n_core**2 - g.n_clad**2)

    def f(u):
        return u * math.tan(u) - math.sqrt(max(V * V - u * u, 0.0))

    hi = math.nextafter(min(math.pi / 2, V), 0.0)
    if not f(hi) > 0:
        raise InvalidParameterError("no even guided mode below the first tangent branch")
    u = optimize.bisect(f, 0.0, hi, xtol=tol, rtol=4 * np.finfo(float).eps)
    kappa = u / g.a
    beta = math.sqrt(g.n_core**2 * omega_hat**2 - kappa**2)
    gamma = math.sqrt(beta**2 - g.n_clad**2 * omega_hat**2)
    amp = math.sqrt(power * 2 * omega_hat / (beta * _unit_energy(kappa, gamma, g.a))) if power > 0 else 0.0
    return ModeSolution(beta, beta / omega_hat, kappa, gamma, amp, omega_hat, g.a, V)


def mode_trace(mode, mesh, degree, profile=None):
    """L2 projection of the mode profile onto the inlet trace space.

    Returns (vertex values, edge bubbles) along the inlet line z = 0 for a
    continuous trace of polynomial degree ``degree``.
    """
    f = mode.profile if profile is None else profile
    return fespace.project_line_l2(lambda x: np.asarray(f(x), dtype=float), mesh.x, degree,
                                   nquad=2 * degree + 12)


def sample_profile(mode, x_max, n=201):
    x = np.linspace(-x_max, x_max, n)
    return x, mode.profile(x)
