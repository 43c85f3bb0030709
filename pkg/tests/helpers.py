"""Shared fixtures: manufactured Maxwell solutions and small configurations."""
import numpy as np
import sympy as sp

from fiberdpg import fespace, maxwell
from fiberdpg.mesh import Mesh

X, Z = sp.symbols("x z", real=True)


def box_mesh(nx, nz, width=2.0, length=2.0):
    """Uniform mesh of [-width/2, width/2] x [0, length] without an absorber."""
    x = np.linspace(-width / 2, width / 2, nx + 1)
    z = np.linspace(0.0, length, nz + 1)
    return Mesh(x, z, width / 4, z[-1])


class Manufactured:
    """Exact (E, H_x, H_z) and the matching load of the unstretched TE system."""

    def __init__(self, E, Hx, Hz, omega, n=1.0, ng=0.0):
        self.omega, self.n, self.ng = omega, n, ng
        I = sp.I
        f1 = -sp.diff(E, Z) + I * omega * Hx
        f2 = sp.diff(E, X) + I * omega * Hz
        f3 = sp.diff(Hx, Z) - sp.diff(Hz, X) - I * omega * n**2 * E + n * ng * E
        self._f = [sp.lambdify((X, Z), f, "numpy") for f in (f1, f2, f3)]
        self._u = [sp.lambdify((X, Z), u, "numpy") for u in (E, Hx, Hz)]

    def load(self, x, z):
        return tuple(np.broadcast_to(np.asarray(f(x, z), dtype=complex), np.shape(x))
                     for f in self._f)

    def exact(self, k, x, z):
        return np.broadcast_to(np.asarray(self._u[k](x, z), dtype=complex), np.shape(x))

    def boundary(self, mesh, degree):
        """Interpolated E^ data on all four sides."""
        x, z = mesh.x, mesh.z
        E = lambda a, b: self.exact(0, a, b)  # noqa: E731
        sides = {
            "bottom": (lambda s: E(s, np.zeros_like(s) + z[0]), x),
            "top": (lambda s: E(s, np.zeros_like(s) + z[-1]), x),
            "left": (lambda s: E(np.zeros_like(s) + x[0], s), z),
            "right": (lambda s: E(np.zeros_like(s) + x[-1], s), z),
        }
        vals = {k: fespace.interpolate_line(f, br, degree) for k, (f, br) in sides.items()}
        return maxwell.BoundaryData(values=vals, pec=())

    def solve(self, mesh, p, gain_scale=0.0, l0g0=1e-6, gain=0.0):
        disc = maxwell.MaxwellDiscretization(mesh, p)
        prob = maxwell.MaxwellProblem(disc, self.omega, n=self.n, gain=gain,
                                      gain_scale=gain_scale, l0g0=l0g0, load=self.load)
        sol = maxwell.solve_linear_maxwell(prob, self.boundary(mesh, p + 1))
        return prob, sol

    def errors(self, sol):
        """Absolute and relative L2 errors of (E, H_x, H_z) together."""
        d = sol.disc
        vals = sol.at_quadrature()
        wq = d.jac[:, None] * d.w
        err = ref = 0.0
        for k in range(3):
            u = self.exact(k, d.xq, d.zq)
            err += np.sum(wq * np.abs(vals[k] - u) ** 2)
            ref += np.sum(wq * np.abs(u) ** 2)
        return np.sqrt(err), np.sqrt(err / ref)


def polynomial_case(p, omega=2.5, n=1.3, ng=0.4, seed=0):
    """Random complex polynomials of degree p in each variable."""
    rng = np.random.default_rng(seed)

    def poly():
        c = rng.standard_normal((p + 1, p + 1)) + 1j * rng.standard_normal((p + 1, p + 1))
        return sum(complex(c[a, b]) * X**a * Z**b for a in range(p + 1) for b in range(p + 1))

    return Manufactured(poly(), poly(), poly(), omega, n, ng)


def smooth_wave(omega=3.0, n=1.2):
    E = sp.exp(sp.I * (2 * X + 3 * Z)) * sp.cos(X)
    Hx = sp.sin(X + Z) + sp.I * sp.cos(2 * Z)
    Hz = sp.exp(X * Z / 2)
    return Manufactured(E, Hx, Hz, omega, n)
