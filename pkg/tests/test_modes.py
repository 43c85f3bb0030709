import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fiberdpg import mesh, modes, params
from fiberdpg.errors import InvalidParameterError
from fiberdpg.io import SimulationConfig

CFG = SimulationConfig()
ND = params.nondimensionalize(CFG.physical(), CFG.scales(), CFG)
GEOM = modes.SlabGeometry.from_nondim(ND)


@pytest.mark.parametrize("k", ["s", "p"])
def test_default_geometry_mode(k):
    m = modes.solve_fundamental_mode(ND.omega_hat(k), GEOM)
    assert ND.n_clad < m.n_eff < ND.n_core
    assert m.dispersion_residual() < 1e-10
    assert m.power() == pytest.approx(1.0, rel=1e-12)


def independent_root(V, n=200_001):
    """Dense scan of u tan u = sqrt(V^2 - u^2) on the first branch, then refine."""
    u = np.linspace(1e-9, min(np.pi / 2, V) - 1e-12, n)
    f = u * np.tan(u) - np.sqrt(V * V - u * u)
    i = np.flatnonzero(np.diff(np.sign(f)))[0]
    lo, hi = u[i], u[i + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * np.tan(mid) - np.sqrt(V * V - mid * mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_matches_independent_root():
    m = modes.solve_fundamental_mode(ND.omega_hat("s"), GEOM)
    u = m.kappa_core * GEOM.a
    assert u == pytest.approx(independent_root(m.V), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(omega=st.floats(1.0, 200.0), a=st.floats(0.1, 5.0), dn=st.floats(1e-4, 0.05))
def test_guidance_bounds_and_parity(omega, a, dn):
    g = modes.SlabGeometry(a, 1.45 + dn, 1.45)
    m = modes.solve_fundamental_mode(omega, g, power=2.5)
    assert g.n_clad < m.n_eff < g.n_core
    assert m.dispersion_residual() < 1e-10 * max(1.0, m.gamma_clad)
    x = np.linspace(0, 4 * a, 50)
    assert np.allclose(m.profile(x), m.profile(-x))
    assert m.profile(a) == pytest.approx(m.profile(np.nextafter(a, np.inf)))
    assert m.power() == pytest.approx(2.5, rel=1e-10)


def test_continuity_and_decay():
    m = modes.solve_fundamental_mode(ND.omega_hat("s"), GEOM)
    a = GEOM.a
    assert m.profile(a - 1e-9) == pytest.approx(m.profile(a + 1e-9), rel=1e-7)
    far = m.profile(np.array([2 * a, 4 * a, 8 * a]))
    assert np.all(np.diff(far) < 0) and far[-1] > 0


def test_invalid_geometry():
    with pytest.raises(InvalidParameterError):
        modes.solve_fundamental_mode(10.0, modes.SlabGeometry(1.0, 1.45, 1.45))
    with pytest.raises(InvalidParameterError):
        modes.solve_fundamental_mode(10.0, GEOM, tol=0.0)


def _mesh():
    return mesh.build_layered_mesh(CFG, ND)


def test_constant_profile_exact():
    v, b = modes.mode_trace(None, _mesh(), 3, profile=lambda x: np.full_like(x, 2.0))
    assert np.allclose(v, 2.0) and np.allclose(b, 0.0, atol=1e-13)


def test_zero_profile():
    v, b = modes.mode_trace(None, _mesh(), 4, profile=np.zeros_like)
    assert not v.any() and not b.any()


def projection_error(mode, m, degree):
    from fiberdpg import fespace

    v, b = modes.mode_trace(mode, m, degree)
    x = np.linspace(m.x[0], m.x[-1], 200_001)
    err = fespace.eval_line(v, b, m.x, x) - mode.profile(x)
    return np.sqrt(np.trapezoid(err**2, x) / np.trapezoid(mode.profile(x) ** 2, x))


def test_projection_error_p5():
    m = _mesh()
    assert np.count_nonzero(m.core_col) == 8
    mode = modes.solve_fundamental_mode(ND.omega_hat("s"), GEOM)
    assert projection_error(mode, m, 5) < 1e-4


def test_projection_error_decreases_with_degree():
    m = _mesh()
    mode = modes.solve_fundamental_mode(ND.omega_hat("s"), GEOM)
    errs = [projection_error(mode, m, p) for p in (2, 3, 4, 5)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
