import math
from types import SimpleNamespace

import pytest
from hypothesis import given, settings, strategies as st

from fiberdpg import params
from fiberdpg.errors import ConfigError, InvalidParameterError
from fiberdpg.io import SimulationConfig


def nd_of(cfg):
    return params.nondimensionalize(cfg.physical(), cfg.scales(), cfg)


def test_omega_hat_signal():
    nd = nd_of(SimulationConfig())
    assert nd.omega_hat_s == pytest.approx(2 * math.pi * 1e-5 / 1064e-9, rel=1e-14)
    assert nd.omega_hat_s == pytest.approx(59.052, abs=5e-4)


def test_l0g0_from_tabulated_scales():
    assert nd_of(SimulationConfig()).l0g0 == pytest.approx(1e-6, rel=1e-14)


def test_alpha_0_hand_arithmetic():
    got = nd_of(SimulationConfig()).alpha_0
    assert got == pytest.approx(1.38 * 1e-3 / (2201 * 703 * 1e-10), rel=1e-14)
    assert got == pytest.approx(8.919, abs=1e-3)


def test_q0_formula():
    cfg = SimulationConfig()
    s = cfg.scales()
    assert nd_of(cfg).Q_0 == pytest.approx(s.t_0 * s.g_0 * s.I_0 / (2201 * 703 * s.T_0))


def test_scale_relations():
    s = SimulationConfig().scales()
    assert s.omega_0 == pytest.approx(299_792_458.0 / s.l_0)
    assert s.H_0 == pytest.approx(8.8541878128e-12 * 299_792_458.0 * s.E_0)
    assert s.I_0 == pytest.approx(s.E_0 * s.H_0)
    assert s.P_0 == pytest.approx(s.I_0 * s.l_0**2)
    assert s.g_0 == pytest.approx(s.sigma_0 * s.nu_0)


def test_numerical_aperture_and_v_number():
    phys = SimulationConfig().physical()
    assert params.numerical_aperture(phys) == pytest.approx(0.059, abs=5e-4)
    assert abs(params.v_number(phys) - 4.43) <= 0.01


def test_degenerate_guidance_rejected():
    with pytest.raises(ConfigError):
        SimulationConfig(n_core=1.45, n_clad=1.45)
    with pytest.raises(InvalidParameterError):
        params.numerical_aperture(SimpleNamespace(n_core=1.45, n_clad=1.45))


@pytest.mark.parametrize("nlam, expected", [(15, 1.2e-6), (240, 1.92e-5)])
def test_alpha_z_for_short_fiber_captions(nlam, expected):
    cfg = SimulationConfig(num_wavelengths=nlam, wavelength_length_nm=800.0, L_real=10.0)
    assert nd_of(cfg).alpha_z == pytest.approx(expected, rel=1e-12)


def test_alpha_z_must_not_exceed_one():
    with pytest.raises(InvalidParameterError):
        params.short_fiber_alpha_z(10, 1.0, 5.0)


@pytest.mark.parametrize("field, value", [("sigma_abs_s", -1.0), ("tau", 0.0), ("lambda_p", 2e-6),
                                          ("n_clad", 0.9), ("P_s_in", float("nan"))])
def test_invalid_physical_parameters(field, value):
    phys = SimulationConfig().physical()
    kw = {k: getattr(phys, k) for k in vars(phys)}
    kw[field] = value
    with pytest.raises(InvalidParameterError):
        type(phys)(**kw)


@settings(max_examples=40, deadline=None)
@given(nlam=st.integers(1, 200), g=st.floats(0.0, 1e5), l0=st.floats(2e-6, 5e-5),
       t0=st.floats(1e-5, 1e-1), dt=st.floats(1e-3, 10.0))
def test_round_trip_redimensionalization(nlam, g, l0, t0, dt):
    cfg = SimulationConfig(num_wavelengths=nlam, gain_scale=g, l_0=l0, t_0=t0, dt_ms=dt,
                           t_max_ms=10 * dt)
    phys, scales = cfg.physical(), cfg.scales()
    back = params.redimensionalize(params.nondimensionalize(phys, scales, cfg), scales, phys)
    for key in ("lambda_s", "lambda_p", "r_core", "r_clad", "kappa", "I_0", "L_real",
                "P_s_in", "P_p_in"):
        ref = getattr(phys, key, None)
        if ref is None:
            ref = getattr(scales, key)
        assert back[key] == pytest.approx(ref, rel=1e-12), key
    assert back["g_0"] == pytest.approx(scales.g_0, rel=1e-12)
    assert back["dt"] == pytest.approx(dt * 1e-3, rel=1e-12)
