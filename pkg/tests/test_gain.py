import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fiberdpg import gain
from fiberdpg.errors import InvalidParameterError
from fiberdpg.io import SimulationConfig

PHYS = SimulationConfig().physical()
HBAR = 1.054571817e-34
C = 299_792_458.0


def brute_force(I_s, I_p):
    """Closed form written out with the tabulated constants, no package code."""
    sa_s, se_s, sa_p, se_p = 6e-27, 3.58e-25, 1.429e-24, 1.776e-24
    N, tau = 6e25, 8e-4
    phi_s = I_s / (HBAR * 2 * math.pi * C / 1064e-9)
    phi_p = I_p / (HBAR * 2 * math.pi * C / 976e-9)
    nbar = N * (phi_s * sa_s + phi_p * sa_p) / (1 / tau + phi_s * (sa_s + se_s) + phi_p * (sa_p + se_p))
    return nbar, -sa_s * N + (sa_s + se_s) * nbar, -sa_p * N + (sa_p + se_p) * nbar


def test_zero_irradiance():
    assert gain.excited_population(0.0, 0.0, PHYS) == 0.0
    assert gain.gain_coefficient("s", 0.0, 0.0, PHYS) == pytest.approx(-0.36, rel=1e-12)
    assert gain.gain_coefficient("p", 0.0, 0.0, PHYS) == pytest.approx(-85.74, rel=1e-12)


def test_pumped_population_and_gains():
    nbar = gain.excited_population(0.0, 1e10, PHYS)
    assert nbar == pytest.approx(2.654e25, rel=1e-3)
    assert nbar / PHYS.N_total == pytest.approx(0.442, abs=1e-3)
    assert gain.gain_coefficient("p", 0.0, 1e10, PHYS) == pytest.approx(-0.68, abs=0.01)
    assert gain.gain_coefficient("s", 0.0, 1e10, PHYS) == pytest.approx(9.30, abs=0.01)


@pytest.mark.parametrize("I_s, I_p", [(0.0, 0.0), (0.0, 1e10), (3e9, 1e10), (1e11, 2e8)])
def test_matches_brute_force(I_s, I_p):
    nbar, gs, gp = brute_force(I_s, I_p)
    assert gain.excited_population(I_s, I_p, PHYS) == pytest.approx(nbar, rel=1e-12, abs=1.0)
    assert gain.gain_coefficient("s", I_s, I_p, PHYS) == pytest.approx(gs, rel=1e-12)
    assert gain.gain_coefficient("p", I_s, I_p, PHYS) == pytest.approx(gp, rel=1e-12)


def test_bleaching_limit():
    lim = PHYS.N_total * 1.429e-24 / (1.429e-24 + 1.776e-24)
    assert gain.saturation_population(PHYS) == pytest.approx(lim)
    assert lim / PHYS.N_total == pytest.approx(0.4459, abs=1e-4)
    big = gain.excited_population(0.0, 1e20, PHYS)
    assert big == pytest.approx(lim, rel=1e-8)
    g = gain.gain_coefficient("p", 0.0, 1e20, PHYS)
    assert -1e-6 < g < 0


def test_negative_irradiance_rejected():
    with pytest.raises(InvalidParameterError):
        gain.excited_population(-1.0, 0.0, PHYS)
    with pytest.raises(InvalidParameterError):
        gain.heat_source(0.0, np.array([1.0, -2.0]), PHYS)
    with pytest.raises(InvalidParameterError):
        gain.gain_coefficient("x", 0.0, 0.0, PHYS)


def test_irradiance_definition():
    assert gain.irradiance_hat(0.0, 1.4512) == 0.0
    assert gain.irradiance_hat(1.0, 1.4512) == pytest.approx(0.7256)
    assert gain.irradiance_hat(2.0j, 1.4512) == pytest.approx(4 * 0.7256)
    E = 1e6
    assert gain.irradiance(E, 1.45, PHYS) == pytest.approx(0.5 * 1.45 * C * 8.8541878128e-12 * E**2)


def test_heat_source_examples():
    assert gain.heat_source(0.0, 0.0, PHYS) == 0.0
    I_p = 1e10
    expected = -(gain.gain_coefficient("p", 0.0, I_p, PHYS) * I_p)
    assert gain.heat_source(0.0, I_p, PHYS) == pytest.approx(expected)


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(3)
    I_s = rng.uniform(0, 1e11, 5000)
    I_p = rng.uniform(0, 1e11, 5000)
    s = gain.evaluate(I_s, I_p, PHYS)
    for k in (0, 17, 4999):
        assert s.g_s[k] == pytest.approx(brute_force(I_s[k], I_p[k])[1], rel=1e-12)


def test_gain_bounds_and_heat_sign_random():
    rng = np.random.default_rng(7)
    I_s = 10 ** rng.uniform(-2, 12, 100_000)
    I_p = 10 ** rng.uniform(-2, 12, 100_000)
    s = gain.evaluate(I_s, I_p, PHYS)
    N = PHYS.N_total
    assert np.all((s.N_excited >= 0) & (s.N_excited <= N))
    assert np.all(s.g_s >= -PHYS.sigma_abs_s * N) and np.all(s.g_s <= PHYS.sigma_ems_s * N)
    assert np.all(s.g_p >= -PHYS.sigma_abs_p * N) and np.all(s.g_p <= PHYS.sigma_ems_p * N)
    assert np.all(s.Q >= 0)


@settings(max_examples=200, deadline=None)
@given(I_s=st.floats(0, 1e12), I_p=st.floats(0, 1e12))
def test_heat_non_negative(I_s, I_p):
    assert gain.heat_source(I_s, I_p, PHYS) >= -1e-9 * (I_s + I_p + 1)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(0, 1e13), b=st.floats(0, 1e13))
def test_population_monotone_in_pump(a, b):
    lo, hi = sorted((a, b))
    n_lo = gain.excited_population(0.0, lo, PHYS)
    n_hi = gain.excited_population(0.0, hi, PHYS)
    assert n_lo <= n_hi * (1 + 1e-14)
    assert n_hi <= gain.saturation_population(PHYS) * (1 + 1e-14)


def test_gain_hat_scaling():
    cfg = SimulationConfig()
    scales = cfg.scales()
    gs, gp, q = gain.gain_hat(0.0, 1.0, PHYS, scales)
    assert gp * scales.g_0 == pytest.approx(gain.gain_coefficient("p", 0.0, scales.I_0, PHYS))
    assert q * scales.g_0 * scales.I_0 == pytest.approx(gain.heat_source(0.0, scales.I_0, PHYS))
