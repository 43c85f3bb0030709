"""Physical constants, dimensional scales and non-dimensional model constants.

Defaults reproduce the parameter tables of the Yb-doped step-index amplifier:
cross-sections, dopant concentration and lifetime; the dimensional scales;
the silica heat-coupling constants; and the fiber geometry.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

from .errors import InvalidParameterError

# CODATA 2018
SPEED_OF_LIGHT = 299_792_458.0
VACUUM_PERMITTIVITY = 8.8541878128e-12
VACUUM_PERMEABILITY = 1.25663706212e-6
REDUCED_PLANCK = 1.054571817e-34


def _require_positive(obj, names):
    for name in names:
        value = getattr(obj, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise InvalidParameterError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class PhysicalParams:
    sigma_abs_s: float = 6e-27
    sigma_ems_s: float = 3.58e-25
    sigma_abs_p: float = 1.429e-24
    sigma_ems_p: float = 1.776e-24
    N_total: float = 6e25
    tau: float = 8e-4
    r_core: float = 12.7e-6
    r_clad: float = 127e-6
    n_core: float = 1.4512
    n_clad: float = 1.4500
    lambda_s: float = 1064e-9
    lambda_p: float = 976e-9
    C_p: float = 703.0
    rho_0: float = 2201.0
    kappa: float = 1.38
    dn_dT: float = 1.285e-5
    c: float = SPEED_OF_LIGHT
    eps_0: float = VACUUM_PERMITTIVITY
    mu_0: float = VACUUM_PERMEABILITY
    hbar: float = REDUCED_PLANCK
    L_real: float = 10.0
    P_s_in: float = 2.0
    P_p_in: float = 20.0

    def __post_init__(self):
        positive = [f.name for f in fields(self) if f.name not in ("dn_dT", "P_s_in", "P_p_in")]
        _require_positive(self, positive)
        for name in ("P_s_in", "P_p_in", "dn_dT"):
            value = getattr(self, name)
            if not math.isfinite(value) or (name != "dn_dT" and value < 0):
                raise InvalidParameterError(f"{name} must be finite and non-negative")
        if not self.n_core > self.n_clad > 1:
            raise InvalidParameterError("need n_core > n_clad > 1")
        if not self.lambda_p < self.lambda_s:
            raise InvalidParameterError("pump wavelength must be shorter than signal wavelength")
        if not self.r_core < self.r_clad:
            raise InvalidParameterError("core radius must be smaller than cladding radius")

    def omega(self, field_id):
        lam = self.lambda_s if field_id == "s" else self.lambda_p
        return 2 * math.pi * self.c / lam

    def photon_energy(self, field_id):
        return self.hbar * self.omega(field_id)


@dataclass(frozen=True)
class Scales:
    """Dimensional scales; derived entries follow the tabulated relations."""

    l_0: float
    omega_0: float
    I_0: float
    E_0: float
    H_0: float
    P_0: float
    sigma_0: float
    nu_0: float
    g_0: float
    T_0: float
    t_0: float

    @classmethod
    def from_base(cls, l_0=1e-5, I_0=1e10, sigma_0=1e-26, nu_0=1e25, T_0=1.0, t_0=1e-3,
                  c=SPEED_OF_LIGHT, eps_0=VACUUM_PERMITTIVITY):
        for name, v in dict(l_0=l_0, I_0=I_0, sigma_0=sigma_0, nu_0=nu_0, T_0=T_0, t_0=t_0).items():
            if not (math.isfinite(v) and v > 0):
                raise InvalidParameterError(f"scale {name} must be positive and finite")
        # I_0 = E_0 H_0 with H_0 = eps_0 c E_0
        E_0 = math.sqrt(I_0 / (eps_0 * c))
        return cls(
            l_0=l_0,
            omega_0=c / l_0,
            I_0=I_0,
            E_0=E_0,
            H_0=eps_0 * c * E_0,
            P_0=I_0 * l_0**2,
            sigma_0=sigma_0,
            nu_0=nu_0,
            g_0=sigma_0 * nu_0,
            T_0=T_0,
            t_0=t_0,
        )


@dataclass(frozen=True)
class NondimParams:
    omega_hat_s: float
    omega_hat_p: float
    l0g0: float
    gain_scale: float
    alpha_z: float
    alpha_0: float
    Q_0: float
    L_tilde: float
    dt_hat: float
    t_max_hat: float
    a_core: float
    a_clad: float
    n_core: float
    n_clad: float
    wavelength_hat: float
    pml_length: float
    slab_depth_hat: float
    power_s: float
    power_p: float

    def omega_hat(self, field_id):
        return self.omega_hat_s if field_id == "s" else self.omega_hat_p

    def power(self, field_id):
        return self.power_s if field_id == "s" else self.power_p


def numerical_aperture(phys) -> float:
    if not phys.n_core > phys.n_clad:
        raise InvalidParameterError("numerical aperture requires n_core > n_clad")
    return math.sqrt(phys.n_core**2 - phys.n_clad**2)


def v_number(phys, wavelength=None) -> float:
    """Normalized frequency (2 pi / lambda) r_core NA."""
    lam = phys.lambda_s if wavelength is None else wavelength
    if not lam > 0:
        raise InvalidParameterError("wavelength must be positive")
    return 2 * math.pi / lam * phys.r_core * numerical_aperture(phys)


def wavelength_length(phys, convention="medium", override=0.0) -> float:
    """Dimensional length [m] of one 'wavelength' of the computational fiber."""
    if override:
        if override <= 0:
            raise InvalidParameterError("wavelength length override must be positive")
        return override
    if convention == "vacuum":
        return phys.lambda_s
    if convention == "medium":
        return phys.lambda_s / phys.n_core
    raise InvalidParameterError(f"unknown wavelength convention {convention!r}")


def short_fiber_alpha_z(num_wavelengths, length_per_wavelength, fiber_length) -> float:
    """Longitudinal heat-diffusion scaling: computational over real fiber length."""
    alpha = num_wavelengths * length_per_wavelength / fiber_length
    if not 0 < alpha <= 1:
        raise InvalidParameterError(f"alpha_z = {alpha} outside (0, 1]")
    return alpha


def default_slab_depth(phys) -> float:
    """Out-of-plane depth making the slab core area equal the fiber core area."""
    return math.pi * phys.r_core / 2.0


def nondimensionalize(phys: PhysicalParams, scales: Scales, config) -> NondimParams:
    """Non-dimensional constants of the scaled Maxwell and heat systems.

    ``config`` supplies num_wavelengths, gain_scale, dt_ms, t_max_ms,
    pml_wavelengths, wavelength_convention, wavelength_length_nm and
    slab_depth_um (0 selects the equal-core-area default).
    """
    l0 = scales.l_0
    if config.gain_scale < 0 or not math.isfinite(config.gain_scale):
        raise InvalidParameterError("gain_scale must be finite and non-negative")
    if config.dt_ms <= 0 or config.t_max_ms <= 0:
        raise InvalidParameterError("time step and horizon must be positive")
    lam_len = wavelength_length(phys, config.wavelength_convention, config.wavelength_length_nm * 1e-9)
    L_dim = config.num_wavelengths * lam_len
    depth = config.slab_depth_um * 1e-6 if config.slab_depth_um else default_slab_depth(phys)
    rho_cp = phys.rho_0 * phys.C_p
    # power per unit depth; P = P_0 * depth/l_0 * P_hat
    power_scale = scales.P_0 * depth / l0
    return NondimParams(
        omega_hat_s=2 * math.pi * l0 / phys.lambda_s,
        omega_hat_p=2 * math.pi * l0 / phys.lambda_p,
        l0g0=l0 * scales.g_0,
        gain_scale=float(config.gain_scale),
        alpha_z=short_fiber_alpha_z(config.num_wavelengths, lam_len, phys.L_real),
        alpha_0=phys.kappa * scales.t_0 / (rho_cp * l0**2),
        Q_0=scales.t_0 * scales.g_0 * scales.I_0 / (rho_cp * scales.T_0),
        L_tilde=L_dim / l0,
        dt_hat=config.dt_ms * 1e-3 / scales.t_0,
        t_max_hat=config.t_max_ms * 1e-3 / scales.t_0,
        a_core=phys.r_core / l0,
        a_clad=phys.r_clad / l0,
        n_core=phys.n_core,
        n_clad=phys.n_clad,
        wavelength_hat=lam_len / l0,
        pml_length=config.pml_wavelengths * lam_len / l0,
        slab_depth_hat=depth / l0,
        power_s=phys.P_s_in / power_scale,
        power_p=phys.P_p_in / power_scale,
    )


def redimensionalize(nd: NondimParams, scales: Scales, phys: PhysicalParams) -> dict:
    """Map non-dimensional constants back to dimensional quantities."""
    l0 = scales.l_0
    rho_cp = phys.rho_0 * phys.C_p
    power_scale = scales.P_0 * nd.slab_depth_hat
    return {
        "lambda_s": 2 * math.pi * l0 / nd.omega_hat_s,
        "lambda_p": 2 * math.pi * l0 / nd.omega_hat_p,
        "r_core": nd.a_core * l0,
        "r_clad": nd.a_clad * l0,
        "kappa": nd.alpha_0 * rho_cp * l0**2 / scales.t_0,
        "g_0": nd.l0g0 / l0,
        "I_0": nd.Q_0 * rho_cp * scales.T_0 / (scales.t_0 * scales.g_0),
        "L_real": nd.L_tilde * l0 / nd.alpha_z,
        "dt": nd.dt_hat * scales.t_0,
        "t_max": nd.t_max_hat * scales.t_0,
        "P_s_in": nd.power_s * power_scale,
        "P_p_in": nd.power_p * power_scale,
    }


def as_dict(obj) -> dict:
    return asdict(obj)
