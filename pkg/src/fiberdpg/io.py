"""Configuration files and CSV export.

Config files are line based ``key = value`` text with ``#`` comments.  Lengths
may be given with a unit suffix on the key (``r_core_um = 12.7``,
``lambda_s_nm = 1064``); bare keys are SI.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, fields, replace
from datetime import datetime, timezone

from .errors import ConfigError, InvalidParameterError
from .params import PhysicalParams, Scales

_UNITS = {"m": 1.0, "um": 1e-6, "nm": 1e-9}
_LENGTHS = ("r_core", "r_clad", "lambda_s", "lambda_p", "L_real", "l_0")
_CHOICES = {
    "wavelength_convention": ("vacuum", "medium"),
    "irradiance_model": ("plane_wave", "poynting"),
    "solver_method": ("block", "sparse"),
}
_PHYS = {f.name for f in fields(PhysicalParams)}
_SCALES = ("l_0", "I_0", "sigma_0", "nu_0", "T_0", "t_0")


@dataclass(frozen=True)
class SimulationConfig:
    # physical parameters (SI)
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
    c: float = 299_792_458.0
    eps_0: float = 8.8541878128e-12
    mu_0: float = 1.25663706212e-6
    hbar: float = 1.054571817e-34
    L_real: float = 10.0
    P_s_in: float = 2.0
    P_p_in: float = 20.0
    # dimensional scales
    l_0: float = 1e-5
    I_0: float = 1e10
    sigma_0: float = 1e-26
    nu_0: float = 1e25
    T_0: float = 1.0
    t_0: float = 1e-3
    # discretization and model
    num_wavelengths: int = 15
    elems_per_wavelength: int = 2
    n_transverse_elems: int = 16
    clad_growth: float = 2.0
    order_p: int = 5
    delta_p: int = 1
    gain_scale: float = 1e4
    active_gain: bool = True
    pml_wavelengths: int = 3
    pml_sigma_max: float = 40.0
    picard_tol: float = 1e-4
    picard_max_iters: int = 60
    residual_each_iteration: bool = False
    dt_ms: float = 0.1
    t_max_ms: float = 20.0
    wavelength_convention: str = "medium"
    wavelength_length_nm: float = 0.0
    slab_depth_um: float = 0.0
    irradiance_model: str = "plane_wave"
    solver_method: str = "block"
    sweep_wavelengths: tuple = (15, 30, 60, 120)
    sweep_gain_scales: tuple = (1.25e3, 2.5e3, 5e3, 1e4, 2e4, 4e4)

    def __post_init__(self):
        for name in ("num_wavelengths", "elems_per_wavelength", "order_p", "picard_max_iters",
                     "pml_wavelengths"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.n_transverse_elems < 4:
            raise ConfigError("n_transverse_elems must be >= 4")
        if self.delta_p < 0:
            raise ConfigError("delta_p must be >= 0")
        for name in ("picard_tol", "dt_ms", "t_max_ms", "pml_sigma_max", "clad_growth"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive")
        if self.gain_scale < 0 or not math.isfinite(self.gain_scale):
            raise ConfigError("gain_scale must be finite and non-negative")
        for name, allowed in _CHOICES.items():
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {', '.join(allowed)}")
        if not self.sweep_wavelengths or not self.sweep_gain_scales:
            raise ConfigError("sweep lists must not be empty")
        try:
            self.physical()
            self.scales()
        except InvalidParameterError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def fiber_length_m(self):
        return self.L_real

    def physical(self) -> PhysicalParams:
        return PhysicalParams(**{k: getattr(self, k) for k in _PHYS})

    def scales(self) -> Scales:
        return Scales.from_base(**{k: getattr(self, k) for k in _SCALES}, c=self.c, eps_0=self.eps_0)

    def with_updates(self, **kw) -> "SimulationConfig":
        return replace(self, **kw)


_FIELD_TYPES = {f.name: f.type for f in fields(SimulationConfig)}


def _convert(key, raw, line):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind == "int":
            v = float(raw)
            if v != int(v):
                raise ValueError(raw)
            return int(v)
        if kind == "float":
            return float(raw)
        if kind == "tuple":
            items = [s for s in raw.replace(",", " ").split() if s]
            return tuple(float(s) if key == "sweep_gain_scales" else int(s) for s in items)
        return raw
    except ValueError:
        raise ConfigError(f"malformed value {raw!r} for {key}", line=line) from None


def _resolve_key(key):
    """Map a possibly unit-suffixed key to (field name, factor)."""
    if key == "fiber_length_m":
        return "L_real", 1.0
    if key in _FIELD_TYPES:
        return key, None
    for base in _LENGTHS:
        for unit, factor in _UNITS.items():
            if key == f"{base}_{unit}":
                return base, factor
    return None, None


def parse_config(text: str) -> SimulationConfig:
    values = {}
    seen = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", line=lineno)
        key, raw = (s.strip() for s in body.split("=", 1))
        name, factor = _resolve_key(key)
        if name is None:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        if name in seen:
            raise ConfigError(f"{key!r} duplicates line {seen[name]}", line=lineno)
        if not raw:
            raise ConfigError(f"missing value for {key!r}", line=lineno)
        seen[name] = lineno
        v = _convert(name, raw, lineno)
        values[name] = v * factor if factor is not None else v
    try:
        return SimulationConfig(**values)
    except ConfigError as exc:
        bad = next((seen[k] for k in seen if k in str(exc)), None)
        raise ConfigError(str(exc).split(": ", 1)[-1], line=bad) from None


def load_config(path) -> SimulationConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def format_config(cfg: SimulationConfig) -> str:
    out = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ", ".join(repr(x) for x in v)
        elif isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = repr(v)
        out.append(f"{f.name} = {v}")
    return "\n".join(out) + "\n"


# -- CSV -----------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, str)):
        return str(v)
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".16e")


class OutputDir:
    """Writes CSV files into a directory and keeps a MANIFEST of them."""

    def __init__(self, path, reproducible=False):
        self.path = path
        self.reproducible = reproducible
        self.files = []
        os.makedirs(path, exist_ok=True)

    def write_csv(self, name, header, rows):
        full = os.path.join(self.path, name)
        with open(full, "w", newline="", encoding="utf-8") as fh:
            if not self.reproducible:
                stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
                fh.write(f"# generated {stamp}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        self.files.append(name)
        return full

    def write_manifest(self, complete=True, message=""):
        with open(os.path.join(self.path, "MANIFEST"), "w", encoding="utf-8") as fh:
            fh.write(f"status = {'complete' if complete else 'incomplete'}\n")
            if message:
                fh.write(f"message = {message}\n")
            for name in self.files:
                fh.write(f"file = {name}\n")


def read_csv(path):
    """Header and rows (as floats where possible) of a file written above."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    header, body = rows[0], rows[1:]
    out = []
    for r in body:
        conv = []
        for v in r:
            try:
                conv.append(float(v))
            except ValueError:
                conv.append(v)
        out.append(conv)
    return header, out
