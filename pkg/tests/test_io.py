import math
import os

import pytest
from hypothesis import given, settings, strategies as st

from fiberdpg import io
from fiberdpg.errors import ConfigError


def test_empty_file_gives_defaults():
    cfg = io.parse_config("")
    assert cfg == io.SimulationConfig()
    assert cfg.sigma_ems_p == 1.776e-24 and cfg.N_total == 6e25 and cfg.tau == 8e-4
    assert cfg.kappa == 1.38 and cfg.dn_dT == 1.285e-5
    assert cfg.elems_per_wavelength == 2 and cfg.order_p == 5 and cfg.delta_p == 1
    assert cfg.picard_tol == 1e-4 and cfg.dt_ms == 0.1 and cfg.t_max_ms == 20.0


def test_gain_scale_value():
    assert io.parse_config("gain_scale = 5.0e3\n").gain_scale == 5e3


def test_invariant_violation_reports_line():
    with pytest.raises(ConfigError) as err:
        io.parse_config("# header\n\norder_p = 0\n")
    assert err.value.line == 3
    assert "line 3" in str(err.value)


@pytest.mark.parametrize("text, line", [
    ("foo = 1", 1),
    ("gain_scale = 1\ngain_scale = 2", 2),
    ("order_p = 2.5", 1),
    ("active_gain = maybe", 1),
    ("picard_tol", 1),
    ("dt_ms =", 1),
    ("x\norder_p = 3", 1),
    ("solver_method = magic", 1),
])
def test_rejected_lines(text, line):
    with pytest.raises(ConfigError) as err:
        io.parse_config(text)
    assert err.value.line == line


def test_unit_suffixes_and_comments():
    cfg = io.parse_config("r_core_um = 10  # microns\nlambda_s_nm = 1030\nfiber_length_m = 4\n"
                          "wavelength_convention = vacuum\nsweep_wavelengths = 15, 30\n")
    assert cfg.r_core == pytest.approx(10e-6)
    assert cfg.lambda_s == pytest.approx(1030e-9)
    assert cfg.L_real == 4.0 and cfg.fiber_length_m == 4.0
    assert cfg.wavelength_convention == "vacuum"
    assert cfg.sweep_wavelengths == (15, 30)


def test_physical_invariant_becomes_config_error():
    with pytest.raises(ConfigError):
        io.parse_config("lambda_p_nm = 1100")


@settings(max_examples=30, deadline=None)
@given(g=st.floats(0, 1e6, allow_nan=False), p=st.integers(1, 8), nl=st.integers(1, 300),
       tol=st.floats(1e-12, 1.0), flag=st.booleans())
def test_format_parse_round_trip(g, p, nl, tol, flag):
    cfg = io.SimulationConfig(gain_scale=g, order_p=p, num_wavelengths=nl, picard_tol=tol,
                              active_gain=flag)
    assert io.parse_config(io.format_config(cfg)) == cfg


def test_load_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("num_wavelengths = 30\n", encoding="utf-8")
    assert io.load_config(path).num_wavelengths == 30


def test_csv_round_trip_and_determinism(tmp_path):
    rows = [(0.0, 1.0, 2.5), (1e-7, math.pi, -3.0)]
    a = io.OutputDir(tmp_path / "a", reproducible=True)
    b = io.OutputDir(tmp_path / "b", reproducible=True)
    for out in (a, b):
        out.write_csv("power.csv", ("z", "P_signal", "P_pump"), rows)
        out.write_manifest()
    ta = (tmp_path / "a" / "power.csv").read_bytes()
    assert ta == (tmp_path / "b" / "power.csv").read_bytes()
    header, body = io.read_csv(tmp_path / "a" / "power.csv")
    assert header == ["z", "P_signal", "P_pump"]
    assert body[1][1] == math.pi  # 17 significant digits survive
    assert b"e+00" in ta
    stamped = io.OutputDir(tmp_path / "c")
    stamped.write_csv("power.csv", ("z",), [(1.0,)])
    assert (tmp_path / "c" / "power.csv").read_text().startswith("# generated")
    assert io.read_csv(tmp_path / "c" / "power.csv")[0] == ["z"]


def test_manifest_marks_incomplete(tmp_path):
    out = io.OutputDir(tmp_path)
    out.write_csv("x.csv", ("a",), [(1,)])
    out.write_manifest(complete=False, message="boom")
    text = (tmp_path / "MANIFEST").read_text()
    assert "status = incomplete" in text and "message = boom" in text and "file = x.csv" in text
    assert os.path.exists(tmp_path / "x.csv")
