import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fiberdpg import mesh, params
from fiberdpg.errors import ConfigError
from fiberdpg.io import SimulationConfig


def build(**kw):
    cfg = SimulationConfig(**kw)
    nd = params.nondimensionalize(cfg.physical(), cfg.scales(), cfg)
    return mesh.build_layered_mesh(cfg, nd), nd


def test_counts_for_fifteen_wavelengths():
    m, _ = build(num_wavelengths=15, elems_per_wavelength=2, n_transverse_elems=8,
                 pml_wavelengths=3)
    assert m.n_z == 36
    assert m.n_elements == 288
    assert m.n_interior_layers == 30


def test_core_breakpoints_exact():
    m, nd = build()
    assert -nd.a_core in m.x and nd.a_core in m.x
    assert m.x[0] == -nd.a_clad and m.x[-1] == nd.a_clad


def test_interior_vertical_edges_have_opposite_signs():
    m, _ = build(n_transverse_elems=8, num_wavelengths=3)
    e = m.skeleton_edges()
    vert = e["kind"] == 1
    both = (e["elements"] >= 0).all(axis=1)
    assert np.all(e["signs"][vert & both].sum(axis=1) == 0)
    assert np.all(e["signs"][vert & both][:, 0] == 1)


@settings(max_examples=25, deadline=None)
@given(nt=st.integers(4, 24), nl=st.integers(1, 12), epw=st.integers(1, 4), npml=st.integers(1, 4),
       growth=st.floats(1.0, 3.0))
def test_conformity_and_area(nt, nl, epw, npml, growth):
    m, nd = build(n_transverse_elems=nt, num_wavelengths=nl, elems_per_wavelength=epw,
                  pml_wavelengths=npml, clad_growth=growth)
    e = m.skeleton_edges()
    n_edges = m.n_x * (m.n_z + 1) + m.n_z * (m.n_x + 1)
    assert e["kind"].size == n_edges
    # interior edges have two neighbours, boundary edges one
    count = (e["elements"] >= 0).sum(axis=1)
    on_boundary = ((e["kind"] == 0) & np.isin(e["vertices"][:, 0] // (m.n_x + 1), [0, m.n_z])) | \
                  ((e["kind"] == 1) & np.isin(e["vertices"][:, 0] % (m.n_x + 1), [0, m.n_x]))
    assert np.all(count[on_boundary] == 1) and np.all(count[~on_boundary] == 2)
    area = (m.x[-1] - m.x[0]) * (m.z[-1] - m.z[0])
    assert m.element_areas().sum() == pytest.approx(area, rel=1e-12)
    assert m.n_z == (nl + npml) * epw
    assert np.isclose(m.z_pml, nd.L_tilde)
    assert np.any(np.isclose(m.x, nd.a_core)) and np.any(np.isclose(m.x, -nd.a_core))


def test_region_tags():
    m, nd = build(n_transverse_elems=8, num_wavelengths=2, pml_wavelengths=1)
    tags = m.region_tags()
    assert len(tags) == m.n_elements
    assert tags[0] == ("cladding", "interior")
    assert tags[-1] == ("cladding", "pml")
    xc = 0.5 * (m.x[1:] + m.x[:-1])
    assert [t[0] == "core" for t in tags[: m.n_x]] == list(np.abs(xc) < nd.a_core)


def test_interior_submesh():
    m, nd = build(num_wavelengths=4)
    sub = m.interior_submesh()
    assert sub.n_z == m.n_interior_layers
    assert sub.z[-1] == pytest.approx(nd.L_tilde)
    assert not sub.pml_layer.any()


@pytest.mark.parametrize("kw", [dict(n_transverse_elems=3), dict(num_wavelengths=0),
                                dict(pml_wavelengths=0), dict(elems_per_wavelength=0)])
def test_bad_counts(kw):
    with pytest.raises(ConfigError):
        build(**kw)


def test_breakpoint_validation():
    with pytest.raises(ConfigError):
        mesh.transverse_breakpoints(8, 2.0, 1.0)
    with pytest.raises(ConfigError):
        mesh.Mesh(np.array([0.0, 1.0, 0.5]), np.array([0.0, 1.0]), 0.2, 1.0)
