import numpy as np
import pytest

from hydrocrack.config import (
    HISTORY_HEADER,
    ConfigError,
    parse_config,
    parse_config_text,
    read_history_csv,
    resolved_config_text,
    write_history_csv,
    write_resolved_config,
    write_vtk,
)
from hydrocrack.core import FieldState
from hydrocrack.mesh import generate_rect_mesh, write_mesh
from hydrocrack.solver import IncrementRecord

MINIMAL = """\
# uniaxial square
[mesh]
type = rect
width = 1
height = 1
nx = 2
ny = 2

[dirichlet]
set = bottom
field = u
component = y
value = 0

[dirichlet]
set = top
field = u
component = y
rate = 1e-3
"""


def test_minimal_config_gets_iron_defaults():
    cfg = parse_config_text(MINIMAL)
    m = cfg.material
    assert (m.young_modulus, m.poisson_ratio, m.stiffness_floor) == (210000.0, 0.3, 1e-7)
    assert cfg.solver.staggered_passes == 1
    assert cfg.solver.equilibrium_hydrogen is False
    assert cfg.loading.node_set == "top" and cfg.loading.component == 1
    assert cfg.build_mesh().n_elements == 4


def _err(text):
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    return str(info.value)


def test_negative_length_scale_rejected():
    assert "length_scale" in _err(MINIMAL + "[material]\nlength_scale = -0.1\n")


def test_unknown_key_names_the_line():
    msg = _err(MINIMAL + "[solver]\ndtt = 0.1\n")
    assert "dtt" in msg and "line 21" in msg


def test_unknown_section_rejected():
    assert "bogus" in _err(MINIMAL + "[bogus]\n")


def test_duplicate_key_and_section():
    assert "duplicate" in _err(MINIMAL + "[solver]\ndt = 1\ndt = 2\n")
    assert "solver" in _err(MINIMAL + "[solver]\ndt = 1\n[solver]\nt_end = 2\n")


def test_bad_number_reports_line():
    assert "line 6" in _err(MINIMAL.replace("nx = 2", "nx = two"))


def test_missing_node_set_named():
    assert "'middle'" in _err(MINIMAL.replace("set = bottom", "set = middle"))


def test_exactly_one_loading_program():
    assert "loading program" in _err(MINIMAL.replace("rate = 1e-3", "value = 0"))
    assert "loading program" in _err(MINIMAL + "[dirichlet]\nset = left\nfield = u\ncomponent = x\nrate = 1\n")


def test_ramp_program_knots_must_be_ordered():
    text = MINIMAL.replace("rate = 1e-3", "ramp = 0:0, 2:1, 1:2")
    assert "line 19" in _err(text)
    cfg = parse_config_text(MINIMAL.replace("rate = 1e-3", "ramp = 0:0, 1:1e-3, 3:1e-3"))
    assert cfg.loading.program.value(2.0) == pytest.approx(1e-3)


def test_boundary_concentration_requires_sets():
    assert "cb_sets" in _err(MINIMAL + "[hydrogen]\ncb = 1\n")
    cfg = parse_config_text(MINIMAL + "[hydrogen]\nc0 = 1\ncb = 1\ncb_sets = left right\n")
    assert cfg.cb_sets == ("left", "right")


def test_resolved_config_round_trip(tmp_path):
    text = MINIMAL + (
        "[hydrogen]\nc0 = 0.5\ncb = 0.5\ncb_sets = left right\n"
        "[defect]\nname = pit\npolygon = 0.4 0.4 0.6 0.4 0.5 0.6\nhold_concentration = true\n"
        "[neumann]\nset = left\nfield = c\nvalue = 0.1\n"
        "[solver]\ndt = 0.5\nt_end = 2\nmax_phase_increment = 0.2\n"
        "[output]\nevery = 2\ntimes = 0.5 1.5\n"
    )
    cfg = parse_config_text(text)
    again = parse_config_text(resolved_config_text(cfg))
    assert again == cfg
    write_resolved_config(tmp_path / "r.cfg", cfg)
    assert parse_config(tmp_path / "r.cfg") == cfg


def test_mesh_file_relative_to_config(tmp_path):
    write_mesh(tmp_path / "m.mesh", generate_rect_mesh(1.0, 1.0, 3, 3))
    text = MINIMAL.replace("type = rect\nwidth = 1\nheight = 1\nnx = 2\nny = 2", "type = file\nfile = m.mesh")
    (tmp_path / "s.cfg").write_text(text)
    assert parse_config(tmp_path / "s.cfg").build_mesh().n_elements == 9


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "absent.cfg")


def _state(mesh, seed=0):
    rng = np.random.default_rng(seed)
    s = FieldState.zeros(mesh.n_nodes, mesh.n_elements, 4)
    s.displacement[:] = rng.normal(size=2 * mesh.n_nodes)
    s.phase[:] = rng.uniform(size=mesh.n_nodes)
    s.concentration[:] = rng.uniform(size=mesh.n_nodes)
    s.sigma_h_nodal[:] = rng.normal(size=mesh.n_nodes)
    return s


@pytest.mark.parametrize("kind,npts,ctype", [("quad4", 4, "9"), ("quad8", 8, "23")])
def test_vtk_single_element(tmp_path, kind, npts, ctype):
    m = generate_rect_mesh(1.0, 1.0, 1, 1, kind)
    write_vtk(tmp_path / "a.vtk", m, _state(m))
    lines = (tmp_path / "a.vtk").read_text().splitlines()
    assert f"POINTS {npts} double" in lines
    assert f"CELLS 1 {npts + 1}" in lines
    assert lines[lines.index("CELL_TYPES 1") + 1] == ctype
    for name in ("phi", "concentration", "sigma_h"):
        i = lines.index(f"SCALARS {name} double 1")
        block = lines[i + 2 : i + 2 + npts]
        assert all(len(v.split()) == 1 for v in block)
    i = lines.index("VECTORS displacement double")
    assert all(v.split()[2] == "0.000000000e+00" for v in lines[i + 1 : i + 1 + npts])


def test_vtk_is_deterministic(tmp_path):
    m = generate_rect_mesh(2.0, 1.0, 4, 2, "quad8")
    s = _state(m, 7)
    write_vtk(tmp_path / "a.vtk", m, s)
    write_vtk(tmp_path / "b.vtk", m, s)
    assert (tmp_path / "a.vtk").read_bytes() == (tmp_path / "b.vtk").read_bytes()


def test_vtk_rejects_mismatched_state(tmp_path):
    m = generate_rect_mesh(1.0, 1.0, 2, 2)
    s = _state(generate_rect_mesh(1.0, 1.0, 1, 1))
    with pytest.raises(ValueError):
        write_vtk(tmp_path / "x.vtk", m, s)


def test_history_csv(tmp_path):
    write_history_csv(tmp_path / "e.csv", [])
    assert (tmp_path / "e.csv").read_text() == HISTORY_HEADER + "\n"
    recs = [IncrementRecord(0.1 * i, 1e-4 * i, 3.0 * i, 0.01 * i, 0.0, 1.0, 1) for i in range(1, 6)]
    write_history_csv(tmp_path / "h.csv", recs)
    data = read_history_csv(tmp_path / "h.csv")
    assert len(data) == 5
    assert np.allclose(data["reaction"], [3, 6, 9, 12, 15])
    assert (tmp_path / "h.csv").read_text().splitlines()[1].startswith("1.000000000e-01,")
