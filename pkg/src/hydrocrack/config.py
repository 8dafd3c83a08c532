"""Scenario configuration files and result writers.

The configuration is a flat ``key = value`` text file with ``[section]``
headers.  ``[dirichlet]``, ``[neumann]`` and ``[defect]`` may repeat; every
other section appears at most once.  Lines starting with ``#`` are comments.

Example::

    [mesh]
    type = rect
    width = 1
    height = 1
    nx = 4
    ny = 4

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

    [solver]
    dt = 0.1
    t_end = 1
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import FieldState, MaterialParams, ParameterError
from .mesh import Mesh, MeshError, RefinementBand, generate_notched_plate_mesh, generate_rect_mesh, read_mesh
from .solver import DirichletBC, Defect, IncrementRecord, LoadProgram, NeumannBC, SolverSettings

REPEATABLE = ("dirichlet", "neumann", "defect")


class ConfigError(ValueError):
    """Invalid scenario configuration."""


# --- schema -------------------------------------------------------------------


def _float(v: str) -> float:
    return float(v)


def _int(v: str) -> int:
    return int(v)


def _bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("true", "yes", "on", "1"):
        return True
    if s in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _floats(v: str) -> tuple:
    return tuple(float(x) for x in v.replace(",", " ").split())


def _words(v: str) -> tuple:
    return tuple(v.split())


def _opt_float(v: str):
    return None if v.strip().lower() == "none" else float(v)


MESH_KEYS = {
    "type": str,
    "file": str,
    "width": _float,
    "height": _float,
    "nx": _int,
    "ny": _int,
    "element": str,
    "bands": str,
    "growth": _float,
    "notch_length": _float,
    "h_fine": _float,
    "band_rows": _int,
    "levels": _int,
    "left_segments": _int,
    "slit": _bool,
}

HYDROGEN_KEYS = {"c0": _float, "cb": _opt_float, "cb_sets": _words}

DIRICHLET_KEYS = {"set": str, "field": str, "component": str, "value": _float, "rate": _float, "start": _float, "ramp": str}
NEUMANN_KEYS = {"set": str, "field": str, "value": _floats}
DEFECT_KEYS = {"name": str, "polygon": _floats, "hold_concentration": _bool}
LOADS_KEYS = {"body_force": _floats}

SOLVER_KEYS = {
    "dt": _float,
    "t_end": _float,
    "staggered_passes": _int,
    "staggered_tol": _float,
    "newton_tol": _float,
    "max_newton_iters": _int,
    "dt_cut_factor": _float,
    "max_cuts": _int,
    "max_phase_increment": _opt_float,
    "dt_min": _float,
    "equilibrium_hydrogen": _bool,
    "sigma_h_degraded": _bool,
    "stop_reaction_fraction": _opt_float,
}

OUTPUT_KEYS = {"directory": str, "every": _int, "times": _floats, "vtk": _bool, "figures": _bool}

MATERIAL_KEYS = {name: _float for name in MaterialParams.field_names()}

SECTIONS = {
    "mesh": MESH_KEYS,
    "material": MATERIAL_KEYS,
    "hydrogen": HYDROGEN_KEYS,
    "dirichlet": DIRICHLET_KEYS,
    "neumann": NEUMANN_KEYS,
    "defect": DEFECT_KEYS,
    "loads": LOADS_KEYS,
    "solver": SOLVER_KEYS,
    "output": OUTPUT_KEYS,
}

COMPONENTS = {"x": 0, "y": 1}


@dataclass(frozen=True)
class MeshSpec:
    type: str = "rect"
    file: Optional[str] = None
    width: float = 1.0
    height: float = 1.0
    nx: int = 1
    ny: int = 1
    element: str = "quad4"
    bands: tuple = ()  # RefinementBand instances
    growth: float = 1.25
    notch_length: float = 0.5
    h_fine: float = 0.001
    band_rows: int = 4
    levels: int = 3
    left_segments: int = 3
    slit: bool = True

    def build(self, base_dir: Optional[Path] = None) -> Mesh:
        if self.type == "file":
            path = Path(self.file)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return read_mesh(path)
        if self.type == "rect":
            return generate_rect_mesh(self.width, self.height, self.nx, self.ny, self.element, self.bands, growth=self.growth)
        if self.type == "notched_plate":
            return generate_notched_plate_mesh(
                self.width,
                self.height,
                self.notch_length,
                self.h_fine,
                self.band_rows,
                self.levels,
                self.left_segments,
                growth=self.growth,
                elem_kind=self.element,
                slit=self.slit,
            )
        raise ConfigError(f"unknown mesh type {self.type!r}")


@dataclass
class ScenarioConfig:
    mesh: MeshSpec = field(default_factory=MeshSpec)
    material: MaterialParams = field(default_factory=MaterialParams)
    dirichlet: List[DirichletBC] = field(default_factory=list)
    neumann: List[NeumannBC] = field(default_factory=list)
    defects: List[Defect] = field(default_factory=list)
    body_force: Optional[tuple] = None
    c0: float = 0.0
    cb: Optional[float] = None
    cb_sets: tuple = ()
    solver: SolverSettings = field(default_factory=SolverSettings)
    output_dir: str = "output"
    output_every: int = 0
    output_times: tuple = ()
    write_vtk: bool = True
    write_figures: bool = True
    base_dir: Optional[Path] = field(default=None, compare=False, repr=False)
    _mesh_cache: Optional[Mesh] = field(default=None, compare=False, repr=False)

    def build_mesh(self) -> Mesh:
        if self._mesh_cache is None:
            self._mesh_cache = self.mesh.build(self.base_dir)
        return self._mesh_cache

    @property
    def loading(self) -> DirichletBC:
        return next(bc for bc in self.dirichlet if bc.program.is_program)

    def validate(self) -> None:
        programs = [bc for bc in self.dirichlet if bc.program.is_program]
        if len(programs) != 1:
            raise ConfigError(f"exactly one loading program (rate or ramp) is required, found {len(programs)}")
        if self.cb is not None and not self.cb_sets:
            raise ConfigError("[hydrogen] cb needs cb_sets naming the boundary node sets")
        if self.c0 < 0 or (self.cb is not None and self.cb < 0):
            raise ConfigError("concentrations must be non-negative")
        if self.output_every < 0:
            raise ConfigError("[output] every must be >= 0")
        try:
            mesh = self.build_mesh()
        except (MeshError, OSError) as exc:
            raise ConfigError(f"[mesh] {exc}") from None
        referenced = [(f"[dirichlet] set", bc.node_set) for bc in self.dirichlet]
        referenced += [(f"[neumann] set", nb.node_set) for nb in self.neumann]
        referenced += [("[hydrogen] cb_sets", name) for name in self.cb_sets]
        for where, name in referenced:
            if name not in mesh.node_sets:
                raise ConfigError(f"{where}: node set {name!r} is not defined on the mesh")
        if self.solver.equilibrium_hydrogen and not (
            any(bc.field == "c" for bc in self.dirichlet) or self.cb is not None
        ):
            raise ConfigError("equilibrium_hydrogen needs a concentration Dirichlet condition")


# --- parsing ------------------------------------------------------------------


def _split_sections(text: str):
    blocks: List[Tuple[str, int, Dict[str, Tuple[str, int]]]] = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {line!r}")
            name = line[1:-1].strip().lower()
            if name not in SECTIONS:
                raise ConfigError(f"line {lineno}: unknown section [{name}]")
            if name not in REPEATABLE and any(b[0] == name for b in blocks):
                raise ConfigError(f"line {lineno}: section [{name}] may appear only once")
            current = (name, lineno, {})
            blocks.append(current)
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside of a section")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        schema = SECTIONS[current[0]]
        if key not in schema:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{current[0]}]")
        if key in current[2]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{current[0]}]")
        current[2][key] = (value, lineno)
    return blocks


def _convert(section: str, items: Dict[str, Tuple[str, int]]) -> Dict[str, Any]:
    out = {}
    schema = SECTIONS[section]
    for key, (value, lineno) in items.items():
        try:
            out[key] = schema[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: [{section}] {key}: {exc}") from None
    return out


def _parse_bands(text: str, lineno: int) -> tuple:
    bands = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        try:
            vals = [float(v) for v in chunk.split()]
        except ValueError:
            raise ConfigError(f"line {lineno}: [mesh] bands: expected numbers") from None
        if len(vals) != 5:
            raise ConfigError(f"line {lineno}: [mesh] bands: each band needs 'x0 x1 y0 y1 h'")
        bands.append(RefinementBand(*vals))
    return tuple(bands)


def _parse_ramp(text: str, lineno: int) -> LoadProgram:
    times, values = [], []
    for knot in text.split(","):
        try:
            t, v = knot.split(":")
            times.append(float(t))
            values.append(float(v))
        except ValueError:
            raise ConfigError(f"line {lineno}: ramp knots must be 't:value' pairs separated by commas") from None
    try:
        return LoadProgram(tuple(times), tuple(values))
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: {exc}") from None


def parse_config_text(text: str, base_dir: Optional[Path] = None) -> ScenarioConfig:
    cfg = ScenarioConfig(base_dir=base_dir)
    material_overrides: Dict[str, float] = {}
    solver_kwargs: Dict[str, Any] = {}
    for section, header_line, items in _split_sections(text):
        vals = _convert(section, items)
        if section == "mesh":
            if "bands" in vals:
                vals["bands"] = _parse_bands(vals["bands"], items["bands"][1])
            if "element" in vals and vals["element"] not in ("quad4", "quad8"):
                raise ConfigError(f"line {items['element'][1]}: [mesh] element must be quad4 or quad8")
            cfg.mesh = MeshSpec(**vals)
            if cfg.mesh.type == "file" and not cfg.mesh.file:
                raise ConfigError(f"line {header_line}: [mesh] type = file needs a file key")
        elif section == "material":
            material_overrides.update(vals)
        elif section == "hydrogen":
            cfg.c0 = vals.get("c0", cfg.c0)
            cfg.cb = vals.get("cb", cfg.cb)
            cfg.cb_sets = vals.get("cb_sets", cfg.cb_sets)
        elif section == "dirichlet":
            cfg.dirichlet.append(_dirichlet_from(vals, items, header_line))
        elif section == "neumann":
            for req in ("set", "field", "value"):
                if req not in vals:
                    raise ConfigError(f"line {header_line}: [neumann] missing key {req!r}")
            fld = vals["field"]
            want = {"u": 2, "c": 1}.get(fld)
            if want is None:
                raise ConfigError(f"line {items['field'][1]}: [neumann] field must be u or c")
            if len(vals["value"]) != want:
                raise ConfigError(f"line {items['value'][1]}: [neumann] value needs {want} number(s) for field {fld}")
            cfg.neumann.append(NeumannBC(fld, vals["set"], vals["value"]))
        elif section == "defect":
            poly = vals.get("polygon", ())
            if len(poly) < 6 or len(poly) % 2:
                raise ConfigError(f"line {header_line}: [defect] polygon needs at least three x y pairs")
            pts = tuple(zip(poly[0::2], poly[1::2]))
            cfg.defects.append(Defect(pts, vals.get("name", ""), vals.get("hold_concentration", False)))
        elif section == "loads":
            bf = vals.get("body_force")
            if bf is not None and len(bf) != 2:
                raise ConfigError(f"line {items['body_force'][1]}: body_force needs two components")
            cfg.body_force = bf
        elif section == "solver":
            solver_kwargs.update(vals)
        elif section == "output":
            cfg.output_dir = vals.get("directory", cfg.output_dir)
            cfg.output_every = vals.get("every", cfg.output_every)
            cfg.output_times = vals.get("times", cfg.output_times)
            cfg.write_vtk = vals.get("vtk", cfg.write_vtk)
            cfg.write_figures = vals.get("figures", cfg.write_figures)
    try:
        cfg.material = MaterialParams(**material_overrides)
    except ParameterError as exc:
        raise ConfigError(f"[material] {exc}") from None
    try:
        cfg.solver = SolverSettings(**solver_kwargs)
    except ValueError as exc:
        raise ConfigError(f"[solver] {exc}") from None
    cfg.validate()
    return cfg


def _dirichlet_from(vals, items, header_line) -> DirichletBC:
    for req in ("set", "field"):
        if req not in vals:
            raise ConfigError(f"line {header_line}: [dirichlet] missing key {req!r}")
    fld = vals["field"]
    if fld not in ("u", "phi", "c"):
        raise ConfigError(f"line {items['field'][1]}: [dirichlet] field must be u, phi or c")
    comp = None
    if fld == "u":
        if "component" not in vals or vals["component"] not in COMPONENTS:
            raise ConfigError(f"line {header_line}: [dirichlet] displacement needs component = x or y")
        comp = COMPONENTS[vals["component"]]
    elif "component" in vals:
        raise ConfigError(f"line {items['component'][1]}: [dirichlet] component applies to field u only")
    given = [k for k in ("value", "rate", "ramp") if k in vals]
    if len(given) != 1:
        raise ConfigError(f"line {header_line}: [dirichlet] needs exactly one of value, rate or ramp")
    if "start" in vals and given[0] != "rate":
        raise ConfigError(f"line {items['start'][1]}: [dirichlet] start applies to rate programs only")
    if given[0] == "value":
        program = LoadProgram.constant(vals["value"])
    elif given[0] == "rate":
        program = LoadProgram.ramp(vals["rate"], vals.get("start", 0.0))
    else:
        program = _parse_ramp(vals["ramp"], items["ramp"][1])
    return DirichletBC(fld, vals["set"], program, comp)


def parse_config(path) -> ScenarioConfig:
    """Read, default and validate a scenario configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config_text(text, path.parent)


# --- resolved configuration -------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def resolved_config_text(cfg: ScenarioConfig) -> str:
    """Every setting of ``cfg`` with defaults made explicit."""
    out = ["# resolved scenario configuration", "[mesh]"]
    ms = cfg.mesh
    for f in dataclasses.fields(MeshSpec):
        v = getattr(ms, f.name)
        if f.name == "file" and v is None:
            continue
        if f.name == "bands":
            if v:
                out.append("bands = " + "; ".join(_fmt((b.x0, b.x1, b.y0, b.y1, b.h)) for b in v))
            continue
        out.append(f"{f.name} = {_fmt(v)}")
    out += ["", "[material]"]
    out += [f"{name} = {_fmt(getattr(cfg.material, name))}" for name in MaterialParams.field_names()]
    out += ["", "[hydrogen]", f"c0 = {_fmt(cfg.c0)}", f"cb = {_fmt(cfg.cb)}"]
    if cfg.cb_sets:
        out.append(f"cb_sets = {_fmt(cfg.cb_sets)}")
    for bc in cfg.dirichlet:
        out += ["", "[dirichlet]", f"set = {bc.node_set}", f"field = {bc.field}"]
        if bc.field == "u":
            out.append(f"component = {'xy'[bc.component]}")
        p = bc.program
        if p.rate is not None:
            out += [f"rate = {_fmt(p.rate)}", f"start = {_fmt(float(p.values[0]))}"]
        elif len(p.times) > 1:
            out.append("ramp = " + ", ".join(f"{t!r}:{v!r}" for t, v in zip(p.times, p.values)))
        else:
            out.append(f"value = {_fmt(float(p.values[0]))}")
    for nb in cfg.neumann:
        out += ["", "[neumann]", f"set = {nb.node_set}", f"field = {nb.field}", f"value = {_fmt(tuple(float(v) for v in nb.value))}"]
    for d in cfg.defects:
        out += ["", "[defect]"]
        if d.name:
            out.append(f"name = {d.name}")
        out.append("polygon = " + _fmt(tuple(float(c) for pt in d.polygon for c in pt)))
        out.append(f"hold_concentration = {_fmt(d.hold_concentration)}")
    if cfg.body_force is not None:
        out += ["", "[loads]", f"body_force = {_fmt(tuple(float(v) for v in cfg.body_force))}"]
    out += ["", "[solver]"]
    out += [f"{f.name} = {_fmt(getattr(cfg.solver, f.name))}" for f in dataclasses.fields(SolverSettings)]
    out += ["", "[output]", f"directory = {cfg.output_dir}", f"every = {cfg.output_every}"]
    if cfg.output_times:
        out.append(f"times = {_fmt(tuple(float(t) for t in cfg.output_times))}")
    out += [f"vtk = {_fmt(cfg.write_vtk)}", f"figures = {_fmt(cfg.write_figures)}"]
    return "\n".join(out) + "\n"


def write_resolved_config(path, cfg: ScenarioConfig) -> None:
    text = resolved_config_text(cfg)
    if cfg.mesh.type == "file" and cfg.base_dir is not None:
        # make the mesh path independent of where the echo is written
        mesh_path = Path(cfg.mesh.file)
        if not mesh_path.is_absolute():
            text = text.replace(f"file = {cfg.mesh.file}", f"file = {(cfg.base_dir / mesh_path).resolve()}")
    Path(path).write_text(text, encoding="utf-8")


# --- result writers -------------------------------------------------------------

_VTK_CELL = {"quad4": 9, "quad8": 23}
HISTORY_HEADER = "time,prescribed,reaction,max_phi,min_c,max_c,passes"


def write_vtk(path, mesh: Mesh, state: FieldState, title: str = "hydrocrack") -> None:
    """Legacy ASCII VTK unstructured grid with the nodal fields."""
    n = mesh.n_nodes
    arrays = {
        "phi": state.phase,
        "concentration": state.concentration,
        "sigma_h": state.sigma_h_nodal,
    }
    for name, a in arrays.items():
        if len(a) != n:
            raise ValueError(f"field {name} has {len(a)} values for {n} points")
    if len(state.displacement) != 2 * n:
        raise ValueError("displacement vector does not match the mesh")
    f = "%.9e"
    lines = [
        "# vtk DataFile Version 3.0",
        f"{title} time={state.time:.9e}",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {n} double",
    ]
    lines += [f"{f % x} {f % y} {f % 0.0}" for x, y in mesh.nodes]
    npe = mesh.nodes_per_element
    lines.append(f"CELLS {mesh.n_elements} {mesh.n_elements * (npe + 1)}")
    lines += [f"{npe} " + " ".join(map(str, row)) for row in mesh.elements.tolist()]
    lines.append(f"CELL_TYPES {mesh.n_elements}")
    lines += [str(_VTK_CELL[mesh.kind])] * mesh.n_elements
    lines.append(f"POINT_DATA {n}")
    lines.append("VECTORS displacement double")
    lines += [f"{f % ux} {f % uy} {f % 0.0}" for ux, uy in state.displacement.reshape(-1, 2)]
    for name, a in arrays.items():
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [f % v for v in a]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def write_history_csv(path, records: Sequence[IncrementRecord]) -> None:
    """One row per accepted increment."""
    f = "%.9e"
    lines = [HISTORY_HEADER]
    for r in records:
        lines.append(
            ",".join([f % r.time, f % r.prescribed, f % r.reaction, f % r.max_phi, f % r.min_c, f % r.max_c, str(int(r.passes))])
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_history_csv(path) -> np.ndarray:
    """Structured array of a history file written by :func:`write_history_csv`."""
    return np.genfromtxt(path, delimiter=",", names=True, ndmin=1)
