"""Reduced-resolution benchmark scenarios and their post-processing.

Two scenarios are provided as :class:`~hydrocrack.config.ScenarioConfig`
builders, so the same definitions drive the acceptance tests, the example
configuration files and the command line:

* a square plate with a horizontal edge slit pulled in tension, with the
  hydrogen content fixed on every boundary;
* a plate with three seeded pit defects stretched laterally while the pits
  and the gripped sides are held at a constant hydrogen content.

The helpers below reduce a run to the quantities the tests assert on: peak
load, crack path, initiation order and connectivity of the broken zone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .config import MeshSpec, ScenarioConfig
from .core import FieldState, default_iron_params
from .mesh import Mesh, RefinementBand, in_polygon
from .solver import Defect, DirichletBC, IncrementRecord, LoadProgram, SolverSettings

PLATE_RATE = 1e-3  # mm/s at the top edge; time is a load parameter here
PLATE_SETS = ("left", "right", "top", "bottom", "crack_upper", "crack_lower")


def plate_config(
    concentration: float = 0.0,
    du: float = 2e-5,
    u_end: float = 8e-3,
    staggered_passes: int = 15,
    stop_fraction: Optional[float] = 0.8,
    h_fine: float = 0.001,
) -> ScenarioConfig:
    """Edge-slit plate in tension with ``C0 = Cb = concentration`` (wt ppm).

    The slit faces and the outer edges are held at the boundary content and
    hydrogen is taken to be in equilibrium with the current stress state.
    The run stops once the reaction has dropped to ``stop_fraction`` of its
    peak, which is well into the softening branch.
    """
    dirichlet = [
        DirichletBC("u", "bottom", LoadProgram.constant(0.0), 0),
        DirichletBC("u", "bottom", LoadProgram.constant(0.0), 1),
        DirichletBC("u", "top", LoadProgram.ramp(PLATE_RATE), 1),
    ]
    settings = SolverSettings(
        dt=du / PLATE_RATE,
        t_end=u_end / PLATE_RATE,
        staggered_passes=staggered_passes,
        staggered_tol=1e-4,
        max_cuts=8,
        max_phase_increment=0.2,
        dt_min=du / PLATE_RATE / 8,
        equilibrium_hydrogen=True,
        sigma_h_degraded=True,
        stop_reaction_fraction=stop_fraction,
    )
    return ScenarioConfig(
        mesh=MeshSpec(type="notched_plate", h_fine=h_fine, growth=1.35),
        material=default_iron_params(),
        dirichlet=dirichlet,
        c0=concentration,
        cb=concentration,
        cb_sets=PLATE_SETS,
        solver=settings,
        output_dir=f"plate_{concentration:g}ppm",
        output_every=50,
    )


# --- pit coalescence ------------------------------------------------------------


def _arc(cx, cy, rx, ry, a0, a1, n):
    return [(cx + rx * math.cos(a), cy + ry * math.sin(a)) for a in np.linspace(a0, a1, n)]


def _rounded(points) -> tuple:
    return tuple((round(x, 6), round(y, 6)) for x, y in points)


PIT_WIDTH = 12.0
PIT_HEIGHT = 8.0
PIT_RATE = 4.16e-5  # mm/s lateral stretching of the right grip


def pit_defects() -> List[Defect]:
    """Large edge pit (bottom), central hole and small edge pit (top).

    The defects sit on the vertical line ``x = 6`` so that cracks running
    across the stretching direction link them.  The bottom pit is the
    deepest, which makes it the strongest stress raiser.
    """
    cx = PIT_WIDTH / 2
    large = _arc(cx, 0.0, 0.8, 1.5, 0.0, math.pi, 13)
    hole = _arc(cx, PIT_HEIGHT / 2, 0.5, 0.5, 0.0, 2 * math.pi, 25)[:-1]
    small = _arc(cx, PIT_HEIGHT, 0.4, 0.5, math.pi, 2 * math.pi, 9)
    return [
        Defect(_rounded(large), "large_pit", hold_concentration=True),
        Defect(_rounded(hole), "hole", hold_concentration=True),
        Defect(_rounded(small), "small_pit", hold_concentration=True),
    ]


def pit_config(dt: float = 10.0, t_end: float = 1500.0, h_band: float = 0.1, coarse: float = 0.5) -> ScenarioConfig:
    """Plate with three seeded defects under lateral stretching.

    The material is a duplex-type steel (E = 200 GPa, Gc = 90 N/mm,
    length scale 0.6 mm, D = 1e-8 mm^2/s) charged with 1 wt ppm that is
    kept constant at both grips and inside the pits.
    """
    params = default_iron_params().with_overrides(
        young_modulus=200000.0, gc0=90.0, length_scale=0.6, diffusivity=1e-8
    )
    cx = PIT_WIDTH / 2
    band = RefinementBand(cx - 1.5, cx + 1.5, 0.0, PIT_HEIGHT, h_band)
    dirichlet = [
        DirichletBC("u", "left", LoadProgram.constant(0.0), 0),
        DirichletBC("u", "left", LoadProgram.constant(0.0), 1),
        DirichletBC("u", "right", LoadProgram.ramp(PIT_RATE), 0),
        DirichletBC("u", "right", LoadProgram.constant(0.0), 1),
    ]
    settings = SolverSettings(dt=dt, t_end=t_end, max_cuts=8, max_phase_increment=0.2, sigma_h_degraded=True)
    return ScenarioConfig(
        mesh=MeshSpec(
            type="rect",
            width=PIT_WIDTH,
            height=PIT_HEIGHT,
            nx=int(round(PIT_WIDTH / coarse)),
            ny=int(round(PIT_HEIGHT / coarse)),
            bands=(band,),
        ),
        material=params,
        dirichlet=dirichlet,
        defects=pit_defects(),
        c0=1.0,
        cb=1.0,
        cb_sets=("left", "right"),
        solver=settings,
        output_dir="pits",
        output_every=50,
    )


# --- post-processing -------------------------------------------------------------


def peak_load(records: Sequence[IncrementRecord]):
    """(reaction, prescribed value, index) at the largest reaction."""
    r = np.array([rec.reaction for rec in records])
    i = int(np.argmax(r))
    return float(r[i]), float(records[i].prescribed), i


def count_peaks(values, prominence: float = 0.02) -> int:
    """Local maxima whose drop on both sides exceeds ``prominence * max``."""
    from scipy.signal import find_peaks

    v = np.asarray(values, dtype=float)
    padded = np.concatenate([[v.min()], v, [v.min()]])
    peaks, _ = find_peaks(padded, prominence=prominence * np.abs(v).max())
    return len(peaks)


def node_graph(mesh: Mesh):
    """Sparse symmetric node adjacency through element edges."""
    corners = mesh.elements[:, :4]
    a = corners.ravel()
    b = np.roll(corners, -1, axis=1).ravel()
    n = mesh.n_nodes
    g = coo_matrix((np.ones(2 * len(a)), (np.concatenate([a, b]), np.concatenate([b, a]))), shape=(n, n))
    return g.tocsr()


def broken_components(mesh: Mesh, phase, threshold: float = 0.9):
    """Label connected regions of nodes with ``phase >= threshold``.

    Returns an integer label per node, ``-1`` for intact nodes.
    """
    broken = np.asarray(phase) >= threshold
    g = node_graph(mesh)
    idx = np.flatnonzero(broken)
    sub = g[idx][:, idx]
    _, lab = connected_components(sub, directed=False)
    labels = np.full(mesh.n_nodes, -1)
    labels[idx] = lab
    return labels


def defects_connected(mesh: Mesh, phase, defects: Sequence[Defect], threshold: float = 0.9) -> bool:
    """True when one broken region touches every defect."""
    labels = broken_components(mesh, phase, threshold)
    sets = []
    for d in defects:
        inside = in_polygon(mesh.nodes, np.asarray(d.polygon))
        lab = set(labels[inside & (labels >= 0)].tolist())
        sets.append(lab)
    common = set.intersection(*sets) if sets else set()
    return bool(common)


def _segment_distance(points, polygon) -> np.ndarray:
    poly = np.asarray(polygon, dtype=float)
    a = poly
    b = np.roll(poly, -1, axis=0)
    d = np.full(len(points), np.inf)
    for p0, p1 in zip(a, b):
        seg = p1 - p0
        t = np.clip(((points - p0) @ seg) / max(seg @ seg, 1e-300), 0.0, 1.0)
        proj = p0 + t[:, None] * seg
        d = np.minimum(d, np.linalg.norm(points - proj, axis=1))
    return d


@dataclass
class DamageOnset:
    """Tracks damage in a shell just outside every defect.

    A node belongs to the defect it is nearest to.  The shell of a defect
    holds its nodes at distance ``offset`` to ``offset + width`` from the
    polygon, outside the seeded region, so the shell value (largest phase
    field in the shell) rises only when damage grows out of that defect.
    """

    mesh: Mesh
    defects: Sequence[Defect]
    offset: float
    width: float

    def __post_init__(self):
        pts = self.mesh.nodes
        dist = []
        for d in self.defects:
            poly = np.asarray(d.polygon)
            di = _segment_distance(pts, poly)
            di[in_polygon(pts, poly)] = 0.0
            dist.append(di)
        self.distance = np.array(dist)
        self.owner = np.argmin(self.distance, axis=0)
        self.shells = [
            (self.owner == i) & (self.distance[i] >= self.offset) & (self.distance[i] <= self.offset + self.width)
            for i in range(len(self.defects))
        ]
        self.times: List[float] = []
        self.values: List[np.ndarray] = []

    def measure(self, phase) -> np.ndarray:
        phase = np.asarray(phase)
        return np.array([phase[s].max() if s.any() else 0.0 for s in self.shells])

    def __call__(self, n: int, state: FieldState, rec: IncrementRecord) -> None:
        self.times.append(state.time)
        self.values.append(self.measure(state.phase))

    def onset_times(self, threshold: float = 0.95) -> Dict[str, float]:
        """First time each shell value reaches ``threshold`` (inf if never)."""
        v = np.array(self.values).reshape(len(self.times), len(self.defects))
        out = {}
        for i, d in enumerate(self.defects):
            hit = np.flatnonzero(v[:, i] >= threshold)
            out[d.name] = float(self.times[hit[0]]) if len(hit) else math.inf
        return out


def with_solver(cfg: ScenarioConfig, **settings) -> ScenarioConfig:
    """Copy of a configuration with some solver settings replaced."""
    return replace(cfg, solver=replace(cfg.solver, **settings), _mesh_cache=None)


@dataclass
class RunMonitor:
    """Per-increment bookkeeping for the irreversibility and accumulation checks.

    Records whether the history field and the maximum phase field ever
    decreased, and optionally the largest concentration within ``radius``
    of ``center`` (the notch tip of the plate).
    """

    mesh: Mesh
    center: Optional[tuple] = None
    radius: float = 0.0

    def __post_init__(self):
        self.times: List[float] = []
        self.max_phi: List[float] = []
        self.region_max_c: List[float] = []
        self.history_decreases = 0
        self._last_history = None
        if self.center is not None:
            d = np.hypot(self.mesh.nodes[:, 0] - self.center[0], self.mesh.nodes[:, 1] - self.center[1])
            self._region = d <= self.radius
        else:
            self._region = None

    def __call__(self, n: int, state: FieldState, rec: IncrementRecord) -> None:
        self.times.append(state.time)
        self.max_phi.append(float(state.phase.max()))
        if self._last_history is not None and np.any(state.history < self._last_history):
            self.history_decreases += 1
        self._last_history = state.history.copy()
        if self._region is not None:
            self.region_max_c.append(float(state.concentration[self._region].max()))

    @property
    def max_phi_monotone(self) -> bool:
        return bool(np.all(np.diff(self.max_phi) >= 0.0))

    @property
    def irreversible(self) -> bool:
        return self.history_decreases == 0 and self.max_phi_monotone


def chain(*callbacks):
    """Combine several ``on_increment`` callbacks into one."""

    def call(n, state, rec):
        for cb in callbacks:
            cb(n, state, rec)

    return call


def crack_band(mesh: Mesh, phase, threshold: float = 0.95, x_min: float = -math.inf):
    """(x extent, y spread) of broken nodes with ``x > x_min``."""
    sel = (np.asarray(phase) >= threshold) & (mesh.nodes[:, 0] > x_min)
    if not sel.any():
        return 0.0, 0.0
    x, y = mesh.nodes[sel].T
    return float(x.max() - x.min()), float(y.max() - y.min())
