"""Staggered time integration of the coupled deformation, fracture and
hydrogen transport problem.

Each increment runs one or more passes of

    displacement -> history + phase field -> hydrostatic stress + concentration

with the hydrogen coverage entering Gc lagged by one stage.  Transport is
integrated with backward Euler, or replaced by the steady solve when the
quasi-static hydrogen-equilibrium mode is on.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import assembly, physics
from .core import FieldState, MaterialParams
from .mesh import Mesh, geometry, in_polygon

log = logging.getLogger(__name__)

FIELDS = ("u", "phi", "c")


class SolverError(RuntimeError):
    """Unrecoverable failure of a run."""


class ConvergenceError(RuntimeError):
    """A sub-problem failed; the increment may be retried with a smaller step."""


# --- linear algebra -------------------------------------------------------------


def solve_linear(matrix, rhs, rtol: float = 1e-10) -> np.ndarray:
    """Direct sparse solve with an enforced relative residual check.

    ``matrix`` may also be a :class:`~hydrocrack.assembly.SparseSystem`, in
    which case Dirichlet values are eliminated and the full solution vector
    is returned.
    """
    if isinstance(matrix, assembly.SparseSystem):
        system = matrix
        A, b, _ = system.reduced()
        if A.shape[0] == 0:
            return system.expand(np.zeros(0))
        return system.expand(solve_linear(A, b, rtol))
    A = sp.csc_matrix(matrix)
    b = np.asarray(rhs, dtype=float)
    if A.shape[0] == 0:
        return np.zeros(0)
    try:
        lu = spla.splu(A, permc_spec="COLAMD")
    except RuntimeError as exc:
        raise ConvergenceError(f"sparse factorisation failed: {exc}") from None
    x = lu.solve(b)
    diag = np.abs(lu.U.diagonal())
    if not np.all(np.isfinite(x)):
        raise ConvergenceError(
            f"non-finite solution; smallest pivot {diag.min():.3e}, largest {diag.max():.3e}"
        )
    bnorm = np.linalg.norm(b)
    res = np.linalg.norm(A @ x - b)
    if bnorm > 0 and res > rtol * bnorm:
        # one step of iterative refinement before giving up
        x += lu.solve(b - A @ x)
        res = np.linalg.norm(A @ x - b)
        if res > rtol * bnorm:
            raise ConvergenceError(
                f"linear residual {res / bnorm:.3e} exceeds {rtol:.0e}; "
                f"pivot range [{diag.min():.3e}, {diag.max():.3e}]"
            )
    return x


# --- problem definition ----------------------------------------------------------


@dataclass(frozen=True)
class LoadProgram:
    """Piecewise-linear boundary value in time, or a constant rate."""

    times: tuple = (0.0,)
    values: tuple = (0.0,)
    rate: Optional[float] = None

    def __post_init__(self):
        if len(self.times) != len(self.values) or not self.times:
            raise ValueError("load program needs matching, non-empty time and value knots")
        if any(b < a for a, b in zip(self.times[:-1], self.times[1:])):
            raise ValueError("load program time knots must be non-decreasing")

    @classmethod
    def constant(cls, value: float) -> "LoadProgram":
        return cls((0.0,), (float(value),))

    @classmethod
    def ramp(cls, rate: float, start: float = 0.0) -> "LoadProgram":
        return cls((0.0,), (float(start),), float(rate))

    @property
    def is_program(self) -> bool:
        """True for rate and multi-knot programs (a loading program)."""
        return self.rate is not None or len(self.times) > 1

    def value(self, t: float) -> float:
        if self.rate is not None:
            return self.values[0] + self.rate * t
        return float(np.interp(t, self.times, self.values))


@dataclass(frozen=True)
class DirichletBC:
    field: str  # "u", "phi" or "c"
    node_set: str
    program: LoadProgram
    component: Optional[int] = None  # 0 (x) or 1 (y) for displacements

    def __post_init__(self):
        if self.field not in FIELDS:
            raise ValueError(f"unknown field {self.field!r}")
        if self.field == "u" and self.component not in (0, 1):
            raise ValueError("displacement conditions need component 0 (x) or 1 (y)")


@dataclass(frozen=True)
class NeumannBC:
    field: str  # "u" (traction vector) or "c" (outward flux)
    node_set: str
    value: tuple


@dataclass(frozen=True)
class Defect:
    """Initial flaw seeded through the history field."""

    polygon: tuple  # ((x, y), ...)
    name: str = ""
    hold_concentration: bool = False


@dataclass
class SolverSettings:
    dt: float = 1.0
    t_end: float = 1.0
    staggered_passes: int = 1
    staggered_tol: float = 1e-6
    newton_tol: float = 1e-8
    max_newton_iters: int = 10
    dt_cut_factor: float = 0.5
    max_cuts: int = 6
    max_phase_increment: Optional[float] = None
    dt_min: float = 0.0
    equilibrium_hydrogen: bool = False
    sigma_h_degraded: bool = False
    stop_reaction_fraction: Optional[float] = None

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.staggered_passes < 1:
            raise ValueError("staggered_passes must be >= 1")
        for name in ("staggered_tol", "newton_tol", "dt_cut_factor"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.max_cuts < 0 or self.max_newton_iters < 1:
            raise ValueError("max_cuts must be >= 0 and max_newton_iters >= 1")


@dataclass
class IncrementRecord:
    time: float
    prescribed: float
    reaction: float
    max_phi: float
    min_c: float
    max_c: float
    passes: int


@dataclass
class RunResult:
    state: FieldState
    records: List[IncrementRecord]
    snapshots: List[tuple]  # (increment index, FieldState)

    def __iter__(self):
        return iter((self.state, self.records, self.snapshots))


def _rel_change(new, old) -> float:
    d = np.linalg.norm(new - old)
    s = max(np.linalg.norm(new), np.linalg.norm(old))
    return 0.0 if s == 0 else d / s


class StaggeredSolver:
    """Coupled displacement / phase-field / hydrogen solver on one mesh."""

    def __init__(
        self,
        mesh: Mesh,
        params: MaterialParams,
        dirichlet: Sequence[DirichletBC] = (),
        neumann: Sequence[NeumannBC] = (),
        settings: Optional[SolverSettings] = None,
        body_force=None,
        defects: Sequence[Defect] = (),
        c_boundary: Optional[float] = None,
    ):
        self.mesh = mesh
        self.params = params
        self.settings = settings or SolverSettings()
        self.dirichlet = list(dirichlet)
        self.neumann = list(neumann)
        self.defects = list(defects)
        self.geo = geometry(mesh)
        for bc in self.dirichlet:
            mesh.node_set(bc.node_set)
        self._f_ext = np.zeros(2 * mesh.n_nodes)
        self._flux = np.zeros(mesh.n_nodes)
        for nb in self.neumann:
            if nb.field == "u":
                self._f_ext += assembly.apply_neumann(mesh, nb.node_set, nb.value, "u")
            elif nb.field == "c":
                self._flux += assembly.apply_neumann(mesh, nb.node_set, nb.value[0], "c", params)
            else:
                raise ValueError(f"Neumann data not supported for field {nb.field!r}")
        if body_force is not None:
            self._f_ext += assembly.body_force_vector(mesh, body_force)
        # nodes inside defects that hold the environmental concentration
        self._held_nodes = np.zeros(0, dtype=np.int64)
        held = [d for d in self.defects if d.hold_concentration]
        if held:
            if c_boundary is None:
                raise ValueError("defects holding the concentration need a boundary concentration")
            mask = np.zeros(mesh.n_nodes, dtype=bool)
            for d in held:
                mask |= in_polygon(mesh.nodes, np.asarray(d.polygon))
            self._held_nodes = np.where(mask)[0]
        self.c_boundary = c_boundary
        if self.settings.equilibrium_hydrogen and not self._has_dirichlet("c"):
            raise ValueError("the hydrogen-equilibrium mode needs at least one concentration Dirichlet condition")
        loading = [bc for bc in self.dirichlet if bc.program.is_program]
        self.loading = loading[0] if loading else None
        # relative field change of every pass of the latest increment
        self.pass_changes: List[float] = []

    # -- boundary data ------------------------------------------------------

    def _has_dirichlet(self, fld: str) -> bool:
        return any(bc.field == fld for bc in self.dirichlet) or (fld == "c" and self._held_nodes.size > 0)

    def dirichlet_data(self, fld: str, t: float):
        dofs, vals = [], []
        for bc in self.dirichlet:
            if bc.field != fld:
                continue
            nodes = self.mesh.node_set(bc.node_set)
            d = 2 * nodes + bc.component if fld == "u" else nodes
            dofs.append(d)
            vals.append(np.full(len(d), bc.program.value(t)))
        if fld == "c" and self._held_nodes.size:
            dofs.append(self._held_nodes)
            vals.append(np.full(len(self._held_nodes), float(self.c_boundary)))
        if not dofs:
            return np.zeros(0, dtype=np.int64), np.zeros(0)
        return assembly.normalize_dirichlet((np.concatenate(dofs), np.concatenate(vals)), assembly.n_dofs(self.mesh, fld))

    # -- state --------------------------------------------------------------

    def initial_state(self, c0: float = 0.0) -> FieldState:
        """Uniform concentration, seeded defects and the matching phase field."""
        mesh = self.mesh
        state = FieldState.zeros(mesh.n_nodes, mesh.n_elements, self.geo.n_gauss, c0)
        dofs, vals = self.dirichlet_data("c", 0.0)
        state.concentration[dofs] = vals
        dofs, vals = self.dirichlet_data("u", 0.0)
        state.displacement[dofs] = vals
        if self.defects:
            seed = 1e3 * self.params.gc0 / self.params.length_scale
            pts = self.geo.xg.reshape(-1, 2)
            for d in self.defects:
                inside = in_polygon(pts, np.asarray(d.polygon)).reshape(state.history.shape)
                state.history[inside] = np.maximum(state.history[inside], seed)
            state.phase = self.solve_phase(state.phase, state.history, state.concentration, 0.0)
        return state

    # -- sub-problems -------------------------------------------------------

    def solve_displacement(self, phi, t: float) -> np.ndarray:
        A, _ = assembly.assemble_displacement(self.mesh, phi, self.params)
        dofs, vals = self.dirichlet_data("u", t)
        system = assembly.SparseSystem(A, self._f_ext.copy(), assembly.element_dofs(self.mesh, "u"), dofs, vals)
        return solve_linear(system, None)

    def gauss_gc(self, concentration) -> np.ndarray:
        theta = assembly.gauss_coverage(self.mesh, concentration, self.params)
        p = self.params
        return physics.gc_degraded(theta, p.gc0, p.damage_coeff, p.gc_floor_fraction)

    def solve_phase(self, phi, history, concentration, t: float) -> np.ndarray:
        """Newton iterations on the phase-field residual; result clamped to [0, 1]."""
        s = self.settings
        gc = self.gauss_gc(concentration)
        dofs, vals = self.dirichlet_data("phi", t)
        phi = np.array(phi, dtype=float)
        phi[dofs] = vals
        A, r = assembly.assemble_phase(self.mesh, phi, history, gc, self.params.length_scale)
        free = np.ones(self.mesh.n_nodes, dtype=bool)
        free[dofs] = False
        Aff = A[free][:, free].tocsc()
        ref = np.linalg.norm(r[free])
        if ref == 0.0:
            return np.clip(phi, 0.0, 1.0)
        for _ in range(s.max_newton_iters):
            delta = solve_linear(Aff, -r[free])
            phi[free] += delta
            # residual is affine in phi for frozen H and Gc
            r[free] += Aff @ delta
            if np.linalg.norm(r[free]) <= s.newton_tol * ref:
                break
        else:
            raise ConvergenceError(
                f"phase-field Newton did not converge in {s.max_newton_iters} iterations "
                f"(relative residual {np.linalg.norm(r[free]) / ref:.3e})"
            )
        lo, hi = float(phi.min()), float(phi.max())
        if lo < -1e-8 or hi > 1 + 1e-8:
            log.debug("phase field outside [0, 1] before clamping: [%.3e, %.6f]", lo, hi)
        self._raw_phase_range = (lo, hi)
        return np.clip(phi, 0.0, 1.0)

    def recover_sigma_h(self, u, phi) -> np.ndarray:
        return assembly.recover_sigma_h(self.mesh, u, phi, self.params, self.settings.sigma_h_degraded)

    def solve_concentration(self, sigma_h, c_old, dt: float, t: float) -> np.ndarray:
        if dt <= 0:
            raise ValueError("time step must be positive")
        eq = self.settings.equilibrium_hydrogen
        Kc, M = assembly.assemble_diffusion(self.mesh, sigma_h, self.params, with_capacity=not eq)
        b = self._flux.copy()
        if eq:
            A = Kc
        else:
            A = Kc + M / dt
            b += (M @ c_old) / dt
        dofs, vals = self.dirichlet_data("c", t)
        system = assembly.SparseSystem(A.tocsr(), b, self.mesh.elements, dofs, vals)
        return solve_linear(system, None)

    # -- increments ---------------------------------------------------------

    def staggered_increment(self, state: FieldState, dt: float):
        """Advance ``state`` by ``dt``; returns ``(new_state, passes_used)``."""
        if dt <= 0:
            raise ValueError("time step must be positive")
        s = self.settings
        t = state.time + dt
        u, phi, c = state.displacement, state.phase, state.concentration
        history = state.history
        sigma_h = state.sigma_h_nodal
        self._raw_phase_range = None
        self.pass_changes = []
        passes = 0
        for passes in range(1, s.staggered_passes + 1):
            u_new = self.solve_displacement(phi, t)
            history = np.maximum(state.history, assembly.gauss_psi0(self.mesh, u_new, self.params))
            phi_new = self.solve_phase(phi, history, c, t)
            sigma_h = self.recover_sigma_h(u_new, phi_new)
            c_new = self.solve_concentration(sigma_h, state.concentration, dt, t)
            change = max(_rel_change(u_new, u), _rel_change(phi_new, phi), _rel_change(c_new, c))
            self.pass_changes.append(change)
            u, phi, c = u_new, phi_new, c_new
            if passes > 1 and change < s.staggered_tol:
                break
        cmax = float(np.max(np.abs(c))) if c.size else 0.0
        cmin = float(c.min()) if c.size else 0.0
        if cmin < 0:
            log.info("concentration undershoot %.3e at t=%.6g", cmin, t)
            if cmin < -1e-3 * cmax:
                raise SolverError(
                    f"concentration undershoot {cmin:.3e} below -1e-3 * max(C) = {-1e-3 * cmax:.3e} at t={t:.6g}"
                )
        new = FieldState(u, phi, c, history, sigma_h, t, self._raw_phase_range)
        return new, passes

    # -- post-processing ----------------------------------------------------

    def reaction_force(self, state: FieldState, node_set: str, component: int) -> float:
        """Sum of internal nodal forces over a constrained node set."""
        nodes = self.mesh.node_set(node_set)
        set_dofs = 2 * nodes + component
        dofs, _ = self.dirichlet_data("u", state.time)
        if not np.isin(set_dofs, dofs).any():
            raise ValueError(f"node set {node_set!r} carries no constrained displacement dofs in direction {component}")
        f = assembly.internal_force(self.mesh, state.displacement, state.phase, self.params)
        return float(np.sum(f[set_dofs]))

    def record(self, state: FieldState, passes: int) -> IncrementRecord:
        if self.loading is not None and self.loading.field == "u":
            prescribed = self.loading.program.value(state.time)
            reaction = self.reaction_force(state, self.loading.node_set, self.loading.component)
        elif self.loading is not None:
            prescribed = self.loading.program.value(state.time)
            reaction = 0.0
        else:
            prescribed = reaction = 0.0
        c = state.concentration
        return IncrementRecord(
            time=state.time,
            prescribed=prescribed,
            reaction=reaction,
            max_phi=float(state.phase.max()),
            min_c=float(c.min()),
            max_c=float(c.max()),
            passes=passes,
        )

    def run(
        self,
        state: Optional[FieldState] = None,
        c0: float = 0.0,
        snapshot_every: int = 0,
        snapshot_times: Sequence[float] = (),
        on_increment: Optional[Callable[[int, FieldState, IncrementRecord], None]] = None,
    ) -> RunResult:
        s = self.settings
        if state is None:
            state = self.initial_state(c0)
        records: List[IncrementRecord] = []
        snapshots: List[tuple] = [(0, state.copy())]
        pending_times = sorted(snapshot_times)
        dt = s.dt
        peak = 0.0
        n = 0
        eps_t = 1e-12 * max(1.0, s.t_end)
        while state.time < s.t_end - eps_t:
            step = min(dt, s.t_end - state.time)
            cuts = 0
            while True:
                try:
                    new, passes = self.staggered_increment(state, step)
                except ConvergenceError as exc:
                    if cuts >= s.max_cuts:
                        raise SolverError(
                            f"increment {n + 1} at t={state.time + step:.6g} failed after {cuts} cuts: {exc}"
                        ) from None
                    cuts += 1
                    step *= s.dt_cut_factor
                    log.info("cutting time step to %.3e: %s", step, exc)
                    continue
                jump = float(np.max(np.abs(new.phase - state.phase)))
                if (
                    s.max_phase_increment is not None
                    and jump > s.max_phase_increment
                    and cuts < s.max_cuts
                    and step * s.dt_cut_factor >= s.dt_min
                ):
                    cuts += 1
                    step *= s.dt_cut_factor
                    continue
                break
            n += 1
            rec = self.record(new, passes)
            records.append(rec)
            state = new
            if on_increment is not None:
                on_increment(n, state, rec)
            take = snapshot_every > 0 and n % snapshot_every == 0
            while pending_times and state.time >= pending_times[0] - eps_t:
                pending_times.pop(0)
                take = True
            if take:
                snapshots.append((n, state.copy()))
            # step size control: recover towards the nominal step after easy increments
            if cuts == 0 and (s.max_phase_increment is None or jump < 0.5 * s.max_phase_increment):
                dt = min(s.dt, step / s.dt_cut_factor)
            else:
                dt = step
            peak = max(peak, abs(rec.reaction))
            if s.stop_reaction_fraction is not None and peak > 0 and abs(rec.reaction) < s.stop_reaction_fraction * peak:
                log.info("stopping: reaction dropped below %.2f of the peak", s.stop_reaction_fraction)
                break
        if not snapshots or snapshots[-1][0] != n:
            snapshots.append((n, state.copy()))
        return RunResult(state, records, snapshots)


def reaction_force(solver: StaggeredSolver, state: FieldState, node_set: str, component: int = 1) -> float:
    return solver.reaction_force(state, node_set, component)


def staggered_increment(solver: StaggeredSolver, state: FieldState, dt: float):
    return solver.staggered_increment(state, dt)


def build_solver(config) -> StaggeredSolver:
    """Instantiate a solver from a :class:`~hydrocrack.config.ScenarioConfig`."""
    mesh = config.build_mesh()
    dirichlet = list(config.dirichlet)
    if config.cb is not None:
        for name in config.cb_sets:
            dirichlet.append(DirichletBC("c", name, LoadProgram.constant(config.cb)))
    return StaggeredSolver(
        mesh,
        config.material,
        dirichlet,
        config.neumann,
        config.solver,
        body_force=config.body_force,
        defects=config.defects,
        c_boundary=config.cb,
    )


def run_scenario(config, on_increment=None) -> RunResult:
    """Run a scenario end to end; returns (final state, records, snapshots)."""
    solver = build_solver(config)
    return solver.run(
        c0=config.c0,
        snapshot_every=config.output_every,
        snapshot_times=config.output_times,
        on_increment=on_increment,
    )
