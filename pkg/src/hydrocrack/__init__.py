"""Plane-strain phase-field fracture with hydrogen-degraded toughness and
stress-assisted hydrogen diffusion."""

from .core import FieldState, MaterialParams, ParameterError, default_iron_params
from .mesh import Mesh, generate_notched_plate_mesh, generate_rect_mesh, read_mesh, write_mesh
from .solver import (
    Defect,
    DirichletBC,
    LoadProgram,
    NeumannBC,
    SolverError,
    SolverSettings,
    StaggeredSolver,
    run_scenario,
)

__all__ = [
    "Defect",
    "DirichletBC",
    "FieldState",
    "LoadProgram",
    "MaterialParams",
    "Mesh",
    "NeumannBC",
    "ParameterError",
    "SolverError",
    "SolverSettings",
    "StaggeredSolver",
    "default_iron_params",
    "generate_notched_plate_mesh",
    "generate_rect_mesh",
    "read_mesh",
    "run_scenario",
    "write_mesh",
]
