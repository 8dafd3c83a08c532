"""Figures written next to the CSV and VTK output of a run."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.tri import Triangulation  # noqa: E402

from .core import FieldState  # noqa: E402
from .mesh import Mesh  # noqa: E402
from .solver import IncrementRecord  # noqa: E402


def _triangulation(mesh: Mesh) -> Triangulation:
    corners = mesh.elements[:, :4]
    tris = np.vstack([corners[:, [0, 1, 2]], corners[:, [0, 2, 3]]])
    return Triangulation(mesh.nodes[:, 0], mesh.nodes[:, 1], tris)


def plot_load_displacement(path, curves: Dict[str, Sequence[IncrementRecord]], xlabel="prescribed displacement (mm)") -> None:
    """Reaction against the prescribed value, one line per labelled run."""
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    for label, records in curves.items():
        u = [r.prescribed for r in records]
        f = [r.reaction for r in records]
        ax.plot(u, f, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("reaction (N/mm)")
    if len(curves) > 1:
        ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_fields(path, mesh: Mesh, state: FieldState, fields: Sequence[str] = ("phi", "concentration", "sigma_h")) -> None:
    """Filled contours of nodal fields on the undeformed mesh."""
    data = {"phi": state.phase, "concentration": state.concentration, "sigma_h": state.sigma_h_nodal}
    tri = _triangulation(mesh)
    fig, axes = plt.subplots(1, len(fields), figsize=(4.2 * len(fields), 3.8), squeeze=False)
    for ax, name in zip(axes[0], fields):
        values = np.asarray(data[name], dtype=float)
        lo, hi = float(values.min()), float(values.max())
        levels = np.linspace(lo, hi if hi > lo else lo + 1.0, 21)
        cs = ax.tricontourf(tri, values, levels=levels, cmap="viridis")
        fig.colorbar(cs, ax=ax, shrink=0.8)
        ax.set_title(f"{name}, t = {state.time:.4g}")
        ax.set_aspect("equal")
        ax.set_xticks([])
        ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_homogeneous(path, strain, stress, reference=None) -> None:
    """Computed homogeneous stress-strain curve against the closed form."""
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    if reference is not None:
        ax.plot(strain, reference, "k-", lw=1, label="closed form")
    ax.plot(strain, stress, "o", ms=2, label="finite elements")
    ax.set_xlabel("strain")
    ax.set_ylabel("stress (MPa)")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_run_figures(directory, mesh: Mesh, records: Sequence[IncrementRecord], state: FieldState) -> list[Path]:
    directory = Path(directory)
    out = [directory / "load_displacement.png", directory / "fields_final.png"]
    plot_load_displacement(out[0], {"run": records})
    plot_fields(out[1], mesh, state)
    return out
