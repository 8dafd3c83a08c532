"""Command-line entry points.

Exit codes: 0 success, 1 failed verification, 2 solver failure,
64 usage error, 65 invalid configuration.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import physics
from .config import ConfigError, parse_config, write_history_csv, write_resolved_config, write_vtk
from .core import default_iron_params
from .mesh import MeshError, geometry, read_mesh
from .solver import SolverError, build_solver

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_SOLVER = 2
EXIT_USAGE = 64
EXIT_CONFIG = 65

log = logging.getLogger("hydrocrack")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hydrocrack", description="Phase-field hydrogen-assisted cracking solver.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("run", help="run a scenario configuration")
    p.add_argument("config", type=Path)
    p.add_argument("--output", type=Path, help="override the output directory")

    p = sub.add_parser("verify", help="run the analytical verification suite")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--output", type=Path, help="directory for verify.txt and verify.csv")

    p = sub.add_parser("mesh-info", help="summarize a mesh file")
    p.add_argument("mesh", type=Path)
    p.add_argument("--length-scale", type=float, default=default_iron_params().length_scale, help="phase-field length scale (mm)")
    p.add_argument(
        "--region",
        type=float,
        nargs=4,
        metavar=("X0", "X1", "Y0", "Y1"),
        help="refinement region checked against the element-size bound (default: whole mesh)",
    )

    d = default_iron_params()
    p = sub.add_parser("homog", help="homogeneous one-dimensional solution as CSV")
    p.add_argument("--young-modulus", type=float, default=d.young_modulus)
    p.add_argument("--gc", type=float, default=d.gc0)
    p.add_argument("--length-scale", type=float, default=d.length_scale)
    p.add_argument("--concentration", type=float, default=0.0, help="hydrogen content in wt ppm")
    p.add_argument("--samples", type=int, default=41)
    p.add_argument("--max-strain", type=float, default=3.0, help="largest strain as a multiple of the critical strain")
    return parser


def cmd_run(args) -> int:
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.output if args.output is not None else (cfg.base_dir or Path.cwd()) / cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_resolved_config(out / "resolved.cfg", cfg)
    try:
        solver = build_solver(cfg)
    except (ValueError, MeshError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    mesh = solver.mesh
    records = []
    written = set()

    def snapshot(n, state):
        if cfg.write_vtk and n not in written:
            write_vtk(out / f"snapshot_{n:05d}.vtk", mesh, state)
            written.add(n)

    def on_increment(n, state, rec):
        records.append(rec)
        log.info("increment %d t=%.6g reaction=%.6g max_phi=%.4f", n, rec.time, rec.reaction, rec.max_phi)

    try:
        result = solver.run(
            c0=cfg.c0, snapshot_every=cfg.output_every, snapshot_times=cfg.output_times, on_increment=on_increment
        )
    except SolverError as exc:
        write_history_csv(out / "history.csv", records)
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    write_history_csv(out / "history.csv", result.records)
    for n, state in result.snapshots:
        snapshot(n, state)
    if cfg.write_figures:
        from .plotting import save_run_figures

        save_run_figures(out, mesh, result.records, result.state)
    print(f"{len(result.records)} increments written to {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import format_report_table, run_verification_suite, write_report_csv

    reports = run_verification_suite(args.level)
    table = format_report_table(reports)
    print(table)
    if args.output is not None:
        args.output.mkdir(parents=True, exist_ok=True)
        (args.output / "verify.txt").write_text(table + "\n", encoding="utf-8")
        write_report_csv(args.output / "verify.csv", reports)
    failed = [r.name for r in reports if not r.passed]
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def cmd_mesh_info(args) -> int:
    try:
        mesh = read_mesh(args.mesh)
    except (MeshError, OSError) as exc:
        print(f"mesh error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    geo = geometry(mesh)
    edges = mesh.edge_lengths()
    x0, y0, x1, y1 = mesh.bounding_box()
    print(f"elements: {mesh.n_elements} ({mesh.kind})")
    print(f"nodes: {mesh.n_nodes}")
    print(f"bounding box: [{x0:.6g}, {x1:.6g}] x [{y0:.6g}, {y1:.6g}]")
    print(f"min detJ: {geo.detJ.min():.6e}")
    print(f"edge length: min {edges.min():.6e}, max {edges.max():.6e}")
    for name, ids in sorted(mesh.node_sets.items()):
        print(f"node set {name}: {len(ids)} nodes")
    ell = args.length_scale
    if args.region is not None:
        rx0, rx1, ry0, ry1 = args.region
        cen = mesh.centroids()
        inside = (cen[:, 0] >= rx0) & (cen[:, 0] <= rx1) & (cen[:, 1] >= ry0) & (cen[:, 1] <= ry1)
        if not inside.any():
            print("warning: no element centroid lies inside the region")
            return EXIT_OK
        h = float(edges[inside].max())
        where = "in the region"
    else:
        h = float(edges.max())
        where = "in the mesh"
    ratio = (256.0 / 27.0) * np.pi / 160.0  # cohesive bound divided by the length scale
    print(f"largest element edge {where}: {h:.6e} (length scale / h = {ell / h:.3f})")
    if h > ratio * ell:
        print(
            f"warning: element size {h:.4e} exceeds the cohesive-zone bound {ratio * ell:.4e}; "
            f"elements should be at least {1 / ratio:.1f} times smaller than the length scale"
        )
    return EXIT_OK


def cmd_homog(args) -> int:
    params = default_iron_params().with_overrides(
        young_modulus=args.young_modulus, gc0=args.gc, length_scale=args.length_scale
    )
    theta = physics.coverage_from_wtppm(args.concentration, params)
    gc = physics.gc_degraded(theta, params.gc0, params.damage_coeff, params.gc_floor_fraction)
    E, ell = params.young_modulus, params.length_scale
    sig_c = physics.critical_stress(E, gc, ell)
    eps_c = physics.critical_strain(E, gc, ell)
    if args.samples < 2:
        print("hydrocrack homog: --samples must be >= 2", file=sys.stderr)
        return EXIT_USAGE
    lines = [
        f"theta,{theta:.9e}",
        f"gc,{gc:.9e}",
        f"sigma_c,{sig_c:.9e}",
        f"epsilon_c,{eps_c:.9e}",
        f"h_max,{physics.cohesive_mesh_bound(E, gc, sig_c):.9e}",
        "",
        "strain,stress,phi",
    ]
    for eps in np.linspace(0.0, args.max_strain * eps_c, args.samples):
        lines.append(f"{eps:.9e},{physics.homogeneous_stress(eps, E, gc, ell):.9e},{physics.homogeneous_phi(eps, E, gc, ell):.9e}")
    print("\n".join(lines))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "mesh-info": cmd_mesh_info, "homog": cmd_homog}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
