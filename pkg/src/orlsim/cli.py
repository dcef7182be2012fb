"""Command-line interface: sim, sweep, gpi, and kincheck subcommands.

Exit codes: 0 success, 2 configuration error, 3 controller diverged,
4 empty or unreachable workspace, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_WORKSPACE = 4


def _add_common(p):
    p.add_argument("--seed", type=int, default=None, help="override the run seed")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--variant", choices=("bennett", "planar"), default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="primary artifact format")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="orlsim",
        description="Reconfigurable-limb quadruped locomotion simulator",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sim", help="run one closed-loop scenario")
    p.add_argument("config", nargs="?", default=None, help="scenario .ini file")
    _add_common(p)

    p = sub.add_parser("sweep", help="run a motion/speed/foothold/variant grid")
    p.add_argument("config", nargs="?", default=None, help="sweep grid .ini file")
    _add_common(p)

    p = sub.add_parser("gpi", help="workspace performance-index sweep")
    p.add_argument("config", nargs="?", default=None, help="geometry .ini file")
    _add_common(p)
    p.add_argument("--pitch", type=float, default=None, help="grid pitch (m)")
    p.add_argument("--bounds", type=float, nargs=6, metavar=("XMIN", "XMAX", "YMIN", "YMAX", "ZMIN", "ZMAX"),
                   default=None, help="workspace box")

    p = sub.add_parser("kincheck", help="run the kinematics property suite")
    p.add_argument("--variant", choices=("bennett", "planar"), default="bennett")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    return ap


def cmd_sim(args) -> int:
    from .config_io import ConfigError, load_scenario
    from .scenario import run_scenario
    from .serialize import log_to_csv, reference_to_csv, summary_to_json

    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.variant is not None:
        overrides["variant"] = args.variant
    try:
        config = load_scenario(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log, report, summary = run_scenario(config)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "summary.json").write_text(summary_to_json(summary))
    if args.format == "csv":
        (args.out / "log.csv").write_text(log_to_csv(log, config))
        (args.out / "ref.csv").write_text(reference_to_csv(log, config))
    print(summary_to_json(summary), end="")
    if log.failed:
        print(f"run failed: {log.failure}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .config_io import ConfigError, load_sweep
    from .scenario import sweep_experiment
    from .serialize import summary_to_json, sweep_to_csv

    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.variant is not None:
        overrides["variants"] = (args.variant,)
    try:
        grid = load_sweep(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cells = sweep_experiment(grid)
    args.out.mkdir(parents=True, exist_ok=True)
    csv = sweep_to_csv(cells, grid)
    (args.out / "sweep.csv").write_text(csv)
    if args.format == "json":
        rows = [vars(c) for c in cells]
        (args.out / "sweep.json").write_text(summary_to_json({"cells": rows}))
    ok = sum(1 for c in cells if c.status == "ok")
    print(f"{len(cells)} cells, {ok} ok -> {args.out / 'sweep.csv'}")
    return EXIT_OK


def cmd_gpi(args) -> int:
    from .config_io import ConfigError, load_limb, load_workspace
    from .metrics import EmptyWorkspace, WorkspaceSpec, gpi_sweep
    from .serialize import gpi_to_csv, summary_to_json

    try:
        geom = load_limb(args.config, variant=args.variant or "bennett")
        ws = load_workspace(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.bounds is not None:
        b = args.bounds
        ws = WorkspaceSpec(x_range=(b[0], b[1]), y_range=(b[2], b[3]),
                           z_range=(b[4], b[5]), pitch=ws.pitch)
    if args.pitch is not None:
        ws = WorkspaceSpec(x_range=ws.x_range, y_range=ws.y_range,
                           z_range=ws.z_range, pitch=args.pitch)
    try:
        report = gpi_sweep(geom, workspace=ws)
    except EmptyWorkspace as exc:
        print(f"workspace error: {exc}", file=sys.stderr)
        return EXIT_WORKSPACE
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "gpi.csv").write_text(gpi_to_csv(report, geom))
    aggregates = {
        "variant": geom.variant,
        "isotropy": report.gpi_isotropy,
        "velocity": report.gpi_velocity.tolist(),
        "payload": report.gpi_payload.tolist(),
        "samples": int(len(report.points)),
        "skipped": int(report.skipped),
    }
    (args.out / "gpi_summary.json").write_text(summary_to_json(aggregates))
    print(summary_to_json(aggregates), end="")
    return EXIT_OK


def cmd_kincheck(args) -> int:
    from .geometry import (
        DEFAULT_LIMITS,
        closure_residual,
        foot_position,
        inverse_kinematics,
        jacobian_active,
        limb_for_variant,
    )

    geom = limb_for_variant(args.variant)
    rng = np.random.default_rng(args.seed)
    n = args.samples
    worst_rt = worst_res = worst_jac = 0.0
    for _ in range(n):
        qa = DEFAULT_LIMITS.sample(rng)
        p = foot_position(qa, geom)
        qa2 = inverse_kinematics(p, geom)
        worst_rt = max(worst_rt, float(np.linalg.norm(foot_position(qa2, geom) - p)))
        if geom.variant == "bennett":
            from .geometry import passive_angle

            worst_res = max(
                worst_res, abs(closure_residual(geom, qa, passive_angle(geom, qa)))
            )
        J = jacobian_active(qa, geom)
        d = 1e-7
        Jfd = np.zeros((3, 3))
        for i in range(3):
            e = np.zeros(3)
            e[i] = d
            Jfd[:, i] = (foot_position(qa + e, geom) - foot_position(qa - e, geom)) / (2 * d)
        worst_jac = max(
            worst_jac,
            float(np.max(np.abs(J - Jfd)) / max(1.0, np.max(np.abs(Jfd)))),
        )
    checks = [
        ("fk-ik roundtrip < 1e-9 m", worst_rt, 1e-9),
        ("closure residual < 1e-10", worst_res, 1e-10),
        ("jacobian vs fd < 1e-6", worst_jac, 1e-6),
    ]
    failed = False
    for name, value, tol in checks:
        ok = value < tol
        failed |= not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: worst {value:.3e}")
    return EXIT_ERROR if failed else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sim":
            return cmd_sim(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "gpi":
            return cmd_gpi(args)
        if args.command == "kincheck":
            return cmd_kincheck(args)
    except KeyboardInterrupt:
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
