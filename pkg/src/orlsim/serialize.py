"""Deterministic CSV/JSON serialization of runs, sweeps, and GPI reports.

Floats are written with repr (shortest round-trip) so identical runs
produce byte-identical files.  Every CSV starts with a version comment
carrying a hash of the generating configuration.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from typing import Iterable

import numpy as np

LOG_SCHEMA = "orlsim-log v1"
SWEEP_SCHEMA = "orlsim-sweep v1"
GPI_SCHEMA = "orlsim-gpi v1"

LEGS = ("fl", "fr", "rl", "rr")

LOG_COLUMNS = (
    ["time"]
    + ["roll", "pitch", "yaw", "px", "py", "pz", "wx", "wy", "wz", "vx", "vy", "vz", "g3"]
    + [f"f_{leg}_{ax}" for leg in LEGS for ax in "xyz"]
    + [f"tau_{leg}_{i}" for leg in LEGS for i in (1, 2, 3)]
    + [f"omega_{leg}_{i}" for leg in LEGS for i in (1, 2, 3)]
    + [f"contact_{leg}" for leg in LEGS]
)

SWEEP_COLUMNS = (
    "motion", "variant", "foothold_m", "target_speed", "status",
    "cot", "distance_m", "mean_power_w", "seed",
)

GPI_COLUMNS = ("x", "y", "z", "isotropy", "vx", "vy", "vz", "fx", "fy", "fz")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    f = float(v)
    if f != f:
        return "nan"
    return repr(f)


def config_hash(obj) -> str:
    """Short stable hash of a (dataclass) configuration."""

    def canon(o):
        if dataclasses.is_dataclass(o) and not isinstance(o, type):
            return {f.name: canon(getattr(o, f.name)) for f in dataclasses.fields(o)}
        if isinstance(o, np.ndarray):
            return [canon(x) for x in o.tolist()]
        if isinstance(o, (tuple, list)):
            return [canon(x) for x in o]
        if isinstance(o, dict):
            return {k: canon(v) for k, v in sorted(o.items())}
        if isinstance(o, (np.floating, float)):
            return repr(float(o))
        return o

    blob = json.dumps(canon(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def log_to_csv(log, config=None) -> str:
    """SimLog rows: time, 13 states, 12 GRFs, 12 torques, 12 speeds, 4 flags.

    Torques and speeds are actuator-side (post coupling map); joint-side
    series stay in the in-memory log and the JSON summary.
    """
    lines = [f"# {LOG_SCHEMA} config={config_hash(config) if config else 'none'}"]
    lines.append(",".join(LOG_COLUMNS))
    for i in range(len(log.t)):
        row = (
            [log.t[i]]
            + list(log.state[i])
            + list(log.grf[i])
            + list(log.tau_actuator[i])
            + list(log.omega_actuator[i])
            + list(log.contacts[i])
        )
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def reference_to_csv(log, config=None) -> str:
    """Companion reference series for tracking plots."""
    lines = [f"# {LOG_SCHEMA} config={config_hash(config) if config else 'none'}"]
    cols = ["time"] + [
        f"ref_{c}" for c in
        ("roll", "pitch", "yaw", "px", "py", "pz", "wx", "wy", "wz", "vx", "vy", "vz", "g3")
    ]
    lines.append(",".join(cols))
    for i in range(len(log.t)):
        lines.append(",".join(fmt(v) for v in [log.t[i]] + list(log.reference[i])))
    return "\n".join(lines) + "\n"


def sweep_to_csv(cells: Iterable, grid=None) -> str:
    lines = [f"# {SWEEP_SCHEMA} config={config_hash(grid) if grid else 'none'}"]
    lines.append(",".join(SWEEP_COLUMNS))
    for c in cells:
        lines.append(
            ",".join(
                [
                    c.motion,
                    c.variant,
                    fmt(c.foothold_offset),
                    fmt(c.target_speed),
                    c.status,
                    fmt(c.cot),
                    fmt(c.distance),
                    fmt(c.mean_power),
                    fmt(c.seed),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def gpi_to_csv(report, config=None) -> str:
    lines = [f"# {GPI_SCHEMA} config={config_hash(config) if config else 'none'}"]
    lines.append(",".join(GPI_COLUMNS))
    for row in report.rows():
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def summary_to_json(summary: dict) -> str:
    def default(o):
        if isinstance(o, (np.floating,)):
            return float(o)
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.bool_,)):
            return bool(o)
        raise TypeError(f"not serializable: {type(o)}")

    return json.dumps(summary, sort_keys=True, indent=1, default=default) + "\n"
