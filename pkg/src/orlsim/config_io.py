"""Flat key/section config files for scenarios, sweeps, and geometry.

INI-style files parsed with the stdlib configparser; every key has a
default, so an empty file is a valid scenario.  See README for the full
schema.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import replace

from .body import Disturbance, RobotModel
from .geometry import LimbGeometry
from .limb_dynamics import LinkInertialModel
from .locomotion import GaitSchedule, SwingConfig
from .metrics import WorkspaceSpec
from .mpc import MpcConfig
from .scenario import ScenarioConfig, SweepGrid
from .terrain import Terrain


class ConfigError(Exception):
    """Malformed or inconsistent configuration file."""


def _parser(path: str | None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if path is not None:
        read = cp.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path!r}")
    return cp


def _get(cp, section, key, cast, default):
    if not cp.has_section(section) or not cp.has_option(section, key):
        return default
    raw = cp.get(section, key)
    try:
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None


def _floats(raw: str):
    return tuple(float(x) for x in raw.replace(",", " ").split())


def _strings(raw: str):
    return tuple(x.strip() for x in raw.split(",") if x.strip())


def load_terrain(cp) -> Terrain:
    kind = _get(cp, "terrain", "kind", str, "flat")
    return Terrain(
        kind=kind,
        slope_angle=math.radians(_get(cp, "terrain", "slope_angle_deg", float, 0.0)),
        stair_rise=_get(cp, "terrain", "stair_rise", float, 0.05),
        stair_run=_get(cp, "terrain", "stair_run", float, 0.2),
        seed=_get(cp, "terrain", "seed", int, 0),
        max_height=_get(cp, "terrain", "max_height", float, 0.1),
        cell_size=_get(cp, "terrain", "cell_size", float, 0.15),
    )


def load_scenario(path: str | None, overrides: dict | None = None) -> ScenarioConfig:
    """Scenario from an INI file plus CLI-style overrides."""
    cp = _parser(path)
    overrides = overrides or {}
    disturbances = ()
    if cp.has_section("push"):
        disturbances = (
            Disturbance(
                force=(
                    _get(cp, "push", "force_x", float, 0.0),
                    _get(cp, "push", "force_y", float, 140.0),
                    _get(cp, "push", "force_z", float, 0.0),
                ),
                start=_get(cp, "push", "start", float, 3.0),
                duration=_get(cp, "push", "duration", float, 0.2),
            ),
        )
    mpc_kw = dict(
        horizon=_get(cp, "mpc", "horizon", int, 10),
        mu=_get(cp, "mpc", "mu", float, 0.5),
        f_min=_get(cp, "mpc", "f_min", float, 0.0),
        f_max=_get(cp, "mpc", "f_max", float, 200.0),
        r_weight=_get(cp, "mpc", "r_weight", float, 1e-4),
    )
    if cp.has_option("mpc", "q_weights"):
        w = _floats(cp.get("mpc", "q_weights"))
        if len(w) != 13:
            raise ConfigError("[mpc] q_weights needs 13 entries")
        mpc_kw["q_weights"] = w
    mpc = MpcConfig(**mpc_kw)
    gait = GaitSchedule(
        period=_get(cp, "gait", "period", float, 0.5),
        duty=_get(cp, "gait", "duty", float, 0.5),
    )
    swing = None
    if cp.has_section("swing"):
        swing = SwingConfig(
            neutral_offset=_get(
                cp, "swing", "neutral_offset", float,
                _get(cp, "scenario", "foothold_offset", float, 0.0),
            ),
            clearance=_get(cp, "swing", "clearance", float, 0.05),
            velocity_gain=_get(cp, "swing", "velocity_gain", float, 0.15),
            kp=[_get(cp, "swing", "kp", float, 2500.0)] * 3,
            kd=[_get(cp, "swing", "kd", float, 50.0)] * 3,
        )
    try:
        cfg = ScenarioConfig(
            motion=_get(cp, "scenario", "motion", str, "forward"),
            variant=_get(cp, "scenario", "variant", str, "bennett"),
            target_speed=_get(cp, "scenario", "target_speed", float, 0.5),
            foothold_offset=_get(cp, "scenario", "foothold_offset", float, 0.0),
            foot_extension=_get(cp, "scenario", "foot_extension", float, 0.06),
            duration=_get(cp, "scenario", "duration", float, 10.0),
            seed=_get(cp, "scenario", "seed", int, 0),
            ramp_time=_get(cp, "scenario", "ramp_time", float, 1.25),
            terrain=load_terrain(cp),
            gait=gait,
            mpc=mpc,
            swing=swing,
            disturbances=disturbances,
        )
        return replace(cfg, **overrides) if overrides else cfg
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_sweep(path: str | None, overrides: dict | None = None) -> SweepGrid:
    cp = _parser(path)
    overrides = overrides or {}
    grid = SweepGrid(
        motions=_strings(_get(cp, "sweep", "motions", str, "forward,lateral,turn")),
        speeds=_floats(_get(cp, "sweep", "speeds", str, "0.4,0.8,1.2")),
        footholds=_floats(_get(cp, "sweep", "footholds", str, "0.0,0.08,0.16")),
        variants=_strings(_get(cp, "sweep", "variants", str, "bennett,planar")),
        duration=_get(cp, "sweep", "duration", float, 8.0),
        seed=_get(cp, "sweep", "seed", int, 0),
        terrain=load_terrain(cp),
    )
    return replace(grid, **overrides) if overrides else grid


def load_limb(path: str | None, variant: str = "bennett") -> LimbGeometry:
    """Limb geometry from the robot-description file ([limb] section)."""
    cp = _parser(path)
    variant = _get(cp, "limb", "variant", str, variant)
    if variant == "planar":
        alpha = beta = 0.0
    else:
        alpha = math.radians(_get(cp, "limb", "alpha_deg", float, 120.0))
        beta = math.radians(_get(cp, "limb", "beta_deg", float, 60.0))
    try:
        return LimbGeometry(
            l1=_get(cp, "limb", "l1", float, 0.06),
            l2=_get(cp, "limb", "l2", float, 0.18),
            l3=_get(cp, "limb", "l3", float, 0.18),
            l4=_get(cp, "limb", "l4", float, 0.0),
            alpha=alpha,
            beta=beta,
            variant=variant,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_inertial(path: str | None, geom: LimbGeometry) -> LinkInertialModel:
    """Per-leg inertial model from the robot-description file.

    The [inertial] section scales the default length-proportional
    distribution; per-body overrides are not needed for the shipped
    experiments.
    """
    cp = _parser(path)
    try:
        return LinkInertialModel.default_for(
            geom,
            leg_mass=_get(cp, "inertial", "leg_mass", float, 0.4),
            bracket_mass=_get(cp, "inertial", "bracket_mass", float, 0.01),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_workspace(path: str | None) -> WorkspaceSpec:
    cp = _parser(path)
    return WorkspaceSpec(
        x_range=(
            _get(cp, "workspace", "x_min", float, -0.15),
            _get(cp, "workspace", "x_max", float, 0.15),
        ),
        y_range=(
            _get(cp, "workspace", "y_min", float, -0.10),
            _get(cp, "workspace", "y_max", float, 0.20),
        ),
        z_range=(
            _get(cp, "workspace", "z_min", float, -0.30),
            _get(cp, "workspace", "z_max", float, -0.15),
        ),
        pitch=_get(cp, "workspace", "pitch", float, 0.02),
    )
