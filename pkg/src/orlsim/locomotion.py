"""Motion generation: gait timing, body references, footholds, swing legs.

A fixed-timing scheduler assigns stance/swing phases; velocity commands
follow trapezoidal ramps and integrate into a persistent pose reference;
footholds combine the half-stance heuristic with yaw rotation, velocity
feedback, and a slope adjustment; swing feet track a cycloidal profile
under Cartesian impedance with an inverse-dynamics feedforward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    KinematicsError,
    LimbGeometry,
    inverse_kinematics,
    jacobian_active,
)
from .limb_dynamics import LimbDynamics
from .mpc import rot_z

LEG_ORDER = ("fl", "fr", "rl", "rr")
TROT_OFFSETS = (0.0, 0.5, 0.5, 0.0)  # diagonal pairs share phase


@dataclass(frozen=True)
class GaitSchedule:
    """Fixed-timing gait: period, duty factor, per-leg phase offsets."""

    period: float = 0.5
    duty: float = 0.5
    offsets: tuple = TROT_OFFSETS

    def __post_init__(self):
        if not 0.0 < self.duty < 1.0:
            raise ValueError("duty factor must lie in (0, 1)")
        if any(not 0.0 <= o < 1.0 for o in self.offsets):
            raise ValueError("phase offsets must lie in [0, 1)")

    @property
    def stance_time(self) -> float:
        return self.duty * self.period

    @property
    def swing_time(self) -> float:
        return (1.0 - self.duty) * self.period


@dataclass(frozen=True)
class LegPhase:
    stance: bool
    fraction: float  # progress through the current stance or swing, in [0, 1)


def gait_phase(t: float, schedule: GaitSchedule):
    """Per-leg phase at time t; legs start their cycle at their offset."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    phases = []
    for off in schedule.offsets:
        xi = (t / schedule.period - off) % 1.0
        if xi < schedule.duty:
            phases.append(LegPhase(stance=True, fraction=xi / schedule.duty))
        else:
            phases.append(
                LegPhase(stance=False, fraction=(xi - schedule.duty) / (1.0 - schedule.duty))
            )
    return tuple(phases)


def contact_flags(t: float, schedule: GaitSchedule, stand: bool = False) -> np.ndarray:
    if stand:
        return np.ones(4, dtype=bool)
    return np.array([ph.stance for ph in gait_phase(t, schedule)])


def contact_sequence(t: float, schedule: GaitSchedule, n: int, dt: float,
                     stand: bool = False) -> np.ndarray:
    """Scheduled stance flags over an n-step horizon starting at t."""
    return np.stack(
        [contact_flags(t + k * dt, schedule, stand) for k in range(n)]
    )


@dataclass
class CommandProfile:
    """Trapezoidal velocity command: ramp up, cruise, ramp down to zero.

    v_cruise is the planar body-frame velocity (vx, vy); omega_cruise the
    yaw rate.  Ramps are linear over ramp_time, and the command returns
    to zero over the final ramp_time of the run.
    """

    v_cruise: tuple = (0.0, 0.0)
    omega_cruise: float = 0.0
    ramp_time: float = 1.25
    duration: float = 10.0

    def scale(self, t: float) -> float:
        if t <= 0 or t >= self.duration:
            return 0.0
        r = min(self.ramp_time, 0.5 * self.duration)
        if t < r:
            return t / r
        if t > self.duration - r:
            return (self.duration - t) / r
        return 1.0

    def velocity(self, t: float) -> np.ndarray:
        return self.scale(t) * np.asarray(self.v_cruise, dtype=float)

    def yaw_rate(self, t: float) -> float:
        return self.scale(t) * self.omega_cruise


@dataclass
class SwingConfig:
    """Foothold and swing-tracking parameters.

    neutral_offset is the lateral-outward shift of the foothold neutral
    point from the hip (the sprawl parameter swept in the energy
    experiments); velocity_gain is the foothold feedback on velocity
    error; the impedance gains act on Cartesian foot error in the hip
    frame.  None of these are dictated by the plant: they are control
    tuning defaults.
    """

    neutral_offset: float = 0.0
    clearance: float = 0.05
    velocity_gain: float = 0.15
    kp: np.ndarray = field(default_factory=lambda: np.full(3, 2500.0))
    kd: np.ndarray = field(default_factory=lambda: np.full(3, 50.0))

    def __post_init__(self):
        self.kp = np.asarray(self.kp, dtype=float).reshape(3)
        self.kd = np.asarray(self.kd, dtype=float).reshape(3)
        if np.any(self.kp < 0) or np.any(self.kd < 0):
            raise ValueError("impedance gains must be nonnegative")
        if self.clearance <= 0:
            raise ValueError("ground clearance must be positive")


def neutral_point(model, leg: int, cfg: SwingConfig) -> np.ndarray:
    """Body-frame xy neutral foothold: hip shifted laterally outward."""
    hip = model.hip_positions()[leg]
    out = 1.0 if model.legs[leg].side.endswith("left") else -1.0
    y = hip[1] + out * (model.legs[leg].l1 + cfg.neutral_offset)
    return np.array([hip[0], y])


def foothold_target(
    v_body,
    v_des,
    omega_des: float,
    stance_time: float,
    p_neutral,
    cfg: SwingConfig,
    desired_height: float = 0.0,
    desired_pitch: float = 0.0,
    desired_roll: float = 0.0,
) -> np.ndarray:
    """Body-frame xy foothold: half-stance travel + yaw + velocity feedback.

    p = p_h + v_d T_st/2 + (R_z(w T_st/2) - I) p_h + K_v (v - v_d) + dp,
    with the slope adjustment dp = (h tan(pitch), -h tan(roll)).
    """
    p_h = np.asarray(p_neutral, dtype=float).reshape(2)
    v_des = np.asarray(v_des, dtype=float).reshape(2)
    v_body = np.asarray(v_body, dtype=float).reshape(2)
    Rz = rot_z(omega_des * stance_time / 2.0)[:2, :2]
    p = (
        p_h
        + v_des * stance_time / 2.0
        + (Rz - np.eye(2)) @ p_h
        + cfg.velocity_gain * (v_body - v_des)
    )
    p = p + np.array(
        [
            desired_height * math.tan(desired_pitch),
            -desired_height * math.tan(desired_roll),
        ]
    )
    return p


def cycloid_timing(phase: float):
    """Cycloidal progress s, ds/dphase, d2s/dphase2 with rest endpoints."""
    two_pi = 2.0 * math.pi
    s = phase - math.sin(two_pi * phase) / two_pi
    ds = 1.0 - math.cos(two_pi * phase)
    dds = two_pi * math.sin(two_pi * phase)
    return s, ds, dds


def cycloid_trajectory(p_lift, p_end, clearance: float, phase: float,
                       swing_time: float = 1.0):
    """Swing foot reference (p, v, a) at swing fraction phase in [0, 1].

    All three components interpolate via the cycloidal timing law; the
    vertical adds an arch of the given clearance composed with the same
    law, so velocity and acceleration vanish at both endpoints.
    """
    phase = min(max(phase, 0.0), 1.0)
    p_lift = np.asarray(p_lift, dtype=float).reshape(3)
    p_end = np.asarray(p_end, dtype=float).reshape(3)
    s, ds, dds = cycloid_timing(phase)
    delta = p_end - p_lift
    p = p_lift + delta * s
    v = delta * ds
    a = delta * dds
    two_pi = 2.0 * math.pi
    arch = 0.5 * clearance * (1.0 - math.cos(two_pi * s))
    darch_ds = 0.5 * clearance * two_pi * math.sin(two_pi * s)
    ddarch_ds2 = 0.5 * clearance * two_pi * two_pi * math.cos(two_pi * s)
    p[2] += arch
    v[2] += darch_ds * ds
    a[2] += ddarch_ds2 * ds * ds + darch_ds * dds
    return p, v / swing_time, a / (swing_time * swing_time)


def swing_torque(
    p_des,
    v_des,
    tau_ff,
    p_act,
    v_act,
    qa,
    geom: LimbGeometry,
    cfg: SwingConfig,
) -> np.ndarray:
    """Cartesian impedance with feedforward, all in the hip frame:

    tau = tau_ff + J^T [Kp (p_d - p) + Kd (v_d - v)]
    """
    J = jacobian_active(qa, geom)
    e_p = np.asarray(p_des, dtype=float) - np.asarray(p_act, dtype=float)
    e_v = np.asarray(v_des, dtype=float) - np.asarray(v_act, dtype=float)
    return np.asarray(tau_ff, dtype=float) + J.T @ (cfg.kp * e_p + cfg.kd * e_v)


def swing_feedforward(dyn: LimbDynamics, qa, p_ref_v, p_ref_a, gravity) -> np.ndarray:
    """Inverse-dynamics torque tracking the reference foot acceleration.

    Joint rates/accelerations follow from the differential kinematics at
    the current configuration; the Jacobian rate uses a centered
    difference along the motion.
    """
    geom = dyn.geom
    J = jacobian_active(qa, geom)
    try:
        qd = np.linalg.solve(J, p_ref_v)
    except np.linalg.LinAlgError:
        return np.zeros(3)
    d = 1e-6
    Jp = jacobian_active(qa + d * qd, geom)
    Jm = jacobian_active(qa - d * qd, geom)
    Jdot = (Jp - Jm) / (2.0 * d)
    qdd = np.linalg.solve(J, p_ref_a - Jdot @ qd)
    return dyn.inverse_dynamics_active(qa, qd, qdd, gravity=gravity)


@dataclass
class ReferenceState:
    """Persistent integrated pose reference (world frame)."""

    yaw: float = 0.0
    position: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def advance(self, v_body, yaw_rate: float, dt: float):
        self.yaw += yaw_rate * dt
        self.position = self.position + rot_z(self.yaw)[:2, :2] @ np.asarray(
            v_body, dtype=float
        ) * dt


def com_reference(
    ref: ReferenceState,
    command: CommandProfile,
    t: float,
    n: int,
    dt: float,
    height_fn,
    desired_height: float,
    desired_pitch: float = 0.0,
    desired_roll: float = 0.0,
    gravity: float = 9.81,
) -> np.ndarray:
    """Stacked 13-state reference over the horizon, yaw unwrapped.

    Positions integrate the commanded velocity from the current reference
    pose; height rides height_fn(x, y) plus the desired body height.
    """
    X = np.zeros((n, 13))
    yaw = ref.yaw
    pos = ref.position.copy()
    for k in range(n):
        tk = t + k * dt
        v_b = command.velocity(tk)
        wz = command.yaw_rate(tk)
        yaw = yaw + wz * dt
        pos = pos + rot_z(yaw)[:2, :2] @ v_b * dt
        v_world = rot_z(yaw)[:2, :2] @ v_b
        X[k, 0] = desired_roll
        X[k, 1] = desired_pitch
        X[k, 2] = yaw
        X[k, 3:5] = pos
        X[k, 5] = height_fn(pos[0], pos[1]) + desired_height
        X[k, 8] = wz
        X[k, 9:11] = v_world
        X[k, 12] = -gravity
    return X.reshape(-1)
