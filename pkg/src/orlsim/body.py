"""Single-rigid-body plant: state, robot parameters, and the integrator.

The plant is the same simplified model the stance controller assumes:
massless legs, ground reaction forces acting directly on the body, foot
contacts pinned at scheduled touchdown points.  Integration is
semi-implicit Euler at the control rate; attitude uses the exact ZYX
Euler-rate map (the controller's linearized R_z^T map is an
approximation of this).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import (
    GRAVITY,
    LimbGeometry,
    SingularJacobian,
    bennett_default,
    inverse_kinematics,
    jacobian_active,
    limb_for_variant,
    require_invertible,
)

LEG_NAMES = ("fl", "fr", "rl", "rr")


class EulerSingularity(Exception):
    """ZYX Euler rates undefined as |pitch| approaches pi/2."""


def rotation_zyx(euler) -> np.ndarray:
    """Body-to-world rotation from (roll, pitch, yaw), ZYX composition."""
    r, p, y = euler
    cr, sr = math.cos(r), math.sin(r)
    cp, sp = math.cos(p), math.sin(p)
    cy, sy = math.cos(y), math.sin(y)
    Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1.0]])
    Ry = np.array([[cp, 0, sp], [0, 1.0, 0], [-sp, 0, cp]])
    Rx = np.array([[1.0, 0, 0], [0, cr, -sr], [0, sr, cr]])
    return Rz @ Ry @ Rx


def euler_rate_matrix(euler) -> np.ndarray:
    """B with omega_world = B(euler) @ (droll, dpitch, dyaw)."""
    r, p, y = euler
    cp, sp = math.cos(p), math.sin(p)
    cy, sy = math.cos(y), math.sin(y)
    return np.array(
        [
            [cp * cy, -sy, 0.0],
            [cp * sy, cy, 0.0],
            [-sp, 0.0, 1.0],
        ]
    )


@dataclass
class BodyState:
    """13-dimensional body state: Euler angles, CoM position, rates, gravity."""

    euler: np.ndarray = field(default_factory=lambda: np.zeros(3))  # roll, pitch, yaw
    p: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))  # world frame
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    g3: float = -GRAVITY

    def __post_init__(self):
        self.euler = np.asarray(self.euler, dtype=float).reshape(3).copy()
        self.p = np.asarray(self.p, dtype=float).reshape(3).copy()
        self.omega = np.asarray(self.omega, dtype=float).reshape(3).copy()
        self.v = np.asarray(self.v, dtype=float).reshape(3).copy()

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.euler, self.p, self.omega, self.v, [self.g3]])

    @classmethod
    def from_vector(cls, x) -> "BodyState":
        x = np.asarray(x, dtype=float).reshape(13)
        return cls(euler=x[0:3], p=x[3:6], omega=x[6:9], v=x[9:12], g3=float(x[12]))

    def rotation(self) -> np.ndarray:
        return rotation_zyx(self.euler)

    def copy(self) -> "BodyState":
        return BodyState(
            euler=self.euler, p=self.p, omega=self.omega, v=self.v, g3=self.g3
        )


@dataclass
class RobotModel:
    """Quadruped body parameters and per-leg limb geometry.

    Hip mounts sit at the body corners; layout order is FL, FR, RL, RR.
    The body inertia default is a solid-box estimate for the 14 kg trunk
    concentrated toward the centerline.
    """

    mass: float = 14.0
    inertia: np.ndarray = field(
        default_factory=lambda: np.diag([0.15, 0.35, 0.40])
    )
    length: float = 0.51
    width: float = 0.45
    height: float = 0.32
    hip_x: float = 0.19
    hip_y: float = 0.10
    legs: tuple = ()
    standing_height: float = 0.30

    def __post_init__(self):
        self.inertia = np.asarray(self.inertia, dtype=float).reshape(3, 3)
        if np.max(np.abs(self.inertia - self.inertia.T)) > 1e-12 or np.any(
            np.linalg.eigvalsh(self.inertia) <= 0
        ):
            raise ValueError("body inertia must be symmetric positive definite")
        if not self.legs:
            self.legs = tuple(
                bennett_default(side)
                for side in ("front-left", "front-right", "rear-left", "rear-right")
            )

    @classmethod
    def with_variant(cls, variant: str, foot_extension: float = 0.0, **kw) -> "RobotModel":
        legs = tuple(
            limb_for_variant(variant, side, foot_extension=foot_extension)
            for side in ("front-left", "front-right", "rear-left", "rear-right")
        )
        return cls(legs=legs, **kw)

    def hip_positions(self) -> np.ndarray:
        """Hip mount positions in the body frame, (4,3), FL FR RL RR."""
        return np.array(
            [
                [self.hip_x, self.hip_y, 0.0],
                [self.hip_x, -self.hip_y, 0.0],
                [-self.hip_x, self.hip_y, 0.0],
                [-self.hip_x, -self.hip_y, 0.0],
            ]
        )

    def hip_world(self, state: BodyState, leg: int) -> np.ndarray:
        return state.p + state.rotation() @ self.hip_positions()[leg]

    def foot_hip_frame(self, state: BodyState, leg: int, foot_world) -> np.ndarray:
        """World foot point expressed in the leg's hip frame."""
        R = state.rotation()
        return R.T @ (np.asarray(foot_world, dtype=float) - state.p) - self.hip_positions()[leg]


@dataclass
class ContactState:
    """Per-leg contact flags, pinned world footholds, and current GRFs."""

    in_contact: np.ndarray = field(default_factory=lambda: np.zeros(4, dtype=bool))
    footholds: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))
    forces: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))


@dataclass(frozen=True)
class Disturbance:
    """External wrench at the CoM over [start, start + duration)."""

    force: tuple = (0.0, 0.0, 0.0)
    torque: tuple = (0.0, 0.0, 0.0)
    start: float = 0.0
    duration: float = 0.0

    def active(self, t: float) -> bool:
        return self.duration > 0.0 and self.start <= t < self.start + self.duration


def disturbance_wrench(disturbances, t: float):
    """Summed external force and torque active at time t."""
    f = np.zeros(3)
    tau = np.zeros(3)
    for d in disturbances or ():
        if d.active(t):
            f += np.asarray(d.force, dtype=float)
            tau += np.asarray(d.torque, dtype=float)
    return f, tau


def dynamics_step(
    state: BodyState,
    contacts: ContactState,
    grfs,
    model: RobotModel,
    dt: float,
    ext_force=None,
    ext_torque=None,
) -> BodyState:
    """Semi-implicit Euler step of the single-rigid-body dynamics.

    omega_dot = I_w^-1 (sum r_j x f_j + tau_ext), v_dot = g + (sum f_j +
    f_ext)/m; the velocity update precedes the position update, and the
    Euler angles integrate the exact ZYX rate map.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if abs(state.euler[1]) >= math.pi / 2 - 1e-6:
        raise EulerSingularity("pitch at the Euler-angle representation limit")
    grfs = np.asarray(grfs, dtype=float).reshape(4, 3)
    f_total = np.zeros(3)
    tau_total = np.zeros(3)
    for j in range(4):
        if contacts.in_contact[j]:
            r = contacts.footholds[j] - state.p
            f_total += grfs[j]
            tau_total += np.cross(r, grfs[j])
    if ext_force is not None:
        f_total += np.asarray(ext_force, dtype=float)
    if ext_torque is not None:
        tau_total += np.asarray(ext_torque, dtype=float)

    R = state.rotation()
    Iw = R @ model.inertia @ R.T
    omega_new = state.omega + np.linalg.solve(Iw, tau_total) * dt
    v_new = state.v + (np.array([0.0, 0.0, state.g3]) + f_total / model.mass) * dt
    p_new = state.p + v_new * dt
    B = euler_rate_matrix(state.euler)
    if abs(np.linalg.det(B)) < 1e-8:
        raise EulerSingularity("Euler rate matrix singular")
    euler_new = state.euler + np.linalg.solve(B, omega_new) * dt
    return BodyState(euler=euler_new, p=p_new, omega=omega_new, v=v_new, g3=state.g3)


def stance_joint_load(f_world, qa, state: BodyState, model: RobotModel, leg: int,
                      foothold_world=None):
    """Joint torques and rates of a stance leg transmitting GRF f_world.

    tau_a = J^T R^T (-f); qd_a = J^-1 * (hip-frame velocity of a
    world-stationary foothold under the current body twist).
    """
    geom = model.legs[leg]
    J = jacobian_active(qa, geom)
    require_invertible(J)
    R = state.rotation()
    f = np.asarray(f_world, dtype=float).reshape(3)
    tau_a = J.T @ (R.T @ (-f))
    if foothold_world is None:
        qd_a = np.zeros(3)
    else:
        rel = np.asarray(foothold_world, dtype=float) - state.p
        v_hip = -(R.T @ (np.cross(state.omega, rel) + state.v))
        qd_a = np.linalg.solve(J, v_hip)
    return tau_a, qd_a
