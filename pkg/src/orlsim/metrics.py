"""Configuration-dependent limb performance indices and workspace averages.

Three per-configuration indices of the 3x3 active Jacobian: isotropy
(inverse 2-norm condition number), directional velocity capability under
joint speed limits, and directional payload capability under joint
torque limits.  Workspace-averaged values (one number per index and
direction) are produced by sweeping a cubic grid of foot positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    DEFAULT_LIMITS,
    JointLimits,
    KinematicsError,
    LimbGeometry,
    SingularJacobian,
    inverse_kinematics,
    jacobian_active,
)


class EmptyWorkspace(Exception):
    """No grid sample admitted an in-limit kinematics solution."""


@dataclass(frozen=True)
class WorkspaceSpec:
    """Axis-aligned sample box for the workspace sweep (meters)."""

    x_range: tuple = (-0.15, 0.15)
    y_range: tuple = (-0.10, 0.20)
    z_range: tuple = (-0.30, -0.15)
    pitch: float = 0.02

    def __post_init__(self):
        if self.pitch <= 0:
            raise ValueError("pitch must be positive")
        for lo, hi in (self.x_range, self.y_range, self.z_range):
            if hi < lo:
                raise ValueError("empty axis range")

    def grid(self):
        ax = [
            np.arange(lo, hi + 1e-9, self.pitch)
            for lo, hi in (self.x_range, self.y_range, self.z_range)
        ]
        return ax


@dataclass
class IndexReport:
    """Per-sample index values over the reachable workspace samples.

    points: (n,3) foot positions; isotropy: (n,); velocity, payload:
    (n,3) per world axis.  The scalar aggregates are unweighted means
    over the reachable grid (a Riemann-sum ratio on the uniform grid).
    """

    points: np.ndarray
    isotropy: np.ndarray
    velocity: np.ndarray
    payload: np.ndarray
    skipped: int = 0

    @property
    def gpi_isotropy(self) -> float:
        return float(self.isotropy.mean())

    @property
    def gpi_velocity(self) -> np.ndarray:
        return self.velocity.mean(axis=0)

    @property
    def gpi_payload(self) -> np.ndarray:
        return self.payload.mean(axis=0)

    def rows(self):
        """CSV-ready rows: x, y, z, isotropy, vx, vy, vz, fx, fy, fz."""
        return np.hstack(
            [self.points, self.isotropy[:, None], self.velocity, self.payload]
        )


def isotropy(J) -> float:
    """Inverse condition number sigma_min / sigma_max, in [0, 1]."""
    s = np.linalg.svd(np.asarray(J, dtype=float), compute_uv=False)
    if s[0] == 0.0:
        return 0.0
    return float(s[-1] / s[0])


def velocity_index(J, qd_max, e) -> float:
    """Largest |v| along unit direction e with |J^-1 v|_i <= qd_max_i."""
    J = np.asarray(J, dtype=float)
    s = np.linalg.svd(J, compute_uv=False)
    if s[-1] < 1e-12:
        raise SingularJacobian("velocity index undefined at a singular Jacobian")
    w = np.abs(np.linalg.solve(J, np.asarray(e, dtype=float)))
    qd_max = np.asarray(qd_max, dtype=float)
    with np.errstate(divide="ignore"):
        ratios = np.where(w > 1e-15, qd_max / np.maximum(w, 1e-300), np.inf)
    return float(np.min(ratios))


def payload_index(J, tau_max, e) -> float:
    """Largest force component along e under joint torque bounds.

    Sum_i |e^T J^-T|_i tau_i,max: forces in the other directions are not
    constrained to zero (multi-leg support cancels them).
    """
    J = np.asarray(J, dtype=float)
    s = np.linalg.svd(J, compute_uv=False)
    if s[-1] < 1e-12:
        raise SingularJacobian("payload index undefined at a singular Jacobian")
    w = np.abs(np.linalg.solve(J, np.asarray(e, dtype=float)))
    return float(np.sum(w * np.asarray(tau_max, dtype=float)))


def gpi_sweep(
    geom: LimbGeometry,
    limits: JointLimits = DEFAULT_LIMITS,
    workspace: WorkspaceSpec = WorkspaceSpec(),
    enforce_joint_box: bool = False,
) -> IndexReport:
    """Sweep the workspace grid and average the indices over reachable samples.

    Samples whose inverse kinematics has no real solution or whose
    Jacobian is singular are skipped and counted, not zero-filled.
    `limits` supplies the joint speed/torque caps; its angle box only
    filters samples when enforce_joint_box is set.
    """
    xs, ys, zs = workspace.grid()
    qd_max = np.full(3, limits.max_speed)
    tau_max = np.full(3, limits.max_torque)
    ik_limits = limits if enforce_joint_box else None
    eye = np.eye(3)
    pts, iso, vel, pay = [], [], [], []
    skipped = 0
    for x in xs:
        for y in ys:
            for z in zs:
                p = np.array([x, y, z])
                try:
                    qa = inverse_kinematics(p, geom, limits=ik_limits)
                    J = jacobian_active(qa, geom)
                    v = [velocity_index(J, qd_max, eye[i]) for i in range(3)]
                    f = [payload_index(J, tau_max, eye[i]) for i in range(3)]
                except KinematicsError:
                    skipped += 1
                    continue
                pts.append(p)
                iso.append(isotropy(J))
                vel.append(v)
                pay.append(f)
    if not pts:
        raise EmptyWorkspace("no reachable sample in the requested workspace")
    return IndexReport(
        points=np.array(pts),
        isotropy=np.array(iso),
        velocity=np.array(vel),
        payload=np.array(pay),
        skipped=skipped,
    )
