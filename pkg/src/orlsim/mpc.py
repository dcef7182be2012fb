"""Condensed-QP model predictive stance controller.

The stance problem tracks a 13-state body reference (Euler angles, CoM
position, angular velocity, CoM velocity, gravity slot) over an n-step
horizon with per-leg ground reaction forces as inputs:

    x_{k+1} = A_k x_k + B_k u_k
    min sum ||x_{k+1} - x_{k+1,d}||_Q + ||u_k||_R
    s.t. friction pyramid / normal-force bounds per stance foot

States are eliminated by condensing (X = A_qp x0 + B_qp U), leaving a
box-constrained QP over the force sequence U that the operator-splitting
solver handles in well under the control period.  Swing-leg force
variables are structurally zero and are eliminated before solving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import _skew
from .qp import OperatorSplittingQp, QpProblem, QpSettings

NX = 13  # state dimension
NU = 12  # input dimension (4 legs x 3 force components)


@dataclass
class MpcConfig:
    """Horizon, weights, and contact-force limits of the stance QP."""

    horizon: int = 10
    dt: float = 0.02  # horizon step; 10 steps span the 0.2 s prediction
    q_weights: np.ndarray = field(
        default_factory=lambda: np.array(
            [10.0, 10.0, 0.01, 2.0, 5.0, 50.0, 0.01, 0.01, 2.0, 0.1, 0.4, 0.4, 0.0]
        )
    )
    r_weight: float = 1e-4
    mu: float = 0.5
    f_min: float = 0.0
    f_max: float = 200.0

    def __post_init__(self):
        self.q_weights = np.asarray(self.q_weights, dtype=float).reshape(NX)
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if np.any(self.q_weights < 0) or self.r_weight < 0:
            raise ValueError("weights must be nonnegative")
        if self.f_min < 0 or self.f_max <= self.f_min:
            raise ValueError("force bounds must satisfy 0 <= f_min < f_max")


def rot_z(psi: float) -> np.ndarray:
    c, s = math.cos(psi), math.sin(psi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def build_state_space(
    yaw_seq,
    com_seq,
    footholds,
    contact_seq,
    inertia_body,
    mass: float,
    dt: float,
):
    """Per-step (A_k, B_k) of the discrete SRBD model.

    yaw_seq (n,), com_seq (n,3): reference yaw and CoM positions used for
    the yaw-aligned inertia and the foot moment arms r_j = foothold - com.
    Swing-leg columns of B_k are zeroed per contact_seq (n,4).
    """
    yaw_seq = np.asarray(yaw_seq, dtype=float)
    com_seq = np.asarray(com_seq, dtype=float).reshape(-1, 3)
    footholds = np.asarray(footholds, dtype=float).reshape(4, 3)
    contact_seq = np.asarray(contact_seq, dtype=bool).reshape(-1, 4)
    n = contact_seq.shape[0]
    steps = []
    eye3dt = np.eye(3) * dt
    eye3dtm = np.eye(3) * (dt / mass)
    Rz = Iw_inv = None
    last_yaw = None
    for k in range(n):
        if last_yaw is None or abs(yaw_seq[k] - last_yaw) > 1e-9:
            Rz = rot_z(yaw_seq[k])
            Iw_inv = np.linalg.inv(Rz @ inertia_body @ Rz.T)
            last_yaw = yaw_seq[k]
        A = np.eye(NX)
        A[0:3, 6:9] = Rz.T * dt
        A[3:6, 9:12] = eye3dt
        A[11, 12] = dt
        B = np.zeros((NX, NU))
        for j in range(4):
            if not contact_seq[k, j]:
                continue
            r = footholds[j] - com_seq[k]
            B[6:9, 3 * j : 3 * j + 3] = Iw_inv @ _skew(r) * dt
            B[9:12, 3 * j : 3 * j + 3] = eye3dtm
        steps.append((A, B))
    return steps


def condense(steps):
    """Stack the horizon into X = A_qp x0 + B_qp U.

    A_qp is (13n x 13); B_qp is (13n x 12n) block lower triangular with
    (k, j) block = A_{k} ... A_{j+1} B_j.
    """
    n = len(steps)
    A_qp = np.zeros((NX * n, NX))
    B_qp = np.zeros((NX * n, NU * n))
    prev_rows = None
    for k, (A, B) in enumerate(steps):
        rows = slice(NX * k, NX * (k + 1))
        if k == 0:
            A_qp[rows] = A
        else:
            A_qp[rows] = A @ A_qp[prev_rows]
            B_qp[rows, : NU * k] = A @ B_qp[prev_rows, : NU * k]
        B_qp[rows, NU * k : NU * (k + 1)] = B
        prev_rows = rows
    return A_qp, B_qp


def build_qp(A_qp, B_qp, x0, X_d, q_weights, r_weight: float, u_ref=None):
    """Condensed objective: H = 2 (B^T Q B + R), g = 2 B^T Q (A x0 - X_d).

    With u_ref given, the effort term becomes ||U - u_ref||_R (a gravity
    feedforward reference removes the steady-state height sag the plain
    ||U||_R term would trade for); u_ref = 0 is the plain objective.
    """
    n = B_qp.shape[0] // NX
    Qdiag = np.tile(np.asarray(q_weights, dtype=float), n)
    x0 = np.asarray(x0, dtype=float).reshape(NX)
    X_d = np.asarray(X_d, dtype=float).reshape(NX * n)
    QB = Qdiag[:, None] * B_qp
    H = 2.0 * (B_qp.T @ QB + r_weight * np.eye(B_qp.shape[1]))
    g = 2.0 * (QB.T @ (A_qp @ x0 - X_d))
    if u_ref is not None:
        g = g - 2.0 * r_weight * np.asarray(u_ref, dtype=float).reshape(NU * n)
    return H, g


def friction_constraints(contact_seq, normals, mu: float, f_min: float, f_max: float):
    """Linearized pyramid rows per stance foot per step, world-frame forces.

    normals (4,3): contact surface normal per leg; tangents complete the
    surface frame so the constraint set rotates with the terrain.  Rows
    per stance foot: +-t1, +-t2 pyramid faces (>= 0) and the normal force
    box [f_min, f_max].  Swing feet contribute equality rows f = 0.
    """
    contact_seq = np.asarray(contact_seq, dtype=bool).reshape(-1, 4)
    normals = np.asarray(normals, dtype=float).reshape(4, 3)
    n = contact_seq.shape[0]
    frames = []
    for j in range(4):
        nz = normals[j] / np.linalg.norm(normals[j])
        ref = np.array([1.0, 0.0, 0.0])
        if abs(nz @ ref) > 0.99:
            ref = np.array([0.0, 1.0, 0.0])
        t1 = np.cross(ref, nz)
        t1 /= np.linalg.norm(t1)
        t2 = np.cross(nz, t1)
        frames.append((t1, t2, nz))
    rows, lo, hi = [], [], []
    for k in range(n):
        for j in range(4):
            cols = slice(3 * j, 3 * j + 3)
            base = np.zeros((0, 3))
            if contact_seq[k, j]:
                t1, t2, nz = frames[j]
                face = [
                    (mu * nz + t1, 0.0, np.inf),
                    (mu * nz - t1, 0.0, np.inf),
                    (mu * nz + t2, 0.0, np.inf),
                    (mu * nz - t2, 0.0, np.inf),
                    (nz, f_min, f_max),
                ]
            else:
                face = [
                    (np.array([1.0, 0, 0]), 0.0, 0.0),
                    (np.array([0, 1.0, 0]), 0.0, 0.0),
                    (np.array([0, 0, 1.0]), 0.0, 0.0),
                ]
            for vec, lb, ub in face:
                row = np.zeros(NU * n)
                row[NU * k + 3 * j : NU * k + 3 * j + 3] = vec
                rows.append(row)
                lo.append(lb)
                hi.append(ub)
    C = np.array(rows) if rows else np.zeros((0, NU * n))
    return C, np.array(lo), np.array(hi)


@dataclass
class MpcSolution:
    """First-step forces plus diagnostics of the horizon solve."""

    forces: np.ndarray  # (4,3) world-frame GRFs for the current step
    U: np.ndarray  # full 12n force sequence
    iterations: int
    primal_residual: float
    dual_residual: float
    solve_time: float
    status: str


class StanceMpc:
    """Stateful horizon controller: builds, condenses, and solves each tick."""

    def __init__(self, config: MpcConfig, mass: float, inertia_body):
        self.config = config
        self.mass = float(mass)
        self.inertia = np.asarray(inertia_body, dtype=float).reshape(3, 3)
        self.solver = OperatorSplittingQp(QpSettings())
        self._warm_U = None
        self._warm_y = None
        self._warm_rows = None
        self._constraint_cache = {}

    def _gravity_feedforward(self, contact_seq, footholds, com_seq) -> np.ndarray:
        """Minimum-norm static equilibrium force distribution per step.

        Solves min ||f||^2 subject to sum f = (0, 0, m g) and zero net
        moment about the CoM over the stance feet.  Referencing the
        effort penalty to a true equilibrium keeps the QP from trading
        moment balance for net tangential thrust when footholds sit
        asymmetrically, as they do on slopes.
        """
        n = contact_seq.shape[0]
        footholds = np.asarray(footholds, dtype=float).reshape(4, 3)
        b = np.array([0.0, 0.0, self.mass * 9.81, 0.0, 0.0, 0.0])
        u_ref = np.zeros(NU * n)
        per_row = {}  # the distribution varies negligibly along the horizon
        for k in range(n):
            legs = np.flatnonzero(contact_seq[k])
            if legs.size == 0:
                continue
            key = contact_seq[k].tobytes()
            f = per_row.get(key)
            if f is None:
                A = np.zeros((6, 3 * legs.size))
                for i, j in enumerate(legs):
                    r = footholds[j] - com_seq[k]
                    A[0:3, 3 * i : 3 * i + 3] = np.eye(3)
                    A[3:6, 3 * i : 3 * i + 3] = _skew(r)
                # min-norm least squares; with two contacts the moment about
                # the support line is uncontrollable and must be left as a
                # clean residual rather than leaked into the force rows
                f = np.linalg.lstsq(A, b, rcond=1e-10)[0]
                per_row[key] = f
            for i, j in enumerate(legs):
                fz = np.clip(f[3 * i + 2], self.config.f_min, self.config.f_max)
                u_ref[NU * k + 3 * j : NU * k + 3 * j + 2] = f[3 * i : 3 * i + 2]
                u_ref[NU * k + 3 * j + 2] = fz
        return u_ref

    def solve(
        self,
        x0,
        X_d,
        footholds,
        contact_seq,
        normals=None,
        yaw_seq=None,
        com_seq=None,
    ) -> MpcSolution:
        cfg = self.config
        n = cfg.horizon
        x0 = np.asarray(x0, dtype=float).reshape(NX)
        X_d = np.asarray(X_d, dtype=float).reshape(n * NX)
        contact_seq = np.asarray(contact_seq, dtype=bool).reshape(n, 4)
        if normals is None:
            normals = np.tile(np.array([0.0, 0.0, 1.0]), (4, 1))
        if yaw_seq is None:
            yaw_seq = np.full(n, x0[2])
        if com_seq is None:
            com_seq = np.tile(x0[3:6], (n, 1))

        steps = build_state_space(
            yaw_seq, com_seq, footholds, contact_seq, self.inertia, self.mass, cfg.dt
        )
        A_qp, B_qp = condense(steps)
        u_ref = self._gravity_feedforward(contact_seq, footholds, com_seq)

        # eliminate structurally-zero swing forces before forming the
        # Hessian: only stance columns of B_qp carry information
        active = np.concatenate(
            [np.repeat(contact_seq[k], 3) for k in range(n)]
        )
        idx = np.flatnonzero(active)
        U = np.zeros(NU * n)
        if idx.size == 0:
            return MpcSolution(
                forces=np.zeros((4, 3)), U=U, iterations=0,
                primal_residual=0.0, dual_residual=0.0, solve_time=0.0,
                status="no-stance",
            )
        B_act = B_qp[:, idx]
        Qdiag = np.tile(cfg.q_weights, n)
        QB = Qdiag[:, None] * B_act
        Hr = 2.0 * (B_act.T @ QB + cfg.r_weight * np.eye(idx.size))
        gr = 2.0 * (QB.T @ (A_qp @ x0 - X_d)) - 2.0 * cfg.r_weight * u_ref[idx]
        key = contact_seq.tobytes() + normals.tobytes()
        cached = self._constraint_cache.get(key)
        if cached is None:
            C, lo, hi = friction_constraints(
                contact_seq, normals, cfg.mu, cfg.f_min, cfg.f_max
            )
            keep = np.flatnonzero(np.any(C[:, idx] != 0.0, axis=1))
            Cr = C[np.ix_(keep, idx)]
            # stance rows in deterministic (step, leg, face) order make the
            # duals remappable across contact-pattern changes
            row_keys = [
                (k, j, f)
                for k in range(n)
                for j in range(4)
                if contact_seq[k, j]
                for f in range(5)
            ]
            cached = (Cr, lo[keep], hi[keep], tuple(row_keys))
            if len(self._constraint_cache) > 64:
                self._constraint_cache.clear()
            self._constraint_cache[key] = cached
        Cr, lor, hir, row_keys = cached

        # previous forces remain a good primal guess even when the stance
        # pattern shifted: copy per-(step, leg) entries, zeros where a leg
        # newly swings; duals are remapped row-by-row
        x_ws = self._warm_U[idx] if self._warm_U is not None else None
        y_ws = None
        if self._warm_y is not None:
            if self._warm_rows == row_keys:
                y_ws = self._warm_y
            else:
                prev = dict(zip(self._warm_rows, self._warm_y))
                y_ws = np.array([prev.get(k, 0.0) for k in row_keys])

        prob = QpProblem(P=Hr, q=gr, A=Cr, l=lor, u=hir)
        res = self.solver.solve(prob, x0=x_ws, y0=y_ws)

        U[idx] = res.x
        self._warm_U, self._warm_y, self._warm_rows = U.copy(), res.y.copy(), row_keys
        return MpcSolution(
            forces=U[:NU].reshape(4, 3).copy(),
            U=U,
            iterations=res.iterations,
            primal_residual=res.primal_residual,
            dual_residual=res.dual_residual,
            solve_time=res.solve_time,
            status=res.status,
        )
