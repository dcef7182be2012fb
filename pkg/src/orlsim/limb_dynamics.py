"""Inverse dynamics of the 5-joint spanning-tree limb model.

The closed loop is cut at the foot-side joint, leaving a branched tree:
hip roll q1 carries the bracket; the co-axial pair (q2, q4) hangs two
chains off it, drive link + coupler (q2 -> q3) and thigh + shank
(q4 -> q5).  Passive angles follow the closure, so active-space dynamics
compose the tree model with the velocity map G:

    tau_a = G^T [ M(q) qdd + C(q, qd) qd + g(q) ]

evaluated at q = gamma(qa), qd = G qd_a, qdd = Gd qd_a + G qdd_a.

The tree terms come from two independent routes that are cross-checked
in tests: a recursive Newton-Euler pass (the workhorse), and an explicit
M / C / g assembly with the Coriolis matrix built from Christoffel
symbols of the analytic mass-matrix gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    GRAVITY,
    LimbGeometry,
    SingularJacobian,
    _mirror_qa,
    _MIRROR,
    _QA_FLIP,
    _skew,
    adjoint,
    exp_screw,
    expand_active_to_tree,
    g_matrix,
    jacobian_active,
    require_invertible,
    smallest_singular_value,
)

_ROD_RADIUS = 0.008  # m, thin-tube surrogate for link inertia


def _rod_inertia(mass: float, length: float, axis: int) -> np.ndarray:
    """Inertia of a thin rod about its COM, long axis along `axis`."""
    perp = mass * (length * length / 12.0 + _ROD_RADIUS**2 / 4.0)
    para = mass * _ROD_RADIUS**2 / 2.0
    diag = [perp, perp, perp]
    diag[axis] = para
    return np.diag(diag)


@dataclass
class LinkInertialModel:
    """Per-body mass properties of the spanning tree, in home pose.

    Bodies are ordered (bracket, drive, coupler, thigh, shank); COM
    positions are hip-frame home coordinates of the base chirality,
    inertias are about the COM in home orientation.  The default gives
    the bracket a nominal 0.01 kg and splits the remaining link budget
    over the four loop links proportionally to length, with rod-like
    inertia, so a leg totals `leg_mass` (0.4 kg, a quarter of the
    quadruped's 1.6 kg of links).
    """

    masses: np.ndarray
    com: np.ndarray
    inertia: np.ndarray
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -GRAVITY]))

    def __post_init__(self):
        self.masses = np.asarray(self.masses, dtype=float).reshape(5)
        self.com = np.asarray(self.com, dtype=float).reshape(5, 3)
        self.inertia = np.asarray(self.inertia, dtype=float).reshape(5, 3, 3)
        self.gravity = np.asarray(self.gravity, dtype=float).reshape(3)
        if np.any(self.masses <= 0):
            raise ValueError("all body masses must be positive")
        for I in self.inertia:
            if np.max(np.abs(I - I.T)) > 1e-12 or np.any(np.linalg.eigvalsh(I) <= 0):
                raise ValueError("inertia tensors must be symmetric positive definite")

    @classmethod
    def default_for(cls, geom: LimbGeometry, leg_mass: float = 0.4,
                    bracket_mass: float = 0.01) -> "LinkInertialModel":
        l1, l2, l3, sh = geom.l1, geom.l2, geom.l3, geom.shank
        lengths = np.array([l2, l3, l3, sh])
        link_masses = (leg_mass - bracket_mass) * lengths / lengths.sum()
        masses = np.concatenate([[bracket_mass], link_masses])
        com = np.array(
            [
                [0.0, l1 / 2.0, 0.0],               # bracket, along +y
                [0.0, l1, -l2 / 2.0],               # drive link
                [0.0, l1, -l2 - l3 / 2.0],          # coupler
                [0.0, l1, -l3 / 2.0],               # thigh
                [0.0, l1, -l3 - sh / 2.0],          # shank + foot
            ]
        )
        inertia = np.stack(
            [
                _rod_inertia(masses[0], l1, axis=1),
                _rod_inertia(masses[1], l2, axis=2),
                _rod_inertia(masses[2], l3, axis=2),
                _rod_inertia(masses[3], l3, axis=2),
                _rod_inertia(masses[4], sh, axis=2),
            ]
        )
        return cls(masses=masses, com=com, inertia=inertia)


def _ad(V: np.ndarray) -> np.ndarray:
    """6x6 spatial cross-product operator ad_V for V = (omega; v)."""
    w, v = V[:3], V[3:]
    A = np.zeros((6, 6))
    A[:3, :3] = _skew(w)
    A[3:, 3:] = _skew(w)
    A[3:, :3] = _skew(v)
    return A


def _inv_tf(T: np.ndarray) -> np.ndarray:
    R, p = T[:3, :3], T[:3, 3]
    Ti = np.eye(4)
    Ti[:3, :3] = R.T
    Ti[:3, 3] = -R.T @ p
    return Ti


# tree topology: parent body index per joint/body, -1 is the base
_PARENT = (-1, 0, 1, 0, 3)
_CHILDREN = {0: (1, 3), 1: (2,), 2: (), 3: (4,), 4: ()}


class LimbDynamics:
    """Spanning-tree dynamics bound to one limb geometry.

    Active-space operations accept the actuated coordinates (q1, q2, q4)
    of either chirality; right-side limbs are evaluated on the base
    chirality with the hip-roll input and output reflected.
    """

    def __init__(self, geom: LimbGeometry, model: LinkInertialModel | None = None):
        self.geom = geom
        self.model = model or LinkInertialModel.default_for(geom)
        l1, l2, l3 = geom.l1, geom.l2, geom.l3
        sa, ca = math.sin(geom.alpha), math.cos(geom.alpha)
        sb, cb = math.sin(geom.beta), math.cos(geom.beta)

        def screw(w, r):
            w = np.asarray(w, dtype=float)
            r = np.asarray(r, dtype=float)
            return np.concatenate([w, -np.cross(w, r)])

        # world-frame home screws, tree order (q1, q2, q3, q4, q5)
        self.S = np.stack(
            [
                screw([1, 0, 0], [0, 0, 0]),
                screw([0, 1, 0], [0, 0, 0]),
                screw([sa, ca, 0], [0, l1, -l2]),
                screw([0, 1, 0], [0, 0, 0]),
                screw([sb, cb, 0], [0, l1, -l3]),
            ]
        )
        # home body frames: COM position, world-aligned axes
        self.Mh = np.stack([np.eye(4)] * 5)
        for i in range(5):
            self.Mh[i] = np.eye(4)
            self.Mh[i][:3, 3] = self.model.com[i]
        # joint screws in their own body frame
        self.A = np.stack(
            [adjoint(_inv_tf(self.Mh[i])) @ self.S[i] for i in range(5)]
        )
        # spatial inertia at the COM frame
        self.Gs = np.zeros((5, 6, 6))
        for i in range(5):
            self.Gs[i][:3, :3] = self.model.inertia[i]
            self.Gs[i][3:, 3:] = self.model.masses[i] * np.eye(3)
        # path of joints from the root to each body
        self.paths = []
        for i in range(5):
            path, j = [], i
            while j >= 0:
                path.append(j)
                j = _PARENT[j]
            self.paths.append(tuple(reversed(path)))

    # ------------------------------------------------------------- tree

    def _body_poses(self, q: np.ndarray):
        """World pose of each body and the per-joint exponential prefix."""
        E = [None] * 5  # product of exponentials up to and incl. joint i
        for i in range(5):
            Ei = exp_screw(self.S[i], q[i])
            E[i] = Ei if _PARENT[i] < 0 else E[_PARENT[i]] @ Ei
        T = [E[i] @ self.Mh[i] for i in range(5)]
        return T, E

    def rnea(self, q, qd, qdd, gravity=None) -> np.ndarray:
        """Newton-Euler inverse dynamics of the tree: joint torques (5,)."""
        q = np.asarray(q, dtype=float).reshape(5)
        qd = np.asarray(qd, dtype=float).reshape(5)
        qdd = np.asarray(qdd, dtype=float).reshape(5)
        g = self.model.gravity if gravity is None else np.asarray(gravity, dtype=float)

        V = np.zeros((5, 6))
        Vd = np.zeros((5, 6))
        X_up = [None] * 5  # Ad of T_{i,parent}
        for i in range(5):
            p = _PARENT[i]
            Mp = np.eye(4) if p < 0 else self.Mh[p]
            T_pi = _inv_tf(Mp) @ exp_screw(self.S[i], q[i]) @ self.Mh[i]
            X = adjoint(_inv_tf(T_pi))
            X_up[i] = X
            Vp = V[p] if p >= 0 else np.zeros(6)
            Vdp = Vd[p] if p >= 0 else np.concatenate([np.zeros(3), -g])
            V[i] = X @ Vp + self.A[i] * qd[i]
            Vd[i] = X @ Vdp + _ad(V[i]) @ (self.A[i] * qd[i]) + self.A[i] * qdd[i]

        F = np.zeros((5, 6))
        tau = np.zeros(5)
        for i in reversed(range(5)):
            F[i] += self.Gs[i] @ Vd[i] - _ad(V[i]).T @ (self.Gs[i] @ V[i])
            for c in _CHILDREN[i]:
                F[i] += X_up[c].T @ F[c]
            tau[i] = self.A[i] @ F[i]
        return tau

    def _world_jac_cols(self, q: np.ndarray):
        """Space-frame Jacobian columns J_k = Ad_prefix S_k (6,) each."""
        J = np.zeros((5, 6))
        E_prev = {}
        for i in range(5):
            p = _PARENT[i]
            prefix = np.eye(4) if p < 0 else E_prev[p]
            J[i] = adjoint(prefix) @ self.S[i]
            E_prev[i] = prefix @ exp_screw(self.S[i], q[i])
        return J, E_prev

    def mass_matrix(self, q) -> np.ndarray:
        """Tree inertia matrix M(q), 5x5, symmetric positive definite."""
        q = np.asarray(q, dtype=float).reshape(5)
        J, E = self._world_jac_cols(q)
        M = np.zeros((5, 5))
        for b in range(5):
            Tb = E[b] @ self.Mh[b]
            Xi = adjoint(_inv_tf(Tb))
            Lam = Xi.T @ self.Gs[b] @ Xi
            idx = list(self.paths[b])
            Jb = J[idx].T  # 6 x len(path)
            Mb = Jb.T @ Lam @ Jb
            for a, ia in enumerate(idx):
                for c, ic in enumerate(idx):
                    M[ia, ic] += Mb[a, c]
        return M

    def mass_matrix_gradient(self, q) -> np.ndarray:
        """Exact dM/dq, shape (5,5,5); [..., k] is the derivative wrt q_k."""
        q = np.asarray(q, dtype=float).reshape(5)
        J, E = self._world_jac_cols(q)
        ads = [_ad(J[k]) for k in range(5)]
        dM = np.zeros((5, 5, 5))
        for b in range(5):
            Tb = E[b] @ self.Mh[b]
            Xi = adjoint(_inv_tf(Tb))
            Lam = Xi.T @ self.Gs[b] @ Xi
            idx = list(self.paths[b])
            pos = {j: n for n, j in enumerate(idx)}
            Jb = J[idx].T
            for k in idx:
                # joint columns move only if k precedes them on the path
                dJb = np.zeros_like(Jb)
                for j in idx:
                    if pos[k] < pos[j]:
                        dJb[:, pos[j]] = ads[k] @ Jb[:, pos[j]]
                dLam = -(ads[k].T @ Lam + Lam @ ads[k])
                dMb = dJb.T @ Lam @ Jb + Jb.T @ dLam @ Jb + Jb.T @ Lam @ dJb
                for a, ia in enumerate(idx):
                    for c, ic in enumerate(idx):
                        dM[ia, ic, k] += dMb[a, c]
        return dM

    def coriolis_matrix(self, q, qd) -> np.ndarray:
        """Christoffel-symbol Coriolis matrix C(q, qd), 5x5."""
        qd = np.asarray(qd, dtype=float).reshape(5)
        dM = self.mass_matrix_gradient(q)
        # c_ijk = (dM_ij/dq_k + dM_ik/dq_j - dM_jk/dq_i) / 2
        C = 0.5 * (
            np.einsum("ijk,k->ij", dM, qd)
            + np.einsum("ikj,k->ij", dM, qd)
            - np.einsum("jki,k->ij", dM, qd)
        )
        return C

    def gravity_vector(self, q, gravity=None) -> np.ndarray:
        return self.rnea(q, np.zeros(5), np.zeros(5), gravity=gravity)

    def potential_energy(self, q, gravity=None) -> float:
        q = np.asarray(q, dtype=float).reshape(5)
        g = self.model.gravity if gravity is None else np.asarray(gravity, dtype=float)
        T, _ = self._body_poses(q)
        return -sum(
            self.model.masses[i] * float(g @ T[i][:3, 3]) for i in range(5)
        )

    def kinetic_energy(self, q, qd) -> float:
        qd = np.asarray(qd, dtype=float).reshape(5)
        return 0.5 * float(qd @ self.mass_matrix(q) @ qd)

    def inverse_dynamics_tree(self, q, qd, qdd, gravity=None) -> np.ndarray:
        """Tree joint torques tau = M qdd + C qd + g via Newton-Euler."""
        return self.rnea(q, qd, qdd, gravity=gravity)

    # ------------------------------------------------------ active space

    def _base_args(self, qa, qd_a, qdd_a, gravity):
        qa = np.asarray(qa, dtype=float).reshape(3)
        qd_a = np.zeros(3) if qd_a is None else np.asarray(qd_a, dtype=float).reshape(3)
        qdd_a = np.zeros(3) if qdd_a is None else np.asarray(qdd_a, dtype=float).reshape(3)
        g = self.model.gravity if gravity is None else np.asarray(gravity, dtype=float)
        if self.geom.mirrored:
            return _mirror_qa(qa), _mirror_qa(qd_a), _mirror_qa(qdd_a), _MIRROR @ g
        return qa, qd_a, qdd_a, g

    def inverse_dynamics_active(self, qa, qd_a=None, qdd_a=None, gravity=None) -> np.ndarray:
        """Active joint torques: tau_a = G^T rnea(gamma(qa), G qd, Gd qd + G qdd)."""
        qa, qd_a, qdd_a, g = self._base_args(qa, qd_a, qdd_a, gravity)
        G, Gd = g_matrix(qa, qd_a, self.geom)
        q = self._tree_q(qa)
        tau = self.rnea(q, G @ qd_a, Gd @ qd_a + G @ qdd_a, gravity=g)
        tau_a = G.T @ tau
        return _QA_FLIP @ tau_a if self.geom.mirrored else tau_a

    def _tree_q(self, qa_base: np.ndarray) -> np.ndarray:
        from .geometry import passive_angle

        q3 = passive_angle(self.geom, qa_base)
        return np.array([qa_base[0], qa_base[1], q3, qa_base[2], q3])

    def active_terms(self, qa, qd_a=None, gravity=None):
        """Explicit (M_a, C_a, g_a) of the composed active-space dynamics.

        M_a = G^T M G,  C_a = G^T M Gd + G^T C G,  g_a = G^T g, with C the
        Christoffel matrix of the tree model.
        """
        qa, qd_a, _, g = self._base_args(qa, qd_a, None, gravity)
        G, Gd = g_matrix(qa, qd_a, self.geom)
        q = self._tree_q(qa)
        M = self.mass_matrix(q)
        C = self.coriolis_matrix(q, G @ qd_a)
        Ma = G.T @ M @ G
        Ca = G.T @ M @ Gd + G.T @ C @ G
        ga = G.T @ self.gravity_vector(q, gravity=g)
        if self.geom.mirrored:
            D = _QA_FLIP
            return D @ Ma @ D, D @ Ca @ D, D @ ga
        return Ma, Ca, ga

    def inverse_dynamics_active_assembled(self, qa, qd_a=None, qdd_a=None,
                                          gravity=None) -> np.ndarray:
        """Same torques as inverse_dynamics_active via the M_a/C_a/g_a form."""
        Ma, Ca, ga = self.active_terms(qa, qd_a, gravity=gravity)
        qd_a = np.zeros(3) if qd_a is None else np.asarray(qd_a, dtype=float).reshape(3)
        qdd_a = np.zeros(3) if qdd_a is None else np.asarray(qdd_a, dtype=float).reshape(3)
        return Ma @ qdd_a + Ca @ qd_a + ga


def foot_force_estimate(tau_a, qa, geom: LimbGeometry) -> np.ndarray:
    """Static foot force from active joint torques: f = J^-T tau_a."""
    J = jacobian_active(qa, geom)
    require_invertible(J)
    return np.linalg.solve(J.T, np.asarray(tau_a, dtype=float).reshape(3))


def joint_torque_for_foot_force(f, qa, geom: LimbGeometry) -> np.ndarray:
    """Active joint torques exerting foot force f (hip frame): tau = J^T f."""
    J = jacobian_active(qa, geom)
    return J.T @ np.asarray(f, dtype=float).reshape(3)
