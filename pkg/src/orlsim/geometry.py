"""Analytic kinematics of a single closed-loop limb.

The limb is a 3-actuator leg whose lower mechanism is a spatial 4R loop
(Bennett linkage) or, after setting both twist angles to zero, a planar
parallelogram four-bar.  Active joints are the hip roll q1 and the
co-axial pitch pair (q2, q4); the loop passively drives the knee angles
q3 = q5.  All positions are expressed in the hip frame {H}: x forward,
y lateral (toward the left side of the body), z up, origin on the hip
roll axis.

Conventions frozen here and relied on everywhere else:

* closure constant  k = csc((beta - alpha)/2); planar limbs use k = -1,
  which is the degenerate parallelogram case of the same formula
  (q5 = q2 - q4, constant transmission h = -1)
* passive angle     q3 = q5 = 2*atan(k * tan(eta)),  eta = (q4 - q2)/2
* fold singularity  eta -> +/- pi/2 (co-axial pair separation -> pi),
  where tan(eta) blows up; a second, stretch-type singularity at
  eta -> 0 leaves the closure well defined but degrades the Jacobian
  conditioning (exactly singular when l1 = 0), so it is guarded by the
  smallest-singular-value check of the inversion helpers instead
* right-side limbs are computed with the base (left) chirality on the
  reflected inputs (-q1, q2, q4) and the output mirrored across y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

GRAVITY = 9.81

# Tolerance for the fold singularity |eta -+ pi/2| and for Jacobian inversion.
ETA_FOLD_TOL = 1e-6
SIGMA_MIN_TOL = 1e-8

LEG_SIDES = ("front-left", "front-right", "rear-left", "rear-right")


class KinematicsError(Exception):
    """Base class for limb kinematics failures."""


class SingularClosure(KinematicsError):
    """Closure evaluated at (or too close to) a fold configuration."""


class SingularJacobian(KinematicsError):
    """Jacobian not invertible at the requested configuration."""


class WrongVariant(KinematicsError):
    """Operation called on the wrong limb variant."""


class Unreachable(KinematicsError):
    """Target position outside the reachable workspace."""


class Unassemblable(KinematicsError):
    """Loop cannot be assembled for the given geometry."""


class NoFeasibleBranch(KinematicsError):
    """No inverse-kinematics branch satisfies the joint limits."""


def normalize_angle(x):
    """Wrap angle(s) to (-pi, pi]."""
    r = np.mod(np.asarray(x, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    r = np.where(r == -np.pi, np.pi, r)
    return float(r) if np.isscalar(x) or np.ndim(x) == 0 else r


@dataclass(frozen=True)
class JointLimits:
    """Actuated-joint limits (angles in rad, speed rad/s, torque Nm).

    The angle box keeps the mechanism on one assembly branch, away from
    both the stretch (eta = 0) and fold (eta = pi/2) configurations, so
    inverse kinematics is one-to-one inside it.
    """

    q1_range: tuple = (-1.2, 1.2)
    q2_range: tuple = (-1.9, 0.9)
    q4_range: tuple = (-1.1, 1.1)
    eta_range: tuple = (0.1, 0.9)
    max_speed: float = 21.0
    max_torque: float = 33.5

    def contains(self, qa) -> bool:
        q1, q2, q4 = np.asarray(qa, dtype=float)
        eta = 0.5 * (q4 - q2)
        return (
            self.q1_range[0] <= q1 <= self.q1_range[1]
            and self.q2_range[0] <= q2 <= self.q2_range[1]
            and self.q4_range[0] <= q4 <= self.q4_range[1]
            and self.eta_range[0] <= eta <= self.eta_range[1]
        )

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Draw a uniformly random in-limit configuration."""
        while True:
            q1 = rng.uniform(*self.q1_range)
            q4 = rng.uniform(*self.q4_range)
            eta = rng.uniform(*self.eta_range)
            q2 = q4 - 2.0 * eta
            if self.q2_range[0] <= q2 <= self.q2_range[1]:
                return np.array([q1, q2, q4])


DEFAULT_LIMITS = JointLimits()


@dataclass(frozen=True)
class LimbGeometry:
    """Link lengths and twists of one limb.

    l1 is the lateral hip offset, l2/l3 the loop link lengths, l4 the
    foot extension beyond the loop.  For the spatial variant the twists
    must satisfy sin(alpha)/l2 = sin(beta)/l3 (the loop's mobility
    condition); the planar variant requires alpha = beta = 0.
    """

    l1: float = 0.06
    l2: float = 0.18
    l3: float = 0.18
    l4: float = 0.0
    alpha: float = math.radians(120.0)
    beta: float = math.radians(60.0)
    variant: str = "bennett"
    side: str = "front-left"

    def __post_init__(self):
        if self.variant not in ("bennett", "planar"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.side not in LEG_SIDES:
            raise ValueError(f"unknown side {self.side!r}")
        if self.l1 <= 0 or self.l2 <= 0 or self.l3 <= 0 or self.l4 < 0:
            raise ValueError("link lengths must be positive (l4 may be zero)")
        if self.variant == "bennett":
            ratio = abs(
                math.sin(self.alpha) / self.l2 - math.sin(self.beta) / self.l3
            )
            if ratio >= 1e-12:
                raise ValueError(
                    f"twists/lengths violate the loop ratio sin(a)/l2 = sin(b)/l3 "
                    f"(residual {ratio:.3e})"
                )
            if abs(math.sin(0.5 * (self.beta - self.alpha))) < 1e-12:
                raise Unassemblable("twist difference of zero leaves the loop rigid")
        else:
            if self.alpha != 0.0 or self.beta != 0.0:
                raise ValueError("planar variant requires alpha = beta = 0")

    @property
    def k(self) -> float:
        """Closure constant: csc((beta-alpha)/2) spatial, -1 planar."""
        if self.variant == "planar":
            return -1.0
        return 1.0 / math.sin(0.5 * (self.beta - self.alpha))

    @property
    def mirrored(self) -> bool:
        return self.side.endswith("right")

    @property
    def shank(self) -> float:
        """Length of the lower segment, knee to foot."""
        return self.l2 + self.l4

    @property
    def max_reach(self) -> float:
        """Largest |p| with a real inverse-kinematics solution."""
        sb = math.sin(self.beta)
        r = math.sqrt(self.l1**2 * sb**2 + self.l3**2)
        return math.sqrt(
            self.l1**2 + self.l3**2 + self.shank**2 + 2.0 * self.shank * r
        )

    def home_foot(self) -> np.ndarray:
        """Foot position at all-zero joint angles: (0, l1, -(l3+l2+l4))."""
        y = -self.l1 if self.mirrored else self.l1
        return np.array([0.0, y, -(self.l3 + self.l2 + self.l4)])

    def screws_home(self):
        """Base-chirality joint screws (S1, S2, S3) and home matrix M.

        S3 is the knee screw of the serial chain hip -> q4 -> q5 -> foot;
        its axis is tilted by the thigh twist beta and passes through the
        home knee point (0, l1, -l3).
        """
        sb, cb = math.sin(self.beta), math.cos(self.beta)
        s1 = np.array([1.0, 0, 0, 0, 0, 0])
        s2 = np.array([0.0, 1, 0, 0, 0, 0])
        s3 = np.array([sb, cb, 0.0, self.l3 * cb, -self.l3 * sb, -self.l1 * sb])
        m = np.eye(4)
        m[:3, 3] = (0.0, self.l1, -(self.l3 + self.l2 + self.l4))
        return s1, s2, s3, m


def bennett_default(side: str = "front-left", foot_extension: float = 0.0) -> LimbGeometry:
    return LimbGeometry(side=side, l4=foot_extension)


def planar_default(side: str = "front-left", foot_extension: float = 0.0) -> LimbGeometry:
    """Planar comparison limb: identical link lengths, twists zeroed."""
    return LimbGeometry(alpha=0.0, beta=0.0, variant="planar", side=side,
                        l4=foot_extension)


def limb_for_variant(variant: str, side: str = "front-left", **kw) -> LimbGeometry:
    if variant == "bennett":
        return bennett_default(side, **kw)
    if variant == "planar":
        return planar_default(side, **kw)
    raise ValueError(f"unknown variant {variant!r}")


@dataclass
class ActiveJointState:
    """Actuated joint state (q1, q2, q4) with optional rates."""

    q: np.ndarray
    qd: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float).reshape(3)
        self.qd = np.asarray(self.qd, dtype=float).reshape(3)


@dataclass
class TreeJointState:
    """Spanning-tree joint state (q1, q2, q3, q4, q5); q3 == q5 always."""

    q: np.ndarray
    qd: np.ndarray = field(default_factory=lambda: np.zeros(5))
    qdd: np.ndarray = field(default_factory=lambda: np.zeros(5))

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float).reshape(5)
        self.qd = np.asarray(self.qd, dtype=float).reshape(5)
        self.qdd = np.asarray(self.qdd, dtype=float).reshape(5)


@dataclass
class FootPose:
    """Foot position/orientation/velocity in the hip frame."""

    p: np.ndarray
    R: np.ndarray
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))


def _as_qa(qa) -> np.ndarray:
    if isinstance(qa, ActiveJointState):
        return qa.q
    return np.asarray(qa, dtype=float).reshape(3)


def _skew(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def exp_screw(S, theta: float) -> np.ndarray:
    """Homogeneous matrix exp([S] * theta) for a unit screw axis."""
    w, v = np.asarray(S[:3], dtype=float), np.asarray(S[3:], dtype=float)
    T = np.eye(4)
    if np.dot(w, w) < 1e-24:
        T[:3, 3] = v * theta
        return T
    W = _skew(w)
    s, c = math.sin(theta), math.cos(theta)
    T[:3, :3] = np.eye(3) + s * W + (1.0 - c) * (W @ W)
    T[:3, 3] = (np.eye(3) * theta + (1.0 - c) * W + (theta - s) * (W @ W)) @ v
    return T


def adjoint(T) -> np.ndarray:
    R, p = T[:3, :3], T[:3, 3]
    A = np.zeros((6, 6))
    A[:3, :3] = R
    A[3:, 3:] = R
    A[3:, :3] = _skew(p) @ R
    return A


_MIRROR = np.diag([1.0, -1.0, 1.0])
_QA_FLIP = np.diag([-1.0, 1.0, 1.0])


def _mirror_qa(qa: np.ndarray) -> np.ndarray:
    return np.array([-qa[0], qa[1], qa[2]])


def closure_eta(qa) -> float:
    qa = _as_qa(qa)
    return 0.5 * (qa[2] - qa[1])


def _check_fold(eta: float, tol: float = ETA_FOLD_TOL):
    if abs(abs(normalize_angle(eta)) - 0.5 * np.pi) < tol:
        raise SingularClosure(
            f"fold singularity: |q4 - q2| within tolerance of pi (eta={eta:.6f})"
        )


def passive_angle(geom: LimbGeometry, qa) -> float:
    """Knee angle q3 = q5 = 2 atan(k tan(eta)) from the loop closure."""
    qa = _as_qa(qa)
    eta = closure_eta(qa)
    _check_fold(eta)
    return 2.0 * math.atan(geom.k * math.tan(eta))


def transmission(geom: LimbGeometry, qa) -> float:
    """Closure velocity ratio h = k (1 + t^2) / (1 + k^2 t^2), t = tan(eta)."""
    eta = closure_eta(_as_qa(qa))
    _check_fold(eta)
    t = math.tan(eta)
    k = geom.k
    return k * (1.0 + t * t) / (1.0 + k * k * t * t)


def transmission_rate(geom: LimbGeometry, qa, qd_a) -> float:
    """Time derivative of h:  k(k^2-1) t / ((1+k^2 t^2)^2 c^2) * (qd2 - qd4)."""
    qa = _as_qa(qa)
    qd_a = np.asarray(qd_a, dtype=float).reshape(3)
    eta = closure_eta(qa)
    _check_fold(eta)
    t, c = math.tan(eta), math.cos(eta)
    k = geom.k
    return (
        k * (k * k - 1.0) * t / ((1.0 + k * k * t * t) ** 2 * c * c)
        * (qd_a[1] - qd_a[2])
    )


def expand_active_to_tree(qa, geom: LimbGeometry, qd_a=None, qdd_a=None) -> TreeJointState:
    """Map active joints to the 5-joint spanning tree via the loop closure.

    Spatial (bennett) limbs only; use closure_planar for the planar
    variant.  Optional rates are propagated through G and Gdot.
    """
    if geom.variant != "bennett":
        raise WrongVariant("expand_active_to_tree requires a bennett limb")
    return _expand(qa, geom, qd_a, qdd_a)


def closure_planar(qa, geom: LimbGeometry, qd_a=None, qdd_a=None) -> TreeJointState:
    """Planar parallelogram closure: q3 = q5 = q2 - q4 (non-folded branch).

    The co-axial four-bar with equal opposite links always assembles on
    the parallel branch; the fold |q4 - q2| -> pi is rejected as
    singular.
    """
    if geom.variant != "planar":
        raise WrongVariant("closure_planar requires a planar limb")
    return _expand(qa, geom, qd_a, qdd_a)


def _expand(qa, geom, qd_a=None, qdd_a=None) -> TreeJointState:
    qa = _as_qa(qa)
    q3 = passive_angle(geom, qa)
    q = np.array([qa[0], qa[1], q3, qa[2], q3])
    qd = np.zeros(5)
    qdd = np.zeros(5)
    if qd_a is not None:
        qd_a = np.asarray(qd_a, dtype=float).reshape(3)
        G, Gd = g_matrix(qa, qd_a, geom)
        qd = G @ qd_a
        if qdd_a is not None:
            qdd_a = np.asarray(qdd_a, dtype=float).reshape(3)
            qdd = Gd @ qd_a + G @ qdd_a
    return TreeJointState(q=q, qd=qd, qdd=qdd)


def tree_velocity(qa, qd_a, geom: LimbGeometry) -> np.ndarray:
    """Spanning-tree joint velocities qd = G(qa) qd_a."""
    G, _ = g_matrix(qa, np.zeros(3), geom)
    return G @ np.asarray(qd_a, dtype=float).reshape(3)


def g_matrix(qa, qd_a, geom: LimbGeometry):
    """Velocity map G (5x3) from active to tree joints, and its rate Gdot.

    Rows follow the tree order (q1, q2, q3, q4, q5); the passive rows are
    (0, -h, h) with the closure ratio h.
    """
    qa = _as_qa(qa)
    h = transmission(geom, qa)
    hd = transmission_rate(geom, qa, qd_a)
    G = np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -h, h],
            [0.0, 0.0, 1.0],
            [0.0, -h, h],
        ]
    )
    Gd = np.zeros((5, 3))
    Gd[2] = (0.0, -hd, hd)
    Gd[4] = (0.0, -hd, hd)
    return G, Gd


def _fk_base(geom: LimbGeometry, qa: np.ndarray) -> np.ndarray:
    """Hip-to-foot transform of the base (left) chirality."""
    s1, s2, s3, m = geom.screws_home()
    q5 = passive_angle(geom, qa)
    return (
        exp_screw(s1, qa[0]) @ exp_screw(s2, qa[2]) @ exp_screw(s3, q5) @ m
    )


def forward_kinematics(qa, geom: LimbGeometry, qd_a=None) -> FootPose:
    """Foot pose in the hip frame by the product of exponentials.

    Chain: exp([S1] q1) exp([S2] q4) exp([S3] q5) M with q5 from the
    closure.  Right-side limbs evaluate the base chirality at
    (-q1, q2, q4) and reflect the result across the y = 0 plane.
    """
    qa = _as_qa(qa)
    if geom.mirrored:
        T = _fk_base(geom, _mirror_qa(qa))
        p = _MIRROR @ T[:3, 3]
        R = _MIRROR @ T[:3, :3] @ _MIRROR
    else:
        T = _fk_base(geom, qa)
        p = T[:3, 3]
        R = T[:3, :3]
    v = np.zeros(3)
    if qd_a is not None:
        J = jacobian_active(qa, geom)
        v = J @ np.asarray(qd_a, dtype=float).reshape(3)
    return FootPose(p=p, R=R, v=v)


def foot_position(qa, geom: LimbGeometry) -> np.ndarray:
    return forward_kinematics(qa, geom).p


def _jacobian_base(geom: LimbGeometry, qa: np.ndarray) -> np.ndarray:
    """3x3 active Jacobian of the base chirality (foot velocity per qd_a)."""
    s1, s2, s3, m = geom.screws_home()
    q5 = passive_angle(geom, qa)
    T1 = exp_screw(s1, qa[0])
    T2 = T1 @ exp_screw(s2, qa[2])
    Js = np.column_stack([s1, adjoint(T1) @ s2, adjoint(T2) @ s3])
    p = (T2 @ exp_screw(s3, q5) @ m)[:3, 3]
    J_serial = np.hstack([-_skew(p), np.eye(3)]) @ Js
    h = transmission(geom, qa)
    coupling = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -h, h]])
    return J_serial @ coupling


def jacobian_active(qa, geom: LimbGeometry) -> np.ndarray:
    """Analytic Jacobian mapping (qd1, qd2, qd4) to foot velocity in {H}."""
    qa = _as_qa(qa)
    if geom.mirrored:
        return _MIRROR @ _jacobian_base(geom, _mirror_qa(qa)) @ _QA_FLIP
    return _jacobian_base(geom, qa)


def smallest_singular_value(J) -> float:
    return float(np.linalg.svd(J, compute_uv=False)[-1])


def require_invertible(J) -> np.ndarray:
    if smallest_singular_value(J) < SIGMA_MIN_TOL:
        raise SingularJacobian("Jacobian is singular at this configuration")
    return J


IK_BRANCHES = {
    "knee-back-hip-in": (+1, +1),
    "knee-back-hip-out": (+1, -1),
    "knee-fwd-hip-in": (-1, +1),
    "knee-fwd-hip-out": (-1, -1),
}
DEFAULT_BRANCH = "knee-back-hip-in"


def _ik_base(geom: LimbGeometry, p: np.ndarray, s5: int, s4: int):
    """One analytic IK branch for the base chirality; None if no real root."""
    px, py, pz = p
    sb, cb = math.sin(geom.beta), math.cos(geom.beta)
    l1, l3, sh = geom.l1, geom.l3, geom.shank
    A1 = 2.0 * l1 * sh * sb
    B1 = 2.0 * l3 * sh
    C1 = l1 * l1 + sh * sh + l3 * l3 - (px * px + py * py + pz * pz)
    disc1 = A1 * A1 + B1 * B1 - C1 * C1
    if disc1 < 0.0:
        return None
    q5 = math.atan2(-C1, s5 * math.sqrt(disc1)) - math.atan2(B1, A1)
    c5, s5v = math.cos(q5), math.sin(q5)
    A2 = l3 + sh * c5
    B2 = sh * cb * s5v
    C2 = px
    disc2 = A2 * A2 + B2 * B2 - C2 * C2
    if disc2 < 0.0:
        return None
    q4 = math.atan2(-C2, s4 * math.sqrt(disc2)) - math.atan2(B2, A2)
    c4, s4v = math.cos(q4), math.sin(q4)
    A3 = -sh * cb * s4v * s5v + sh * c4 * c5 + l3 * c4
    B3 = l1 + sh * sb * s5v
    den = py * py + pz * pz
    if den < 1e-16:
        return None
    q1 = math.atan2(pz * B3 + py * A3, py * B3 - pz * A3)
    # recover q2 from the closure; atan2 form stays continuous through q5 = 0
    q2 = q4 + math.pi + 2.0 * math.atan2(
        geom.k * math.cos(0.5 * q5), math.sin(0.5 * q5)
    )
    qa = np.array([normalize_angle(q1), normalize_angle(q2), normalize_angle(q4)])
    return qa, q5


def ik_branches(p, geom: LimbGeometry) -> dict:
    """All analytic IK solutions, keyed by branch name, FK-verified."""
    p = np.asarray(p, dtype=float).reshape(3)
    p_base = _MIRROR @ p if geom.mirrored else p
    out = {}
    for name, (s5, s4) in IK_BRANCHES.items():
        r = _ik_base(geom, p_base, s5, s4)
        if r is None:
            continue
        qa, _ = r
        if geom.mirrored:
            qa = _mirror_qa(qa)
        try:
            ok = np.linalg.norm(foot_position(qa, geom) - p) < 1e-7
        except KinematicsError:
            ok = False
        if ok:
            out[name] = qa
    return out


def inverse_kinematics(p, geom: LimbGeometry, branch: str = DEFAULT_BRANCH,
                       limits: JointLimits | None = None) -> np.ndarray:
    """Active joint angles reaching foot position p (hip frame).

    branch selects one of the four analytic solutions; the default
    contains the home/stance posture.  With limits given, falls back
    over the remaining branches and raises NoFeasibleBranch when none
    fits; without limits raises Unreachable on a negative discriminant.
    """
    p = np.asarray(p, dtype=float).reshape(3)
    if np.linalg.norm(p) > geom.max_reach + 1e-12:
        raise Unreachable(
            f"|p| = {np.linalg.norm(p):.4f} exceeds reach {geom.max_reach:.4f}"
        )
    p_base = _MIRROR @ p if geom.mirrored else p
    s5, s4 = IK_BRANCHES[branch]
    r = _ik_base(geom, p_base, s5, s4)
    if r is None:
        if limits is None:
            raise Unreachable("no real solution on the requested branch")
    else:
        qa, _ = r
        if geom.mirrored:
            qa = _mirror_qa(qa)
        if limits is None or limits.contains(qa):
            return qa
    if limits is not None:
        for name, (s5, s4) in IK_BRANCHES.items():
            if name == branch:
                continue
            r = _ik_base(geom, p_base, s5, s4)
            if r is None:
                continue
            qa, _ = r
            if geom.mirrored:
                qa = _mirror_qa(qa)
            if limits.contains(qa):
                return qa
        raise NoFeasibleBranch("all IK branches violate the joint limits")
    raise Unreachable("no real IK solution")


def closure_residual(geom: LimbGeometry, qa, q3: float) -> float:
    """Residual of the loop closure tan(pi/2 - eta) tan(q3/2) - k.

    Undefined at eta = 0 (the cot factor); kinematics tests evaluate it
    away from the stretch configuration.
    """
    eta = closure_eta(_as_qa(qa))
    return math.tan(0.5 * (math.pi - 2.0 * eta)) * math.tan(0.5 * q3) - geom.k


# torque coupling between the three actuators and the active joints:
# tau_joint = T tau_actuator, with the co-axial pair differencing row.
COUPLING_T = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, -1.0], [0.0, 0.0, 1.0]])
COUPLING_T_INV = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]])


def joint_torque_from_actuator(tau_act) -> np.ndarray:
    """Active-joint torques tau = T tau' from actuator torques."""
    return COUPLING_T @ np.asarray(tau_act, dtype=float).reshape(3)


def actuator_torque_from_joint(tau_joint) -> np.ndarray:
    """Inverse coupling: actuator torques tau' = T^-1 tau."""
    return COUPLING_T_INV @ np.asarray(tau_joint, dtype=float).reshape(3)


def actuator_velocity_from_joint(qd_a) -> np.ndarray:
    """Actuator speeds conjugate to the torque coupling: theta' = T^T qd."""
    return COUPLING_T.T @ np.asarray(qd_a, dtype=float).reshape(3)


def actuator_position_from_joint(qa) -> np.ndarray:
    """Actuator angles (the coupling is constant, so positions map alike)."""
    return COUPLING_T.T @ _as_qa(qa)
