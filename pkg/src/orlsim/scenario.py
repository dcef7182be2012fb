"""Closed-loop locomotion scenarios and sweep experiments.

One scenario = plant + gait + swing controller + stance MPC run end to
end at the control rate, fully deterministic for a given config.  The
sweep harness runs a motion x velocity x foothold x variant grid and
tabulates the energy analysis per cell, keeping failed cells flagged
instead of dropping them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .body import (
    BodyState,
    ContactState,
    Disturbance,
    EulerSingularity,
    RobotModel,
    disturbance_wrench,
    dynamics_step,
    stance_joint_load,
)
from .energy import EnergyReport, energy_report
from .geometry import (
    KinematicsError,
    Unreachable,
    actuator_position_from_joint,
    actuator_torque_from_joint,
    actuator_velocity_from_joint,
    inverse_kinematics,
    jacobian_active,
)
from .limb_dynamics import LimbDynamics
from .locomotion import (
    CommandProfile,
    GaitSchedule,
    ReferenceState,
    SwingConfig,
    com_reference,
    contact_sequence,
    cycloid_trajectory,
    foothold_target,
    gait_phase,
    neutral_point,
    swing_feedforward,
    swing_torque,
)
from .mpc import MpcConfig, StanceMpc, rot_z
from .terrain import Terrain

CONTROL_RATE = 250.0
MOTIONS = ("stand", "forward", "lateral", "turn", "push")
REACH_MARGIN = 0.95  # fraction of leg reach available at touchdown lead
NOMINAL_EXTENSION = 0.726  # posture target as a fraction of leg reach


class ControllerDiverged(Exception):
    """Attitude or height left the safety envelope; partial log retained."""


@dataclass
class ScenarioConfig:
    """Everything needed to reproduce one run."""

    motion: str = "forward"
    variant: str = "bennett"
    target_speed: float = 0.5  # m/s, or rad/s for turning
    foothold_offset: float = 0.0
    foot_extension: float = 0.06  # locomotion legs carry the extended foot
    duration: float = 10.0
    seed: int = 0
    terrain: Terrain = field(default_factory=Terrain)
    gait: GaitSchedule = field(default_factory=GaitSchedule)
    mpc: MpcConfig = field(default_factory=MpcConfig)
    swing: SwingConfig | None = None
    disturbances: tuple = ()
    ramp_time: float = 1.25
    standing_height: float | None = None  # None: squat policy from the offset
    # pose-reference windup limit; None scales with the commanded speed so
    # cruising keeps a strong pull while station-keeping yields to pushes
    position_clamp: float | None = None
    yaw_clamp: float = 0.25  # rad

    def resolved_position_clamp(self) -> float:
        if self.position_clamp is not None:
            return self.position_clamp
        v = abs(self.target_speed) if self.motion in ("forward", "lateral") else 0.0
        return max(0.10, 0.55 * v)

    def __post_init__(self):
        if self.motion not in MOTIONS:
            raise ValueError(f"unknown motion {self.motion!r}")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.motion in ("forward", "lateral", "turn") and not (
            0.05 <= abs(self.target_speed) <= 3.0
        ):
            raise ValueError("target speed outside the supported envelope")
        if self.motion == "push" and not self.disturbances:
            # default lateral shove: body-weight force for 0.2 s mid-run
            self.disturbances = (
                Disturbance(force=(0.0, 140.0, 0.0),
                            start=0.4 * self.duration, duration=0.2),
            )

    def command(self) -> CommandProfile:
        if self.motion == "forward":
            return CommandProfile((self.target_speed, 0.0), 0.0,
                                  self.ramp_time, self.duration)
        if self.motion == "lateral":
            return CommandProfile((0.0, self.target_speed), 0.0,
                                  self.ramp_time, self.duration)
        if self.motion == "turn":
            return CommandProfile((0.0, 0.0), self.target_speed,
                                  self.ramp_time, self.duration)
        return CommandProfile((0.0, 0.0), 0.0, self.ramp_time, self.duration)

    def height(self, model: RobotModel) -> float:
        """Body height target: squats as sprawl and stride lead grow.

        Posture keeps the stance leg near a comfortable radial extension
        (NOMINAL_EXTENSION fraction of reach, deep in the well-conditioned
        workspace); a second bound guarantees the foothold stays reachable
        at its touchdown lead of half a stance of commanded travel.
        """
        if self.standing_height is not None:
            return self.standing_height
        geom = model.legs[0]
        sprawl = geom.l1 + self.foothold_offset
        posture2 = (NOMINAL_EXTENSION * geom.max_reach) ** 2 - sprawl**2
        lead = abs(self.target_speed) * self.gait.stance_time / 2.0
        lead_x = lead if self.motion == "forward" else 0.0
        lead_y = lead if self.motion == "lateral" else 0.0
        cap2 = (
            (REACH_MARGIN * geom.max_reach) ** 2
            - (sprawl + lead_y) ** 2
            - lead_x**2
        )
        h2 = min(posture2, cap2, model.standing_height**2)
        return math.sqrt(max(h2, 0.15**2))


@dataclass
class SimLog:
    """Per-tick time series of one run (see serialize for the CSV layout)."""

    t: np.ndarray
    state: np.ndarray  # (n, 13)
    reference: np.ndarray  # (n, 13) first-step reference
    grf: np.ndarray  # (n, 12) world-frame forces, leg-major
    tau_actuator: np.ndarray  # (n, 12)
    omega_actuator: np.ndarray  # (n, 12)
    q_actuator: np.ndarray  # (n, 12)
    tau_joint: np.ndarray  # (n, 12)
    omega_joint: np.ndarray  # (n, 12)
    contacts: np.ndarray  # (n, 4) bool
    solve_ms: np.ndarray  # (n,)
    iterations: np.ndarray  # (n,)
    failed: bool = False
    failure: str = ""
    workspace_violations: int = 0


@dataclass
class LegRuntime:
    foothold: np.ndarray
    lift_point: np.ndarray
    target: np.ndarray
    in_stance: bool = True
    qa: np.ndarray = field(default_factory=lambda: np.zeros(3))
    tau_ff: np.ndarray = field(default_factory=lambda: np.zeros(3))
    ff_age: int = 10**9  # ticks since the feedforward was refreshed


def clamped_leg_ik(model: RobotModel, state: BodyState, leg: int, foot_world):
    """IK with a radial clamp into the reachable shell; flags overflow."""
    geom = model.legs[leg]
    p_hip = model.foot_hip_frame(state, leg, foot_world)
    clamped = False
    r = np.linalg.norm(p_hip)
    if r > 0.995 * geom.max_reach:
        p_hip = p_hip * (0.995 * geom.max_reach / r)
        clamped = True
    try:
        qa = inverse_kinematics(p_hip, geom)
    except Unreachable:
        p_hip = p_hip * (0.98 * geom.max_reach / np.linalg.norm(p_hip))
        qa = inverse_kinematics(p_hip, geom)
        clamped = True
    return qa, clamped


def mpc_tick(
    mpc: StanceMpc,
    state: BodyState,
    model: RobotModel,
    footholds,
    contact_seq,
    X_d,
    normals=None,
    yaw_seq=None,
    com_seq=None,
):
    """One stance-control tick: horizon solve plus stance joint torques.

    Returns the MPC solution, joint-side torques (4, 3), the actuator-side
    torques after the coupling map (4, 3), and the stance joint rates
    (4, 3); swing-leg rows are zero.
    """
    footholds = np.asarray(footholds, dtype=float).reshape(4, 3)
    contact_seq = np.asarray(contact_seq, dtype=bool)
    sol = mpc.solve(
        state.as_vector(), X_d, footholds, contact_seq,
        normals=normals, yaw_seq=yaw_seq, com_seq=com_seq,
    )
    tau_joint = np.zeros((4, 3))
    tau_act = np.zeros((4, 3))
    qd = np.zeros((4, 3))
    for j in range(4):
        if not contact_seq[0, j]:
            continue
        qa, _ = clamped_leg_ik(model, state, j, footholds[j])
        try:
            tau_joint[j], qd[j] = stance_joint_load(
                sol.forces[j], qa, state, model, j, foothold_world=footholds[j]
            )
        except KinematicsError:
            continue
        tau_act[j] = actuator_torque_from_joint(tau_joint[j])
    return sol, tau_joint, tau_act, qd


class Simulation:
    """Deterministic closed-loop runner for one scenario."""

    def __init__(self, config: ScenarioConfig, model: RobotModel | None = None):
        self.config = config
        self.model = model or RobotModel.with_variant(
            config.variant, foot_extension=config.foot_extension
        )
        self.dt = 1.0 / CONTROL_RATE
        self.command = config.command()
        self.swing_cfg = config.swing or SwingConfig(
            neutral_offset=config.foothold_offset
        )
        self.mpc = StanceMpc(config.mpc, self.model.mass, self.model.inertia)
        self.dyn = [LimbDynamics(g) for g in self.model.legs]
        self.height = config.height(self.model)
        terr = config.terrain
        if terr.kind == "heightfield":
            terr = replace(terr, seed=config.seed)
        self.terrain = terr
        grade = self.terrain.nominal_grade()
        # body state pitch is ZYX (nose-down positive); the foothold
        # adjustment formula takes nose-up-positive incline pitch
        self.pitch_des = -math.atan(grade)
        self.pitch_incline = math.atan(grade)
        self.pos_clamp = config.resolved_position_clamp()
        self.stand = config.motion == "stand"

    # ----------------------------------------------------------- helpers

    def _initial_state(self) -> BodyState:
        z0 = self.terrain.reference_height(0.0, 0.0) + self.height
        return BodyState(euler=[0.0, self.pitch_des, 0.0], p=[0.0, 0.0, z0])

    def _initial_legs(self, state: BodyState):
        legs = []
        for j in range(4):
            xy = neutral_point(self.model, j, self.swing_cfg)
            p_w = state.p[:2] + xy
            z = self.terrain.height(p_w[0], p_w[1])
            foot = np.array([p_w[0], p_w[1], z])
            legs.append(
                LegRuntime(foothold=foot, lift_point=foot.copy(), target=foot.copy())
            )
        return legs

    def _swing_target_world(self, state: BodyState, ref: ReferenceState,
                            t: float, leg: int) -> np.ndarray:
        yaw = state.euler[2]
        Rz2 = rot_z(yaw)[:2, :2]
        v_body = Rz2.T @ state.v[:2]
        v_des = self.command.velocity(t)
        w_des = self.command.yaw_rate(t)
        p_body = foothold_target(
            v_body,
            v_des,
            w_des,
            self.config.gait.stance_time,
            neutral_point(self.model, leg, self.swing_cfg),
            self.swing_cfg,
            desired_height=self.height,
            desired_pitch=self.pitch_incline,
        )
        xy = state.p[:2] + Rz2 @ p_body
        z = self.terrain.height(xy[0], xy[1])
        return np.array([xy[0], xy[1], z])

    def _leg_ik(self, state: BodyState, leg: int, foot_world):
        return clamped_leg_ik(self.model, state, leg, foot_world)

    # -------------------------------------------------------------- run

    def run(self) -> SimLog:
        cfg = self.config
        n = int(round(cfg.duration * CONTROL_RATE))
        state = self._initial_state()
        legs = self._initial_legs(state)
        ref = ReferenceState()
        rows = {
            k: []
            for k in (
                "t state reference grf tau_a om_a q_a tau_j om_j contacts "
                "ms iters"
            ).split()
        }
        failed = False
        failure = ""
        violations = 0
        gravity_w = np.array([0.0, 0.0, -9.81])

        t = 0.0
        for _ in range(n):
            phases = gait_phase(t, cfg.gait)
            if self.stand:
                stance_now = [True] * 4
            else:
                stance_now = [ph.stance for ph in phases]

            # phase transitions
            for j, leg in enumerate(legs):
                if leg.in_stance and not stance_now[j]:
                    leg.in_stance = False
                    leg.lift_point = leg.foothold.copy()
                    leg.target = self._swing_target_world(state, ref, t, j)
                    leg.ff_age = 10**9
                elif not leg.in_stance and stance_now[j]:
                    leg.in_stance = True
                    leg.foothold = leg.target.copy()

            # body reference over the horizon
            X_d = com_reference(
                ref,
                self.command,
                t,
                cfg.mpc.horizon,
                cfg.mpc.dt,
                self.terrain.reference_height,
                self.height,
                desired_pitch=self.pitch_des,
            )

            # stance control
            contact_seq = contact_sequence(
                t, cfg.gait, cfg.mpc.horizon, cfg.mpc.dt, stand=self.stand
            )
            footholds = np.stack(
                [leg.foothold if leg.in_stance else leg.target for leg in legs]
            )
            normals = np.stack(
                [self.terrain.normal(f[0], f[1]) for f in footholds]
            )
            Xd_steps = X_d.reshape(cfg.mpc.horizon, 13)
            tick_t0 = time.perf_counter()
            # moment arms come from the predicted body path, not the
            # reference: phantom arms would convert tracking error into
            # fictitious moments
            ks = np.arange(cfg.mpc.horizon)[:, None]
            com_seq = state.p[None, :] + state.v[None, :] * (ks * cfg.mpc.dt)
            yaw_seq = state.euler[2] + self.command.yaw_rate(t) * ks[:, 0] * cfg.mpc.dt
            # height rides the terrain under the predicted footprint; tying
            # it to the integrated reference couples z-error into forward
            # thrust through the tilted friction cone on inclines
            for k in range(cfg.mpc.horizon):
                Xd_steps[k, 5] = (
                    self.terrain.reference_height(com_seq[k, 0], com_seq[k, 1])
                    + self.height
                )
            X_d = Xd_steps.reshape(-1)
            sol = self.mpc.solve(
                state.as_vector(),
                X_d,
                footholds,
                contact_seq,
                normals=normals,
                yaw_seq=yaw_seq,
                com_seq=com_seq,
            )
            mpc_tick_ms = (time.perf_counter() - tick_t0) * 1e3
            if sol.status == "max_iterations" and self.mpc._warm_U is not None:
                pass  # keep the returned best iterate; warm start recovers

            # per-leg joint-space quantities
            R = state.rotation()
            g_hip = R.T @ gravity_w
            tau_j_row = np.zeros(12)
            om_j_row = np.zeros(12)
            q_row = np.zeros(12)
            grf_row = np.zeros(12)
            for j, leg in enumerate(legs):
                geom = self.model.legs[j]
                if leg.in_stance:
                    qa, clamped = self._leg_ik(state, j, leg.foothold)
                    violations += clamped
                    f = sol.forces[j]
                    try:
                        tau_a, qd_a = stance_joint_load(
                            f, qa, state, self.model, j, foothold_world=leg.foothold
                        )
                    except KinematicsError:
                        tau_a, qd_a = np.zeros(3), np.zeros(3)
                    grf_row[3 * j : 3 * j + 3] = f
                else:
                    if not self.stand:
                        leg.target = self._swing_target_world(state, ref, t, j)
                    p_d, v_d, a_d = cycloid_trajectory(
                        leg.lift_point,
                        leg.target,
                        self.swing_cfg.clearance,
                        phases[j].fraction,
                        swing_time=cfg.gait.swing_time,
                    )
                    qa, clamped = self._leg_ik(state, j, p_d)
                    violations += clamped
                    # hip-frame reference rates for the kinematic swing leg
                    v_hip = R.T @ (v_d - state.v - np.cross(state.omega, p_d - state.p))
                    a_hip = R.T @ a_d
                    try:
                        J = jacobian_active(qa, geom)
                        qd_a = np.linalg.solve(J, v_hip)
                        # the inverse-dynamics feedforward varies smoothly
                        # along the swing; refresh at 50 Hz and hold
                        if leg.ff_age >= 5:
                            leg.tau_ff = swing_feedforward(
                                self.dyn[j], qa, v_hip, a_hip, gravity=g_hip
                            )
                            leg.ff_age = 0
                        leg.ff_age += 1
                        p_hip = self.model.foot_hip_frame(state, j, p_d)
                        tau_a = swing_torque(
                            p_hip, v_hip, leg.tau_ff, p_hip, v_hip, qa, geom,
                            self.swing_cfg,
                        )
                    except (KinematicsError, np.linalg.LinAlgError):
                        tau_a, qd_a = np.zeros(3), np.zeros(3)
                leg.qa = qa
                tau_j_row[3 * j : 3 * j + 3] = tau_a
                om_j_row[3 * j : 3 * j + 3] = qd_a
                q_row[3 * j : 3 * j + 3] = qa

            # plant step with scheduled contacts and scheduled forces
            cs = ContactState(
                in_contact=np.array([leg.in_stance for leg in legs]),
                footholds=np.stack([leg.foothold for leg in legs]),
                forces=sol.forces.copy(),
            )
            fe, te = disturbance_wrench(cfg.disturbances, t)
            try:
                state = dynamics_step(
                    state, cs, sol.forces, self.model, self.dt,
                    ext_force=fe, ext_torque=te,
                )
            except EulerSingularity:
                failed = True
                failure = "euler-singularity"

            rows["t"].append(t)
            rows["state"].append(state.as_vector())
            rows["reference"].append(Xd_steps[0])
            rows["grf"].append(grf_row)
            rows["tau_j"].append(tau_j_row)
            rows["om_j"].append(om_j_row)
            tau_act = np.concatenate(
                [
                    actuator_torque_from_joint(tau_j_row[3 * j : 3 * j + 3])
                    for j in range(4)
                ]
            )
            om_act = np.concatenate(
                [
                    actuator_velocity_from_joint(om_j_row[3 * j : 3 * j + 3])
                    for j in range(4)
                ]
            )
            q_act = np.concatenate(
                [actuator_position_from_joint(q_row[3 * j : 3 * j + 3]) for j in range(4)]
            )
            rows["tau_a"].append(tau_act)
            rows["om_a"].append(om_act)
            rows["q_a"].append(q_act)
            rows["contacts"].append([leg.in_stance for leg in legs])
            rows["ms"].append(mpc_tick_ms)
            rows["iters"].append(sol.iterations)

            if failed:
                break

            # safety envelope
            z_ref = Xd_steps[0][5]
            if (
                abs(state.euler[0]) > 0.6
                or abs(state.euler[1] - self.pitch_des) > 0.6
                or abs(state.p[2] - z_ref) > 0.15
            ):
                failed = True
                failure = "attitude-or-height"
                break

            ref.advance(self.command.velocity(t), self.command.yaw_rate(t), self.dt)
            # leaky integration: the pose reference never runs further than
            # the body can recover within a stride
            ref.position = np.clip(
                ref.position,
                state.p[:2] - self.pos_clamp,
                state.p[:2] + self.pos_clamp,
            )
            yaw_err = ref.yaw - state.euler[2]
            if abs(yaw_err) > cfg.yaw_clamp:
                ref.yaw = state.euler[2] + math.copysign(cfg.yaw_clamp, yaw_err)
            t += self.dt

        return SimLog(
            t=np.array(rows["t"]),
            state=np.array(rows["state"]),
            reference=np.array(rows["reference"]),
            grf=np.array(rows["grf"]),
            tau_actuator=np.array(rows["tau_a"]),
            omega_actuator=np.array(rows["om_a"]),
            q_actuator=np.array(rows["q_a"]),
            tau_joint=np.array(rows["tau_j"]),
            omega_joint=np.array(rows["om_j"]),
            contacts=np.array(rows["contacts"], dtype=bool),
            solve_ms=np.array(rows["ms"]),
            iterations=np.array(rows["iters"]),
            failed=failed,
            failure=failure,
            workspace_violations=violations,
        )


def run_scenario(config: ScenarioConfig, model: RobotModel | None = None):
    """Run one scenario: (log, energy report or None, summary dict)."""
    sim = Simulation(config, model)
    t0 = time.perf_counter()
    log = sim.run()
    wall = time.perf_counter() - t0
    report = None
    if not log.failed and config.motion != "stand":
        try:
            report = energy_report(log, sim.model, motion=config.motion)
        except Exception:
            report = None
    summary = summarize(config, sim, log, report, wall)
    return log, report, summary


def summarize(config, sim, log, report, wall_time) -> dict:
    # cruise-only window: clear of both command ramps for default profiles
    sl = slice(int(0.30 * len(log.t)), max(int(0.80 * len(log.t)), 2))
    err = log.state[sl] - log.reference[sl]
    v_err = err[:, 9:11]
    summary = {
        "motion": config.motion,
        "variant": config.variant,
        "target_speed": config.target_speed,
        "foothold_offset": config.foothold_offset,
        "seed": config.seed,
        "duration": config.duration,
        "failed": bool(log.failed),
        "failure": log.failure,
        "height_target": sim.height,
        "wall_time_s": round(wall_time, 3),
        "workspace_violations": int(log.workspace_violations),
        "tracking": {
            "mean_speed": float(np.mean(np.linalg.norm(log.state[sl][:, 9:11], axis=1))),
            "mean_yaw_rate": float(np.mean(log.state[sl][:, 8])),
            "rms_velocity_error": float(np.sqrt(np.mean(v_err**2))),
            "rms_height_error": float(np.sqrt(np.mean(err[:, 5] ** 2))),
            "final_height_error": float(abs(err[-1, 5])) if len(err) else None,
        },
        "solver": {
            "median_solve_ms": float(np.median(log.solve_ms)),
            "p90_solve_ms": float(np.percentile(log.solve_ms, 90)),
            "mean_iterations": float(np.mean(log.iterations)),
        },
    }
    if report is not None:
        summary["energy"] = {
            "cot": report.cot,
            "rcot": report.rcot,
            "mech_energy_j": report.energy,
            "distance_m": report.distance,
            "mean_power_w": report.mean_power,
            "cot_joint_side": report.cot_joint_side,
        }
    return summary


# ------------------------------------------------------------------ sweep

@dataclass
class SweepCell:
    motion: str
    variant: str
    foothold_offset: float
    target_speed: float
    status: str
    cot: float | None
    distance: float | None
    mean_power: float | None
    seed: int


@dataclass
class SweepGrid:
    """Fig-8-style experiment grid."""

    motions: tuple = ("forward", "lateral", "turn")
    speeds: tuple = (0.4, 0.8, 1.2)
    footholds: tuple = (0.0, 0.08, 0.16)
    variants: tuple = ("bennett", "planar")
    duration: float = 8.0
    seed: int = 0
    terrain: Terrain = field(default_factory=Terrain)

    def cells(self):
        for motion in self.motions:
            for variant in self.variants:
                for foothold in self.footholds:
                    for speed in self.speeds:
                        yield motion, variant, foothold, speed


def _run_cell(args) -> SweepCell:
    motion, variant, foothold, speed, duration, seed, terrain = args
    config = ScenarioConfig(
        motion=motion,
        variant=variant,
        target_speed=speed,
        foothold_offset=foothold,
        duration=duration,
        seed=seed,
        terrain=terrain,
    )
    try:
        log, report, summary = run_scenario(config)
        if log.failed or report is None:
            return SweepCell(motion, variant, foothold, speed,
                             "diverged" if log.failed else "no-metric",
                             None, None, None, seed)
        value = report.rcot if motion == "turn" else report.cot
        return SweepCell(motion, variant, foothold, speed, "ok",
                         float(value), float(report.distance),
                         float(report.mean_power), seed)
    except Exception as exc:  # per-cell errors recorded, not raised
        return SweepCell(motion, variant, foothold, speed,
                         f"error:{type(exc).__name__}", None, None, None, seed)


def sweep_experiment(grid: SweepGrid, workers: int = 1):
    """Run every grid cell; failures become flagged rows, never holes.

    Cells are independent deterministic runs; with workers > 1 they
    execute in parallel processes, results assembled in grid order.
    """
    jobs = [
        (motion, variant, foothold, speed, grid.duration, grid.seed, grid.terrain)
        for motion, variant, foothold, speed in grid.cells()
    ]
    if workers <= 1:
        return [_run_cell(j) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell, jobs))
