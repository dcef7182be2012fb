"""Gait timing, foothold, cycloid, and swing-torque tests."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orlsim.body import RobotModel
from orlsim.geometry import inverse_kinematics, jacobian_active
from orlsim.limb_dynamics import LimbDynamics, foot_force_estimate
from orlsim.locomotion import (
    CommandProfile,
    GaitSchedule,
    LegPhase,
    SwingConfig,
    ReferenceState,
    com_reference,
    contact_sequence,
    cycloid_trajectory,
    foothold_target,
    gait_phase,
    neutral_point,
    swing_feedforward,
    swing_torque,
)


def test_trot_phase_at_zero():
    ph = gait_phase(0.0, GaitSchedule())
    assert ph[0].stance and ph[3].stance  # FL, RR
    assert not ph[1].stance and not ph[2].stance  # FR, RL
    assert ph[0].fraction == 0.0
    assert ph[1].fraction == 0.0


def test_trot_periodicity():
    g = GaitSchedule()
    a = gait_phase(0.123, g)
    b = gait_phase(0.123 + g.period, g)
    for x, y in zip(a, b):
        assert x.stance == y.stance
        assert x.fraction == pytest.approx(y.fraction, abs=1e-12)


def test_stance_fraction_of_cycle():
    g = GaitSchedule()
    dt = g.period / 1000.0
    times = np.arange(0.0, g.period, dt)
    stance = sum(gait_phase(t, g)[0].stance for t in times)
    assert stance == 500  # duty 0.5 -> exactly half the samples


def test_gait_validation():
    with pytest.raises(ValueError):
        GaitSchedule(duty=1.0)
    with pytest.raises(ValueError):
        GaitSchedule(offsets=(0.0, 1.0, 0.5, 0.5))


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 100))
def test_gait_phase_bitwise_periodic_rational_ticks(k):
    # sampled on the 250 Hz grid with the default 0.5 s period the phase
    # pattern repeats every 125 ticks
    g = GaitSchedule()
    dt = 1.0 / 250.0
    t = round(k) * dt
    a = gait_phase(t, g)
    b = gait_phase(t + 125 * dt, g)
    assert [x.stance for x in a] == [x.stance for x in b]


# ------------------------------------------------------------- footholds

def test_foothold_pure_raibert():
    cfg = SwingConfig()
    p_h = np.array([0.19, 0.16])
    vd = np.array([1.0, 0.0])
    p = foothold_target(vd, vd, 0.0, 0.25, p_h, cfg)
    assert np.allclose(p, p_h + vd * 0.125)


def test_foothold_at_rest_is_neutral():
    cfg = SwingConfig()
    p_h = np.array([0.19, 0.16])
    p = foothold_target([0, 0], [0, 0], 0.0, 0.25, p_h, cfg)
    assert np.allclose(p, p_h)


def test_foothold_slope_adjustment():
    cfg = SwingConfig()
    p = foothold_target(
        [0, 0], [0, 0], 0.0, 0.25, [0.0, 0.0], cfg,
        desired_height=0.3, desired_pitch=math.radians(15.0),
    )
    assert p[0] == pytest.approx(0.3 * math.tan(math.radians(15.0)), abs=1e-12)
    assert p[1] == pytest.approx(0.0, abs=1e-12)


def test_foothold_raibert_linearity():
    cfg = SwingConfig()
    p_h = np.array([0.1, 0.2])
    v = np.array([0.4, 0.1])
    base = foothold_target(v, v, 0.0, 0.25, p_h, cfg) - p_h
    twice = foothold_target(2 * v, 2 * v, 0.0, 0.25, p_h, cfg) - p_h
    assert np.allclose(twice, 2 * base, atol=1e-12)


def test_foothold_mirror_symmetry():
    model = RobotModel()
    cfg = SwingConfig(neutral_offset=0.08)
    pl = neutral_point(model, 0, cfg)  # FL
    pr = neutral_point(model, 1, cfg)  # FR
    assert pl[0] == pr[0]
    assert pl[1] == -pr[1]
    vd = np.array([0.5, 0.0])
    fl = foothold_target(vd, vd, 0.0, 0.25, pl, cfg)
    fr = foothold_target(vd, vd, 0.0, 0.25, pr, cfg)
    assert fl[0] == pytest.approx(fr[0])
    assert fl[1] == pytest.approx(-fr[1])


# --------------------------------------------------------------- cycloid

def test_cycloid_endpoints():
    p0 = np.array([0.0, 0.1, -0.3])
    p1 = np.array([0.12, 0.1, -0.28])
    for phase, target in ((0.0, p0), (1.0, p1)):
        p, v, a = cycloid_trajectory(p0, p1, 0.05, phase, swing_time=0.25)
        assert np.allclose(p, target, atol=1e-12)
        assert np.allclose(v, 0.0, atol=1e-9)
        assert np.allclose(a, 0.0, atol=1e-9)


def test_cycloid_peak_clearance_at_midpoint():
    p0 = np.array([0.0, 0.0, -0.3])
    p1 = np.array([0.2, 0.0, -0.3])
    phases = np.linspace(0, 1, 2001)
    z = [cycloid_trajectory(p0, p1, 0.05, ph)[0][2] for ph in phases]
    k = int(np.argmax(z))
    assert phases[k] == pytest.approx(0.5, abs=1e-3)
    assert z[k] == pytest.approx(-0.3 + 0.05, abs=1e-10)


def test_cycloid_continuity():
    p0 = np.array([0.0, 0.05, -0.29])
    p1 = np.array([0.15, 0.02, -0.31])
    d = 1e-4
    prev = cycloid_trajectory(p0, p1, 0.05, 0.0)[0]
    for ph in np.arange(d, 1.0 + d / 2, d):
        cur = cycloid_trajectory(p0, p1, 0.05, ph)[0]
        assert np.linalg.norm(cur - prev) < 1.0 * d
        prev = cur


def test_cycloid_velocity_consistent_with_position():
    p0 = np.zeros(3)
    p1 = np.array([0.2, -0.05, 0.02])
    T = 0.25
    d = 1e-6
    for ph in (0.2, 0.5, 0.77):
        _, v, _ = cycloid_trajectory(p0, p1, 0.05, ph, swing_time=T)
        pp = cycloid_trajectory(p0, p1, 0.05, ph + d)[0]
        pm = cycloid_trajectory(p0, p1, 0.05, ph - d)[0]
        assert np.allclose(v, (pp - pm) / (2 * d * T), atol=1e-5)


# ---------------------------------------------------------- swing torque

def test_swing_torque_zero_error_is_feedforward():
    cfg = SwingConfig()
    geom = RobotModel().legs[0]
    qa = inverse_kinematics(np.array([0.0, 0.08, -0.28]), geom)
    tau_ff = np.array([0.3, -0.2, 0.1])
    p = np.array([0.0, 0.08, -0.28])
    tau = swing_torque(p, np.zeros(3), tau_ff, p, np.zeros(3), qa, geom, cfg)
    assert np.allclose(tau, tau_ff, atol=1e-14)


def test_swing_torque_pure_position_error():
    cfg = SwingConfig(kd=np.zeros(3))
    geom = RobotModel().legs[0]
    qa = inverse_kinematics(np.array([0.0, 0.08, -0.28]), geom)
    e = np.array([0.01, -0.02, 0.005])
    p = np.array([0.0, 0.08, -0.28])
    tau = swing_torque(p + e, np.zeros(3), np.zeros(3), p, np.zeros(3), qa, geom, cfg)
    J = jacobian_active(qa, geom)
    assert np.allclose(tau, J.T @ (cfg.kp * e), atol=1e-12)


def test_swing_torque_reproduces_static_force():
    # a pure stiffness torque equals J^T f, so the force estimate recovers
    # Kp*e as a static foot force
    cfg = SwingConfig(kd=np.zeros(3))
    geom = RobotModel().legs[0]
    qa = inverse_kinematics(np.array([0.0, 0.08, -0.28]), geom)
    e = np.array([0.004, 0.006, -0.003])
    p = np.array([0.0, 0.08, -0.28])
    tau = swing_torque(p + e, np.zeros(3), np.zeros(3), p, np.zeros(3), qa, geom, cfg)
    f = foot_force_estimate(tau, qa, geom)
    assert np.max(np.abs(f - cfg.kp * e)) < 1e-8


def test_swing_feedforward_matches_inverse_dynamics(rng):
    geom = RobotModel().legs[0]
    dyn = LimbDynamics(geom)
    qa = inverse_kinematics(np.array([0.02, 0.09, -0.27]), geom)
    v_ref = np.array([0.3, 0.05, 0.2])
    a_ref = np.array([1.0, -0.5, 2.0])
    tau = swing_feedforward(dyn, qa, v_ref, a_ref, gravity=np.array([0, 0, -9.81]))
    # consistency: applying the same qd/qdd through the plain ID matches
    J = jacobian_active(qa, geom)
    qd = np.linalg.solve(J, v_ref)
    d = 1e-6
    Jdot = (jacobian_active(qa + d * qd, geom) - jacobian_active(qa - d * qd, geom)) / (2 * d)
    qdd = np.linalg.solve(J, a_ref - Jdot @ qd)
    tau_ref = dyn.inverse_dynamics_active(qa, qd, qdd)
    assert np.allclose(tau, tau_ref, atol=1e-12)


# ------------------------------------------------------------ references

def test_command_profile_ramps():
    c = CommandProfile(v_cruise=(1.0, 0.0), ramp_time=1.0, duration=10.0)
    assert np.allclose(c.velocity(0.0), 0.0)
    assert np.allclose(c.velocity(0.5), [0.5, 0.0])
    assert np.allclose(c.velocity(5.0), [1.0, 0.0])
    assert np.allclose(c.velocity(9.5), [0.5, 0.0])
    assert np.allclose(c.velocity(10.0), 0.0)


def test_com_reference_zero_command_constant():
    ref = ReferenceState()
    c = CommandProfile(duration=10.0)
    X = com_reference(ref, c, 2.0, 5, 0.02, lambda x, y: 0.0, 0.3).reshape(5, 13)
    for k in range(5):
        assert np.allclose(X[k, 3:5], 0.0)
        assert X[k, 5] == pytest.approx(0.3)
        assert X[k, 12] == pytest.approx(-9.81)


def test_com_reference_integrates_forward_velocity():
    ref = ReferenceState()
    c = CommandProfile(v_cruise=(1.0, 0.0), ramp_time=0.0, duration=100.0)
    X = com_reference(ref, c, 1.0, 10, 0.02, lambda x, y: 0.0, 0.3).reshape(10, 13)
    for k in range(10):
        assert X[k, 3] == pytest.approx((k + 1) * 0.02, abs=1e-12)
        assert X[k, 9] == pytest.approx(1.0)


def test_com_reference_yaw_continuous_no_wrap():
    # constant yaw rate for 10 s: the reference heading grows monotonically
    # past pi instead of jumping
    ref = ReferenceState()
    c = CommandProfile(omega_cruise=1.0, ramp_time=0.0, duration=100.0)
    yaws = []
    t = 0.0
    dt = 0.02
    for _ in range(500):
        X = com_reference(ref, c, t, 1, dt, lambda x, y: 0.0, 0.3)
        ref.advance(c.velocity(t), c.yaw_rate(t), dt)
        yaws.append(X[2])
        t += dt
    yaws = np.array(yaws)
    assert np.all(np.diff(yaws) > 0)
    assert yaws[-1] > math.pi  # passed the wrap point smoothly


def test_contact_sequence_shape():
    seq = contact_sequence(0.0, GaitSchedule(), 10, 0.02)
    assert seq.shape == (10, 4)
    assert seq[0, 0] and not seq[0, 1]
