"""Cost-of-transport analysis of simulation logs.

COT integrates the unsigned per-motor mechanical power |tau_j w_j| over
a steady-state window and divides by weight times distance; no
regeneration credit is taken.  The rotational variant divides by weight
times the path length of the body's far corner.  Both default to
actuator-side torques and speeds (after the co-axial coupling map);
joint-side values are kept alongside for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ZeroDistance(Exception):
    """Locomotion distance below the measurable threshold."""


class ZeroRotation(Exception):
    """Average yaw rate below the measurable threshold."""


STEADY_WINDOW = (0.25, 0.90)  # fraction of the run: ramps excluded


@dataclass
class EnergyReport:
    cot: float
    rcot: float | None
    energy: float  # J over the analysis window
    distance: float  # m planar travel over the window
    mean_power: float  # W
    cot_joint_side: float
    per_joint_energy: np.ndarray  # (12,) J, actuator side
    reward_energy: np.ndarray  # per-tick signed actuator work increments

    def per_leg_energy(self) -> np.ndarray:
        return self.per_joint_energy.reshape(4, 3).sum(axis=1)


def _window_slice(t: np.ndarray, window) -> slice:
    t0 = t[0] + window[0] * (t[-1] - t[0])
    t1 = t[0] + window[1] * (t[-1] - t[0])
    i0 = int(np.searchsorted(t, t0))
    i1 = int(np.searchsorted(t, t1, side="right"))
    return slice(i0, max(i1, i0 + 2))


def mechanical_energy(t, tau, omega):
    """Trapezoidal integral of sum_j |tau_j w_j| and per-joint breakdown."""
    power = np.abs(tau * omega)
    total = float(np.trapezoid(power.sum(axis=1), t))
    per_joint = np.trapezoid(power, t, axis=0)
    return total, per_joint


def cot(log, mass: float, window=STEADY_WINDOW, side: str = "actuator",
        gravity: float = 9.81) -> float:
    """Cost of transport over the steady window of a log."""
    sl = _window_slice(log.t, window)
    t = log.t[sl]
    tau = (log.tau_actuator if side == "actuator" else log.tau_joint)[sl]
    omega = (log.omega_actuator if side == "actuator" else log.omega_joint)[sl]
    d = float(np.linalg.norm(log.state[sl][-1, 3:5] - log.state[sl][0, 3:5]))
    if d < 0.01:
        raise ZeroDistance(f"planar travel {d * 100:.2f} cm below 1 cm")
    energy, _ = mechanical_energy(t, tau, omega)
    return energy / (mass * gravity * d)


def rcot(log, mass: float, half_diagonal: float, window=STEADY_WINDOW,
         gravity: float = 9.81) -> float:
    """Rotational cost of transport: power over weight times corner speed."""
    sl = _window_slice(log.t, window)
    t = log.t[sl]
    wz = float(np.mean(np.abs(log.state[sl][:, 8])))
    if wz < 0.05:
        raise ZeroRotation(f"average |yaw rate| {wz:.3f} rad/s below 0.05")
    energy, _ = mechanical_energy(t, log.tau_actuator[sl], log.omega_actuator[sl])
    mean_power = energy / (t[-1] - t[0])
    return mean_power / (mass * gravity * wz * half_diagonal)


def reward_energy_series(log) -> np.ndarray:
    """Per-tick actuator energy penalty: sum_j dtheta_j tau_j (signed)."""
    dtheta = np.diff(log.q_actuator, axis=0)
    return np.sum(dtheta * log.tau_actuator[:-1], axis=1)


def body_half_diagonal(length: float, width: float) -> float:
    return float(np.hypot(length, width) / 2.0)


def energy_report(log, model, motion: str = "forward",
                  window=STEADY_WINDOW) -> EnergyReport:
    """Full energy analysis of one run."""
    sl = _window_slice(log.t, window)
    t = log.t[sl]
    energy, per_joint = mechanical_energy(
        t, log.tau_actuator[sl], log.omega_actuator[sl]
    )
    mean_power = energy / (t[-1] - t[0])
    r = None
    if motion == "turn":
        r = rcot(log, model.mass, body_half_diagonal(model.length, model.width),
                 window)
        c = float("nan")
        cj = float("nan")
    else:
        c = cot(log, model.mass, window)
        cj = cot(log, model.mass, window, side="joint")
    d = float(np.linalg.norm(log.state[sl][-1, 3:5] - log.state[sl][0, 3:5]))
    return EnergyReport(
        cot=c,
        rcot=r,
        energy=energy,
        distance=d,
        mean_power=mean_power,
        cot_joint_side=cj,
        per_joint_energy=per_joint,
        reward_energy=reward_energy_series(log),
    )
