"""Coupling disturbance induced by arm motion and system-CoM offset.

The force is produced in the inertial frame while the torque is produced in
the body frame; the Wrench type tags both frames explicitly because mixing
them up is the single easiest mistake to make with this model.

The same expressions serve two purposes: the truth side (model
verification, fed with exact accelerations) and the controller-side
feedforward (fed with causal backward-difference estimates of the linear
and angular accelerations, low-passed at 50 rad/s).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import UavState, rotation_from_euler
from .inertia import InertiaParams

INERTIAL = "inertial"
BODY = "body"


@dataclass
class Wrench:
    """Force/torque pair with explicit frame tags."""

    force: np.ndarray
    torque: np.ndarray
    force_frame: str = INERTIAL
    torque_frame: str = BODY

    def __post_init__(self):
        self.force = np.asarray(self.force, dtype=float)
        self.torque = np.asarray(self.torque, dtype=float)
        for frame in (self.force_frame, self.torque_frame):
            if frame not in (INERTIAL, BODY):
                raise ValueError(f"unknown frame tag {frame!r}")

    @classmethod
    def zero(cls):
        return cls(np.zeros(3), np.zeros(3))


def coupling_force(state: UavState, ip: InertiaParams, masses,
                   omega_dot) -> np.ndarray:
    """Inertial-frame reaction force of the moving arm on the vehicle.

    Four contributions, all from the arm-CoM kinematics seen in the rotating
    body frame: centripetal, angular-acceleration lever, Coriolis, and the
    arm-CoM acceleration itself.
    """
    omega = state.body_rates
    rot = rotation_from_euler(state.euler)
    rel = (np.cross(omega, np.cross(omega, ip.com_arm))
           + np.cross(np.asarray(omega_dot, dtype=float), ip.com_arm)
           + 2.0 * np.cross(omega, ip.com_arm_rate)
           + ip.com_arm_accel)
    return -masses.arm_mass * (rot @ rel)


def coupling_torque(state: UavState, ip: InertiaParams, masses,
                    omega_dot, v_dot, gravity: float) -> np.ndarray:
    """Body-frame reaction torque of the moving arm on the vehicle.

    `v_dot` is the inertial-frame linear acceleration; it is rotated into
    the body frame here.  The gravity-lever term m_s * com x g is the
    dominant static part; the remaining terms are velocity/acceleration
    products and the arm-inertia gyroscopic group.
    """
    omega = state.body_rates
    rot = rotation_from_euler(state.euler)
    omega_dot = np.asarray(omega_dot, dtype=float)
    v_body = rot.T @ state.velocity
    a_body = rot.T @ np.asarray(v_dot, dtype=float)
    gravity_body = rot.T @ np.array([0.0, 0.0, gravity])

    lever = masses.total_mass * (
        np.cross(ip.com_system, gravity_body)
        - np.cross(ip.com_system, a_body)
        - np.cross(ip.com_system_rate, v_body))
    relative = masses.arm_mass * (
        np.cross(v_body, ip.com_arm_rate)
        + np.cross(v_body, np.cross(omega, ip.com_arm))
        + np.cross(omega, np.cross(ip.com_arm, ip.com_arm_rate))
        + np.cross(ip.com_arm, ip.com_arm_accel))
    gyro = (ip.arm_inertia_rate @ omega
            + np.cross(omega, ip.arm_inertia @ omega)
            + ip.arm_inertia @ omega_dot)
    return lever - relative - gyro


def feedforward_wrench(state: UavState, ip: InertiaParams, masses,
                       omega_dot_est, v_dot_est, gravity: float) -> Wrench:
    """Coupling wrench packaged for controller-side compensation.

    Identical expressions to the truth side; only the acceleration inputs
    differ (estimates instead of simulator truth).
    """
    return Wrench(
        force=coupling_force(state, ip, masses, omega_dot_est),
        torque=coupling_torque(state, ip, masses, omega_dot_est, v_dot_est,
                               gravity),
    )


class DerivativeEstimator:
    """Causal derivative: backward difference plus first-order low-pass.

    The coupling model needs the body angular acceleration and the linear
    acceleration, neither of which is directly measurable; this is the
    controller-side substitute.  First call returns zeros.
    """

    def __init__(self, cutoff_rad: float = 50.0, dim: int = 3):
        self.cutoff_rad = float(cutoff_rad)
        self._prev: np.ndarray | None = None
        self._filtered = np.zeros(dim)

    def reset(self):
        self._prev = None
        self._filtered = np.zeros_like(self._filtered)

    def update(self, value, dt: float) -> np.ndarray:
        value = np.asarray(value, dtype=float)
        if self._prev is None:
            self._prev = value.copy()
            return self._filtered.copy()
        raw = (value - self._prev) / dt
        self._prev = value.copy()
        alpha = self.cutoff_rad * dt / (1.0 + self.cutoff_rad * dt)
        self._filtered = self._filtered + alpha * (raw - self._filtered)
        return self._filtered.copy()
