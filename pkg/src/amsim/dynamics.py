"""Coupled UAV + arm rigid-body dynamics with prescribed joint motion.

Conventions (fixed throughout the package):

* inertial frame is NED, gravity is +g along inertial z; hovering at 1 m
  altitude means z = -1,
* body frame: x to the nose, z down, origin at the UAV CoM,
* attitude is Z-Y-X Euler (roll, pitch, yaw); Euler-angle rates are
  identified with body rates (small roll/pitch assumption),
* thrust acts along -z of the body frame, torque is body frame.

The translational and rotational equations are mutually implicit: the
angular acceleration enters the linear one through the arm-CoM lever, and
the linear acceleration enters the angular one through the system-CoM
lever.  Both are therefore assembled into one 6x6 linear system and solved
exactly; the re-substitution residual is checked on every call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .inertia import InertiaModel, InertiaParams
from .kinematics import ManipulatorState, skew

UNIT_Z = np.array([0.0, 0.0, 1.0])

_RESIDUAL_TOL = 1e-9


class DynamicsError(RuntimeError):
    """Ill-conditioned or inconsistent acceleration solve."""


class PitchSingularityError(RuntimeError):
    """Pitch reached +-90 deg where the Euler parameterization degenerates."""


class SimulationDiverged(RuntimeError):
    """State became non-finite during integration."""

    def __init__(self, time: float):
        super().__init__(f"state became non-finite at t={time:.6f} s")
        self.time = time


@dataclass
class UavParams:
    """UAV rigid-body parameters; inertia is diagonal (axisymmetric body)."""

    mass: float = 2.65
    inertia_diag: tuple[float, float, float] = (0.05, 0.05, 0.0948)
    gravity: float = 9.81


@dataclass
class ControlWrench:
    """Thrust magnitude [N] along -z_body plus body-frame torque [N m]."""

    thrust: float
    torque: np.ndarray

    def __post_init__(self):
        self.torque = np.asarray(self.torque, dtype=float)

    @classmethod
    def zero(cls):
        return cls(0.0, np.zeros(3))


@dataclass
class UavState:
    """Inertial position/velocity, Euler attitude and body rates."""

    position: np.ndarray
    velocity: np.ndarray
    euler: np.ndarray       # roll, pitch, yaw [rad]
    body_rates: np.ndarray  # p, q, r [rad/s]

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        self.euler = np.asarray(self.euler, dtype=float)
        self.body_rates = np.asarray(self.body_rates, dtype=float)

    @classmethod
    def zero(cls):
        return cls(np.zeros(3), np.zeros(3), np.zeros(3), np.zeros(3))

    def as_vector(self) -> np.ndarray:
        """State as the 12-vector [x, vx, y, vy, z, vz, roll, p, pitch, q, yaw, r]."""
        out = np.empty(12)
        out[0:6:2] = self.position
        out[1:6:2] = self.velocity
        out[6:12:2] = self.euler
        out[7:12:2] = self.body_rates
        return out

    @classmethod
    def from_vector(cls, x) -> "UavState":
        x = np.asarray(x, dtype=float)
        return cls(x[0:6:2].copy(), x[1:6:2].copy(),
                   x[6:12:2].copy(), x[7:12:2].copy())

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.as_vector())))


def rotation_from_euler(euler) -> np.ndarray:
    """Body-to-inertial rotation for Z-Y-X Euler angles (roll, pitch, yaw)."""
    roll, pitch, yaw = float(euler[0]), float(euler[1]), float(euler[2])
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    return np.array([
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ])


def momentum(state: UavState, ip: InertiaParams, masses) -> np.ndarray:
    """Linear momentum of the whole system in the inertial frame [kg m/s]."""
    rot = rotation_from_euler(state.euler)
    rel = np.cross(state.body_rates, ip.com_arm) + ip.com_arm_rate
    return masses.total_mass * state.velocity + masses.arm_mass * (rot @ rel)


def applied_force(state: UavState, u: ControlWrench, masses, gravity: float,
                  ext_force=None) -> np.ndarray:
    """Net inertial-frame external force: thrust + weight (+ exogenous)."""
    rot = rotation_from_euler(state.euler)
    force = -u.thrust * (rot @ UNIT_Z) + masses.total_mass * gravity * UNIT_Z
    if ext_force is not None:
        force = force + np.asarray(ext_force, dtype=float)
    return force


class AmsDynamics:
    """Equations of motion of the coupled system, plus an RK4 stepper.

    Joint motion is kinematically prescribed (the servo loop is not
    modeled): states/derivatives of the arm come from a trajectory, not
    from integrated joint dynamics.
    """

    def __init__(self, uav: UavParams, inertia_model: InertiaModel):
        self.uav = uav
        self.inertia_model = inertia_model
        self.masses = inertia_model.masses
        self.inertia_uav = np.diag(uav.inertia_diag)
        self._ip_cache: dict[float, tuple[ManipulatorState, InertiaParams]] = {}
        if abs(self.masses.uav_mass - uav.mass) > 1e-12:
            raise ValueError("UavParams.mass disagrees with the inertia model")

    def assemble_accelerations(self, state: UavState, ip: InertiaParams,
                               u: ControlWrench, ext_force=None, ext_torque=None
                               ) -> tuple[np.ndarray, np.ndarray]:
        """Solve for (inertial linear acceleration, body angular acceleration).

        `ext_force` is an exogenous inertial-frame force, `ext_torque` an
        exogenous body-frame torque (scenario disturbances).
        """
        m_s = self.masses.total_mass
        m_man = self.masses.arm_mass
        g = self.uav.gravity
        rot = rotation_from_euler(state.euler)
        omega = state.body_rates
        v_body = rot.T @ state.velocity
        i_total = self.inertia_uav + ip.arm_inertia

        a_mat = np.zeros((6, 6))
        a_mat[0:3, 0:3] = np.eye(3)
        a_mat[0:3, 3:6] = -(m_man / m_s) * rot @ skew(ip.com_arm)
        a_mat[3:6, 0:3] = m_s * skew(ip.com_system) @ rot.T
        a_mat[3:6, 3:6] = i_total

        coriolis = (np.cross(omega, np.cross(omega, ip.com_arm))
                    + 2.0 * np.cross(omega, ip.com_arm_rate)
                    + ip.com_arm_accel)
        b_lin = (-(u.thrust / m_s) * (rot @ UNIT_Z)
                 - (m_man / m_s) * (rot @ coriolis)
                 + g * UNIT_Z)
        if ext_force is not None:
            b_lin = b_lin + np.asarray(ext_force, dtype=float) / m_s

        gravity_body = rot.T @ (g * UNIT_Z)
        b_ang = (u.torque
                 - np.cross(omega, i_total @ omega)
                 + m_s * (np.cross(ip.com_system, gravity_body)
                          - np.cross(ip.com_system_rate, v_body))
                 - m_man * (np.cross(v_body, np.cross(omega, ip.com_arm))
                            + np.cross(v_body, ip.com_arm_rate)
                            + np.cross(omega, np.cross(ip.com_arm, ip.com_arm_rate))
                            + np.cross(ip.com_arm, ip.com_arm_accel))
                 - ip.arm_inertia_rate @ omega)
        if ext_torque is not None:
            b_ang = b_ang + np.asarray(ext_torque, dtype=float)

        b = np.concatenate([b_lin, b_ang])
        try:
            x = np.linalg.solve(a_mat, b)
        except np.linalg.LinAlgError as exc:
            raise DynamicsError(
                f"singular acceleration system, cond={np.linalg.cond(a_mat):.3e}"
            ) from exc
        residual = float(np.max(np.abs(a_mat @ x - b)))
        if residual > _RESIDUAL_TOL * max(1.0, float(np.max(np.abs(b)))):
            raise DynamicsError(
                f"acceleration residual {residual:.3e} exceeds tolerance, "
                f"cond={np.linalg.cond(a_mat):.3e}")
        return x[0:3], x[3:6]

    def state_derivative(self, state: UavState, manip: ManipulatorState,
                         u: ControlWrench, ext_force=None, ext_torque=None,
                         ip: InertiaParams | None = None) -> np.ndarray:
        """d/dt of the 12-vector [x, vx, y, vy, z, vz, roll, p, pitch, q, yaw, r]."""
        if abs(state.euler[1]) >= math.pi / 2:
            raise PitchSingularityError(
                f"pitch {state.euler[1]:.4f} rad reached the +-90 deg singularity")
        if ip is None:
            ip = self.inertia_model.params(manip)
        v_dot, w_dot = self.assemble_accelerations(state, ip, u, ext_force, ext_torque)
        deriv = np.empty(12)
        deriv[0:6:2] = state.velocity
        deriv[1:6:2] = v_dot
        deriv[6:12:2] = state.body_rates  # Euler rates == body rates
        deriv[7:12:2] = w_dot
        return deriv

    def step_rk4(self, state: UavState, t: float, dt: float, manip_traj,
                 u: ControlWrench, ext_force=None, ext_torque=None) -> UavState:
        """One classical RK4 step; the control wrench is held over the step.

        `manip_traj(t) -> ManipulatorState` is evaluated at the substep
        times.  Raises SimulationDiverged if the new state is non-finite.
        """
        if dt <= 0.0:
            raise ValueError("dt must be positive")

        def f(vec, time):
            manip, ip = self.manip_params(manip_traj, time)
            return self.state_derivative(UavState.from_vector(vec), manip, u,
                                         ext_force, ext_torque, ip=ip)

        x0 = state.as_vector()
        k1 = f(x0, t)
        k2 = f(x0 + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = f(x0 + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = f(x0 + dt * k3, t + dt)
        x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x1)):
            raise SimulationDiverged(t + dt)
        return UavState.from_vector(x1)

    def _manip_params(self, manip_traj, t: float):
        # Inertia params depend only on the prescribed joint state, so cache
        # them by time: RK4 evaluates t+dt/2 twice and shares step boundaries.
        hit = self._ip_cache.get(t)
        if hit is not None:
            return hit
        manip = manip_traj(t)
        ip = self.inertia_model.params(manip)
        if len(self._ip_cache) > 64:
            self._ip_cache.clear()
        self._ip_cache[t] = (manip, ip)
        return manip, ip
