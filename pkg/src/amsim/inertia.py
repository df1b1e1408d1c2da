"""Configuration-dependent inertia quantities of the UAV + arm system.

Everything is expressed in the UAV body frame with the UAV's own CoM at the
origin.  The arm shifts the system CoM and contributes a configuration-
dependent inertia about the body origin:

    com_system      = (1/m_total) * sum_i m_i p_ci
    com_arm         = (m_total/m_arm) * com_system
    arm_inertia     = sum_i ( R_i I_ci R_i^T
                              + m_i (|p_ci|^2 I - p_ci p_ci^T) )
    arm_inertia_rate= sum_i ( skew(w_i) R_i I_ci R_i^T
                              - R_i I_ci R_i^T skew(w_i) )
                    + sum_i m_i ( 2 p_ci.v_ci I - v_ci p_ci^T - p_ci v_ci^T )

with (v_ci, w_i) = J_ci(q) qd.  The arm-CoM acceleration (needed by the
coupling-disturbance force) is J qdd + Jdot qd, where Jdot qd is evaluated
as a central finite difference of the stacked Jacobians along the joint
velocity direction (step 1e-5 rad), avoiding hand-derived chain Hessians.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kinematics import ArmModel, ManipulatorState, skew

_JDOT_FD_STEP = 1e-5  # joint-space perturbation [rad] for Jdot*qd


@dataclass(frozen=True)
class MassBudget:
    """UAV, arm and total mass [kg]; arm mass is the sum of link masses."""

    uav_mass: float
    arm_mass: float
    total_mass: float

    @classmethod
    def from_links(cls, uav_mass: float, link_masses) -> "MassBudget":
        arm_mass = float(np.sum(link_masses))
        return cls(uav_mass, arm_mass, uav_mass + arm_mass)


@dataclass(frozen=True)
class InertiaParams:
    """Variable inertia quantities for one manipulator state (body frame)."""

    com_system: np.ndarray       # system CoM offset [m]
    com_arm: np.ndarray          # arm CoM [m]
    com_system_rate: np.ndarray  # d/dt com_system [m/s]
    com_arm_rate: np.ndarray     # d/dt com_arm [m/s]
    com_arm_accel: np.ndarray    # d2/dt2 com_arm [m/s^2]
    arm_inertia: np.ndarray      # arm inertia about body origin [kg m^2]
    arm_inertia_rate: np.ndarray  # d/dt arm_inertia [kg m^2/s]


class InertiaModel:
    """Computes InertiaParams for an arm mounted on a UAV of given mass."""

    def __init__(self, arm: ArmModel, uav_mass: float):
        self.arm = arm
        self.masses = MassBudget.from_links(uav_mass, arm.masses)

    # -- individual quantities ------------------------------------------------

    def system_com(self, q) -> np.ndarray:
        p = self.arm.link_com_positions(q)
        return (self.arm.masses @ p) / self.masses.total_mass

    def com_rates(self, q, qd) -> tuple[np.ndarray, np.ndarray]:
        """(system CoM rate, arm CoM rate)."""
        vels = self.arm.link_com_velocities(q, qd)
        weighted = sum(m * v for m, (v, _) in zip(self.arm.masses, vels))
        sys_rate = weighted / self.masses.total_mass
        return sys_rate, self._arm_scale() * sys_rate

    def arm_com_accel(self, q, qd, qdd) -> np.ndarray:
        qd = np.asarray(qd, dtype=float)
        qdd = np.asarray(qdd, dtype=float)
        jac = self.arm.com_jacobians(q)[:, 0:3, :]
        acc = jac @ qdd
        speed = float(np.linalg.norm(qd))
        if speed > 0.0:
            h = _JDOT_FD_STEP / speed
            jac_p = self.arm.com_jacobians(np.asarray(q) + h * qd)[:, 0:3, :]
            jac_m = self.arm.com_jacobians(np.asarray(q) - h * qd)[:, 0:3, :]
            acc = acc + ((jac_p - jac_m) / (2.0 * h)) @ qd
        if self.masses.arm_mass == 0.0:
            return np.zeros(3)
        return (self.arm.masses @ acc) / self.masses.arm_mass

    def arm_inertia(self, q) -> np.ndarray:
        rotations, _, _, coms = self.arm._frames(q)
        total = np.zeros((3, 3))
        for link, rot, p in zip(self.arm.links, rotations, coms):
            total += rot @ link.inertia_com @ rot.T
            total += link.mass * (np.dot(p, p) * np.eye(3) - np.outer(p, p))
        return total

    def arm_inertia_rate(self, q, qd) -> np.ndarray:
        rotations, _, _, coms = self.arm._frames(q)
        vels = self.arm.link_com_velocities(q, qd)
        total = np.zeros((3, 3))
        for link, rot, p, (v, w) in zip(self.arm.links, rotations, coms, vels):
            transported = rot @ link.inertia_com @ rot.T
            sw = skew(w)
            total += sw @ transported - transported @ sw
            total += link.mass * (2.0 * np.dot(p, v) * np.eye(3)
                                  - np.outer(v, p) - np.outer(p, v))
        return total

    # -- one-pass evaluation for the simulation hot path ----------------------

    def params(self, manip: ManipulatorState) -> InertiaParams:
        q, qd, qdd = manip.q, manip.qd, manip.qdd
        m = self.arm.masses
        rotations, origins, axes, coms = self.arm._frames(q)
        n = self.arm.n_joints

        jac_lin = np.zeros((n, 3, n))
        vels = []
        omegas = []
        for i in range(n):
            v = np.zeros(3)
            w = np.zeros(3)
            for j in range(i + 1):
                col = np.cross(axes[j], coms[i] - origins[j])
                jac_lin[i, :, j] = col
                v += col * qd[j]
                w += axes[j] * qd[j]
            vels.append(v)
            omegas.append(w)

        com_sys = (m @ np.array(coms)) / self.masses.total_mass
        com_sys_rate = (m @ np.array(vels)) / self.masses.total_mass
        scale = self._arm_scale()

        acc = jac_lin @ qdd
        speed = float(np.linalg.norm(qd))
        if speed > 0.0:
            h = _JDOT_FD_STEP / speed
            jac_p = self.arm.com_jacobians(q + h * qd)[:, 0:3, :]
            jac_m = self.arm.com_jacobians(q - h * qd)[:, 0:3, :]
            acc = acc + ((jac_p - jac_m) / (2.0 * h)) @ qd
        if self.masses.arm_mass > 0.0:
            com_arm_accel = (m @ acc) / self.masses.arm_mass
        else:
            com_arm_accel = np.zeros(3)

        inertia = np.zeros((3, 3))
        inertia_rate = np.zeros((3, 3))
        eye = np.eye(3)
        for link, rot, p, v, w in zip(self.arm.links, rotations, coms, vels, omegas):
            transported = rot @ link.inertia_com @ rot.T
            inertia += transported
            inertia += link.mass * (np.dot(p, p) * eye - np.outer(p, p))
            sw = skew(w)
            inertia_rate += sw @ transported - transported @ sw
            inertia_rate += link.mass * (2.0 * np.dot(p, v) * eye
                                         - np.outer(v, p) - np.outer(p, v))

        return InertiaParams(
            com_system=com_sys,
            com_arm=scale * com_sys,
            com_system_rate=com_sys_rate,
            com_arm_rate=scale * com_sys_rate,
            com_arm_accel=com_arm_accel,
            arm_inertia=inertia,
            arm_inertia_rate=inertia_rate,
        )

    def _arm_scale(self) -> float:
        # com_arm = (m_total/m_arm) * com_system; a massless arm has no CoM,
        # in which case every arm quantity is identically zero.
        if self.masses.arm_mass == 0.0:
            return 0.0
        return self.masses.total_mass / self.masses.arm_mass
