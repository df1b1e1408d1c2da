"""Forward kinematics of the 4-DOF arm expressed in the UAV body frame.

Uses the modified (Craig) DH convention: frame i sits on joint axis i and
joint i rotates about the frame-i z axis.  The frame-(i-1) -> frame-i
transform, with joint variable theta_i = q_i + theta_offset_i, is

    T = Rot_x(alpha_{i-1}) * Trans_x(a_{i-1}) * Rot_z(theta_i) * Trans_z(d_i)

      = [ ct      -st       0     a   ]
        [ st*ca    ct*ca   -sa   -sa*d]
        [ st*sa    ct*sa    ca    ca*d]
        [ 0        0        0     1   ]

where ct = cos(theta_i), sa = sin(alpha_{i-1}), etc.  This expanded form is
the portability contract; the standard (distal) DH convention produces
different frames for the same table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def skew(v):
    """Skew-symmetric cross-product matrix: skew(a) @ b == cross(a, b)."""
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


@dataclass(frozen=True)
class DhRow:
    """One row of the modified DH table (angles rad, lengths m)."""

    alpha_prev: float
    a_prev: float
    d: float
    theta_offset: float


@dataclass(frozen=True)
class LinkParams:
    """Mass, CoM position and CoM inertia of one link, in the link frame."""

    mass: float
    com: np.ndarray
    inertia_com: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "com", np.asarray(self.com, dtype=float))
        object.__setattr__(self, "inertia_com",
                           np.asarray(self.inertia_com, dtype=float))
        if self.mass < 0.0:
            raise ValueError(f"link mass must be >= 0, got {self.mass}")
        if not np.allclose(self.inertia_com, self.inertia_com.T, atol=1e-12):
            raise ValueError("link inertia matrix must be symmetric")


@dataclass(frozen=True)
class HomogeneousTransform:
    """Rigid transform: rotation (3x3, det +1) plus translation (3,)."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation",
                           np.asarray(self.rotation, dtype=float))
        object.__setattr__(self, "translation",
                           np.asarray(self.translation, dtype=float))

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    def compose(self, other: "HomogeneousTransform") -> "HomogeneousTransform":
        """self * other (other applied first)."""
        return HomogeneousTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "HomogeneousTransform":
        rt = self.rotation.T
        return HomogeneousTransform(rt, -rt @ self.translation)

    def apply(self, point) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=float) + self.translation

    def orthonormality_error(self) -> float:
        """max-abs deviation of R^T R from identity (0 for a valid rotation)."""
        return float(np.max(np.abs(self.rotation.T @ self.rotation - np.eye(3))))


@dataclass(frozen=True)
class ManipulatorState:
    """Prescribed joint angles, velocities and accelerations (4,) each."""

    q: np.ndarray
    qd: np.ndarray
    qdd: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "qd", np.asarray(self.qd, dtype=float))
        object.__setattr__(self, "qdd", np.asarray(self.qdd, dtype=float))

    @classmethod
    def at_rest(cls, q):
        return cls(np.asarray(q, dtype=float), np.zeros(4), np.zeros(4))


def dh_transform(row: DhRow, q_i: float) -> HomogeneousTransform:
    """Frame-(i-1) -> frame-i transform for joint angle q_i (modified DH)."""
    ca = math.cos(row.alpha_prev)
    sa = math.sin(row.alpha_prev)
    theta = q_i + row.theta_offset
    ct = math.cos(theta)
    st = math.sin(theta)
    rotation = np.array([
        [ct, -st, 0.0],
        [st * ca, ct * ca, -sa],
        [st * sa, ct * sa, ca],
    ])
    translation = np.array([row.a_prev, -sa * row.d, ca * row.d])
    return HomogeneousTransform(rotation, translation)


class ArmModel:
    """Kinematics of the arm: DH table, link parameters, body-frame mount.

    All public outputs are expressed in the UAV body frame.  Operations are
    pure functions of their arguments; instances hold no mutable state.
    """

    def __init__(self, dh_rows, links, mount: HomogeneousTransform | None = None,
                 joint_limits=(-math.pi, math.pi)):
        if len(dh_rows) != len(links):
            raise ValueError("need one LinkParams per DH row")
        self.dh_rows = list(dh_rows)
        self.links = list(links)
        self.mount = mount if mount is not None else HomogeneousTransform.identity()
        self.joint_limits = (float(joint_limits[0]), float(joint_limits[1]))

    @property
    def n_joints(self) -> int:
        return len(self.dh_rows)

    @property
    def masses(self) -> np.ndarray:
        return np.array([link.mass for link in self.links])

    def _frames(self, q):
        """Rotation, origin, joint axis (frame z) and CoM of each link frame.

        Returns four lists indexed by link; everything in the body frame.
        """
        rot = self.mount.rotation
        org = self.mount.translation
        rotations, origins, axes, coms = [], [], [], []
        for row, link, qi in zip(self.dh_rows, self.links, q):
            local = dh_transform(row, qi)
            org = rot @ local.translation + org
            rot = rot @ local.rotation
            rotations.append(rot)
            origins.append(org)
            axes.append(rot[:, 2].copy())
            coms.append(rot @ link.com + org)
        return rotations, origins, axes, coms

    def chain_transforms(self, q) -> list[HomogeneousTransform]:
        """Cumulative body-frame pose of each link frame (mount included)."""
        rotations, origins, _, _ = self._frames(q)
        return [HomogeneousTransform(r, o) for r, o in zip(rotations, origins)]

    def link_com_positions(self, q) -> np.ndarray:
        """(n, 3) body-frame CoM position of each link."""
        _, _, _, coms = self._frames(q)
        return np.array(coms)

    def com_jacobians(self, q) -> np.ndarray:
        """(n, 6, n) stacked CoM Jacobians; rows 0:3 linear, 3:6 angular."""
        n = self.n_joints
        _, origins, axes, coms = self._frames(q)
        jac = np.zeros((n, 6, n))
        for i in range(n):
            for j in range(i + 1):
                lever = coms[i] - origins[j]
                jac[i, 0:3, j] = np.cross(axes[j], lever)
                jac[i, 3:6, j] = axes[j]
        return jac

    def com_jacobian(self, q, link: int) -> np.ndarray:
        """6x4 CoM Jacobian of link `link` (1-based index)."""
        if not 1 <= link <= self.n_joints:
            raise IndexError(f"link index must be in 1..{self.n_joints}, got {link}")
        return self.com_jacobians(q)[link - 1]

    def link_com_velocities(self, q, qd) -> list[tuple[np.ndarray, np.ndarray]]:
        """Body-frame (linear velocity, angular velocity) of each link CoM."""
        qd = np.asarray(qd, dtype=float)
        jac = self.com_jacobians(q)
        out = []
        for i in range(self.n_joints):
            tw = jac[i] @ qd
            out.append((tw[0:3], tw[3:6]))
        return out
