"""Canonical physical and controller parameters for the benchmark platform.

Arm: OpenMANIPULATOR-X style 4-DOF chain (masses, CoM offsets, CoM inertias,
modified-DH table).  UAV: 2.65 kg multirotor with diagonal inertia.  The
controller gain sets are the published tuning used by the comparison study.

Note the link masses sum to 0.703 kg; the vendor-quoted total of 0.702 kg is
off by a gram, and the mass budget here is always derived from the link sum.
"""

import math

import numpy as np

from .kinematics import ArmModel, DhRow, HomogeneousTransform, LinkParams

GRAVITY = 9.81

UAV_MASS = 2.65
UAV_INERTIA_DIAG = (0.05, 0.05, 0.0948)  # roll, pitch, yaw axes [kg m^2]

DH_TABLE = [
    DhRow(alpha_prev=0.0, a_prev=0.012, d=0.0935, theta_offset=0.0),
    DhRow(alpha_prev=-math.pi / 2, a_prev=0.0, d=0.0, theta_offset=-1.3855),
    DhRow(alpha_prev=0.0, a_prev=0.13023, d=0.0, theta_offset=1.3855),
    DhRow(alpha_prev=0.0, a_prev=0.124, d=0.0, theta_offset=0.0),
]

LINK_MASSES = (0.238, 0.123, 0.118, 0.224)

LINK_COMS = (
    (-0.006794, 0.000253, -0.048813),
    (0.107084, -0.010616, 0.000467),
    (0.094329, 0.0, 0.000489),
    (0.060527, -0.006058, -0.000021),
)

LINK_INERTIAS = (
    1e-4 * np.array([
        [2.90202, 0.00335, 0.32543],
        [0.00335, 3.24158, 0.02059],
        [0.32543, 0.02059, 1.41275],
    ]),
    1e-4 * np.array([
        [0.33028, -0.06189, 0.01212],
        [-0.06189, 1.84812, -0.0002],
        [0.01212, -0.0002, 1.89169],
    ]),
    1e-4 * np.array([
        [0.20796, 0.00002, 0.01064],
        [0.00002, 1.45545, 0.0],
        [0.01064, 0.0, 1.38574],
    ]),
    1e-4 * np.array([
        [1.43765, 0.21123, 0.00001],
        [0.21123, 2.12697, 0.00485],
        [0.00001, 0.00485, 1.80588],
    ]),
)

# Backstepping gains k1..k12 and per-channel learning rates eta1..eta6.
BACKSTEP_K = (2.0, 0.3, 2.0, 0.3, 2.5, 0.9, 4.0, 2.5, 4.0, 2.5, 9.2, 3.56)
BACKSTEP_ETA = (0.006, 0.006, 0.04, 0.03, 0.03, 0.03)

# Cascade PID gains: outer position/attitude P, inner velocity/rate PID.
PID_GAINS = {
    "kp_xy": 5.0,
    "kp_z": 4.0,
    "kp_vxy": 1.5,
    "kp_vz": 5.0,
    "ki_vxy": 0.02,
    "ki_vz": 0.02,
    "kd_vxy": 1.0,
    "kd_vz": 1.0,
    "kp_rollpitch": 6.5,
    "kp_yaw": 3.5,
    "kp_pq": 0.8,
    "kp_r": 2.0,
    "ki_pq": 0.2,
    "ki_r": 0.5,
    "kd_pq": 0.03,
    "kd_r": 0.02,
}


def default_links(mass_scale: float = 1.0) -> list[LinkParams]:
    """Canonical LinkParams; mass_scale=0 yields the massless-arm variant."""
    return [
        LinkParams(mass=m * mass_scale, com=np.array(c), inertia_com=i * mass_scale)
        for m, c, i in zip(LINK_MASSES, LINK_COMS, LINK_INERTIAS)
    ]


def default_arm(mount: HomogeneousTransform | None = None,
                mass_scale: float = 1.0) -> ArmModel:
    return ArmModel(DH_TABLE, default_links(mass_scale), mount=mount)
