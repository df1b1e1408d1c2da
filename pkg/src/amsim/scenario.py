"""Reference/disturbance generation and the closed-loop simulation harness.

The benchmark protocol: start at rest at the inertial origin, take off to
the hover height (NED: z = -height), hold position while the arm runs a
prescribed joint program, and optionally inject a step force partway
through to exercise the adaptive estimation.  Runs are deterministic given
(config, seed); the RBF center sampling is the only randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .config import normalize_config
from .controllers import ControlReference
from .disturbance import coupling_force, coupling_torque
from .dynamics import SimulationDiverged, UavState, rotation_from_euler
from .kinematics import ManipulatorState
from . import config as config_mod

EQ21_REST_POSE = np.array([0.0, 0.0, -math.pi / 2, 0.0])
_SWEEP_AMPLITUDE = math.pi / 2


def joint_program_eq21(t: float) -> ManipulatorState:
    """Benchmark joint program: two-joint sinusoid starting at t = 10 s.

    Joint 1 swings pi/3 at period 20 s, joint 2 pi/3 at period 15 s; the
    elbow is held at -pi/2 and the wrist at zero throughout.  Velocities
    jump at the start instant (the sinusoids begin at full slope).
    """
    q = EQ21_REST_POSE.copy()
    qd = np.zeros(4)
    qdd = np.zeros(4)
    if t >= 10.0:
        s = t - 10.0
        amp = math.pi / 3
        for joint, omega in ((0, math.pi / 10), (1, 2 * math.pi / 15)):
            q[joint] = amp * math.sin(omega * s)
            qd[joint] = amp * omega * math.cos(omega * s)
            qdd[joint] = -amp * omega * omega * math.sin(omega * s)
    return ManipulatorState(q, qd, qdd)


def joint_program_experiment(t: float, period: float,
                             pose=None) -> ManipulatorState:
    """Single-joint verification sweep: joint 2 swings pi/2 at the given period."""
    if period <= 0.0:
        raise ValueError("period must be positive")
    q = np.zeros(4) if pose is None else np.asarray(pose, dtype=float).copy()
    qd = np.zeros(4)
    qdd = np.zeros(4)
    omega = 2.0 * math.pi / period
    q[1] = _SWEEP_AMPLITUDE * math.sin(omega * t)
    qd[1] = _SWEEP_AMPLITUDE * omega * math.cos(omega * t)
    qdd[1] = -_SWEEP_AMPLITUDE * omega * omega * math.sin(omega * t)
    return ManipulatorState(q, qd, qdd)


def make_joint_program(cfg: dict):
    """Joint trajectory callable t -> ManipulatorState from the config."""
    sc = cfg["scenario"]
    kind = sc["joint_program"]
    if kind == "eq21":
        return joint_program_eq21
    if kind == "static":
        pose = np.asarray(sc["static_pose"], dtype=float)
        state = ManipulatorState.at_rest(pose)
        return lambda t: state
    if kind == "experiment_sweep":
        period = float(sc["sweep_period"])
        start = float(sc["sweep_start"])
        pose = np.asarray(sc["sweep_pose"], dtype=float)

        def sweep(t):
            if t < start:
                rest = pose.copy()
                rest[1] = 0.0
                return ManipulatorState.at_rest(rest)
            return joint_program_experiment(t - start, period, pose)

        return sweep
    if kind == "custom":
        table = np.asarray(sc["custom_table"], dtype=float)
        if table.ndim != 2 or table.shape[0] < 2 or table.shape[1] != 5:
            raise config_mod.ConfigError(
                "config key 'scenario.custom_table' needs >= 2 rows of "
                "[t, q1, q2, q3, q4]")
        splines = [CubicSpline(table[:, 0], table[:, j + 1]) for j in range(4)]
        t_lo, t_hi = table[0, 0], table[-1, 0]

        def custom(t):
            tc = min(max(t, t_lo), t_hi)
            q = np.array([s(tc) for s in splines])
            qd = np.array([s(tc, 1) for s in splines])
            qdd = np.array([s(tc, 2) for s in splines])
            if t < t_lo or t > t_hi:
                qd[:] = 0.0
                qdd[:] = 0.0
            return ManipulatorState(q, qd, qdd)

        return custom
    raise config_mod.ConfigError(f"unknown joint program '{kind}'")


def _quintic(tau: float) -> tuple[float, float, float]:
    """Smoothstep 10t^3 - 15t^4 + 6t^5 and its first two derivatives."""
    s = 10 * tau**3 - 15 * tau**4 + 6 * tau**5
    ds = 30 * tau**2 - 60 * tau**3 + 30 * tau**4
    dds = 60 * tau - 180 * tau**2 + 120 * tau**3
    return s, ds, dds


def reference_generator(t: float, cfg: dict) -> ControlReference:
    """Hover reference: smooth (quintic) climb to -hover_height, then hold.

    The raw-step profile variant is selectable to reproduce takeoff-
    transient-dominated Z maxima in the error tables.
    """
    sc = cfg["scenario"]
    t0 = float(sc["takeoff_time"])
    ramp = float(sc["takeoff_ramp"])
    height = float(sc["hover_height"])
    pos = np.zeros(3)
    vel = np.zeros(3)
    acc = np.zeros(3)
    if sc["takeoff_profile"] == "step":
        if t >= t0:
            pos[2] = -height
    elif t >= t0 + ramp:
        pos[2] = -height
    elif t > t0:
        s, ds, dds = _quintic((t - t0) / ramp)
        pos[2] = -height * s
        vel[2] = -height * ds / ramp
        acc[2] = -height * dds / ramp**2
    return ControlReference(pos, vel, acc, yaw_d=0.0, yaw_rate_d=0.0)


class TrajectoryLog:
    """Fixed-schema time series of one run, uniform at the control period.

    Column order is part of the CSV contract (units embedded in the names);
    see COLUMNS.  All angles rad, positions m, forces N, torques N m.
    """

    COLUMNS = (
        ["t_s",
         "x_m", "y_m", "z_m", "vx_mps", "vy_mps", "vz_mps",
         "roll_rad", "pitch_rad", "yaw_rad", "p_radps", "q_radps", "r_radps"]
        + [f"q{i}_rad" for i in (1, 2, 3, 4)]
        + [f"qd{i}_radps" for i in (1, 2, 3, 4)]
        + ["x_ref_m", "y_ref_m", "z_ref_m", "yaw_ref_rad",
           "roll_cmd_rad", "pitch_cmd_rad",
           "thrust_n", "taux_nm", "tauy_nm", "tauz_nm",
           "fdis_x_n", "fdis_y_n", "fdis_z_n",
           "taudis_x_nm", "taudis_y_nm", "taudis_z_nm",
           "fdis_hat_x_n", "fdis_hat_y_n", "fdis_hat_z_n",
           "taudis_hat_x_nm", "taudis_hat_y_nm", "taudis_hat_z_nm",
           "nn_x_mps2", "nn_y_mps2", "nn_z_mps2",
           "nn_roll_radps2", "nn_pitch_radps2", "nn_yaw_radps2",
           "acc_x_mps2", "acc_y_mps2", "acc_z_mps2",
           "wdot_x_radps2", "wdot_y_radps2", "wdot_z_radps2",
           "ext_fx_n", "ext_fy_n", "ext_fz_n"]
    )

    def __init__(self, data: np.ndarray):
        data = np.atleast_2d(np.asarray(data, dtype=float))
        if data.shape[1] != len(self.COLUMNS):
            raise ValueError(
                f"expected {len(self.COLUMNS)} columns, got {data.shape[1]}")
        self.data = data
        self._index = {name: i for i, name in enumerate(self.COLUMNS)}

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self._index[name]]

    def columns(self, names) -> np.ndarray:
        return self.data[:, [self._index[n] for n in names]]

    @property
    def t(self) -> np.ndarray:
        return self.column("t_s")

    @property
    def position(self) -> np.ndarray:
        return self.columns(["x_m", "y_m", "z_m"])

    @property
    def position_error(self) -> np.ndarray:
        return self.position - self.columns(["x_ref_m", "y_ref_m", "z_ref_m"])

    @property
    def attitude_error(self) -> np.ndarray:
        att = self.columns(["roll_rad", "pitch_rad", "yaw_rad"])
        cmd = self.columns(["roll_cmd_rad", "pitch_cmd_rad", "yaw_ref_rad"])
        return att - cmd

    @property
    def nn_outputs(self) -> np.ndarray:
        return self.columns(["nn_x_mps2", "nn_y_mps2", "nn_z_mps2",
                             "nn_roll_radps2", "nn_pitch_radps2",
                             "nn_yaw_radps2"])

    def window(self, t_lo: float, t_hi: float) -> "TrajectoryLog":
        mask = (self.t >= t_lo) & (self.t <= t_hi)
        return TrajectoryLog(self.data[mask])

    def save_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(self.COLUMNS) + "\n")
            for row in self.data:
                fh.write(",".join(f"{v:.12g}" for v in row) + "\n")

    @classmethod
    def load_csv(cls, path) -> "TrajectoryLog":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            if header != list(cls.COLUMNS):
                raise ValueError(f"unexpected CSV header in {path}")
            data = np.loadtxt(fh, delimiter=",")
        return cls(data)


def _step_force(cfg: dict, t: float) -> tuple[np.ndarray, str] | None:
    step = cfg["scenario"]["step_disturbance"]
    if step is None or step.get("time") is None:
        return None
    if t < float(step["time"]):
        return None
    return np.asarray(step["force"], dtype=float), step["frame"]


def run_scenario(cfg: dict | None = None, controller_type: str | None = None,
                 seed: int | None = None) -> TrajectoryLog:
    """Run one closed-loop scenario; returns the trajectory log.

    `controller_type` and `seed` override the config in place (convenience
    for comparison runs).  Raises SimulationDiverged (with the partial log
    attached as `.partial_log`) if the state becomes non-finite.
    """
    cfg = normalize_config(cfg if cfg is not None else {})
    if controller_type is not None:
        cfg["controller"]["type"] = controller_type
        config_mod._check_semantics(cfg)
    if seed is not None:
        cfg["seed"] = int(seed)

    dynamics = config_mod.build_dynamics(cfg)
    controller = config_mod.build_controller(cfg, dynamics)
    program = make_joint_program(cfg)
    masses = dynamics.masses
    gravity = dynamics.uav.gravity

    control_dt = float(cfg["sim"]["control_dt"])
    physics_dt = float(cfg["sim"]["physics_dt"])
    substeps = int(round(control_dt / physics_dt))
    n_ctrl = int(round(float(cfg["sim"]["duration"]) / control_dt))

    state = UavState.zero()
    prev_accel = (np.zeros(3), np.zeros(3))
    rows = np.empty((n_ctrl + 1, len(TrajectoryLog.COLUMNS)))

    for k in range(n_ctrl + 1):
        t = k * control_dt
        manip, ip = dynamics.manip_params(program, t)
        ref = reference_generator(t, cfg)

        step = _step_force(cfg, t)
        if step is None:
            ext_force = None
            ext_log = np.zeros(3)
        else:
            force, frame = step
            if frame == "body":
                force = rotation_from_euler(state.euler) @ force
            ext_force = force
            ext_log = force

        if getattr(controller, "use_truth_accel", False):
            controller.provide_truth_accel(*prev_accel)
        out = controller.step(t, state, manip, ref, control_dt)

        v_dot, w_dot = dynamics.assemble_accelerations(state, ip, out.wrench,
                                                       ext_force=ext_force)
        prev_accel = (v_dot, w_dot)
        truth_force = coupling_force(state, ip, masses, w_dot)
        truth_torque = coupling_torque(state, ip, masses, w_dot, v_dot, gravity)

        rows[k] = np.concatenate([
            [t], state.position, state.velocity, state.euler, state.body_rates,
            manip.q, manip.qd,
            ref.position_d, [ref.yaw_d], out.att_cmd[0:2],
            [out.wrench.thrust], out.wrench.torque,
            truth_force, truth_torque,
            out.feedforward.force, out.feedforward.torque,
            out.nn_outputs,
            v_dot, w_dot, ext_log,
        ])

        if k == n_ctrl:
            break
        try:
            for s in range(substeps):
                state = dynamics.step_rk4(state, t + s * physics_dt,
                                          physics_dt, program, out.wrench,
                                          ext_force=ext_force)
        except SimulationDiverged as exc:
            exc.partial_log = TrajectoryLog(rows[:k + 1])
            raise

    return TrajectoryLog(rows)
