"""Closed-loop controllers sharing one interface: adaptive-NN backstepping,
cascade PID, and cascade PID with coupling-disturbance feedforward.

All three map (state, reference) to a thrust + body-torque wrench at the
control rate.  The backstepping laws are kept as literal, separately
testable functions; the controller classes only add the causal plumbing
(error bookkeeping, derivative estimation, network updates).

The mass in the position law is the total system mass: the translational
dynamics divide the applied force by the whole vehicle's mass, arm
included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .disturbance import DerivativeEstimator, Wrench, feedforward_wrench
from .dynamics import ControlWrench, UavParams, UavState
from .inertia import InertiaModel
from .kinematics import ManipulatorState
from .rbfnn import RbfNetwork, error_signal
from . import params as canonical

MIN_THRUST = 1e-6  # [N] below this the attitude extraction is degenerate


@dataclass
class BackstepGains:
    """Backstepping gains k1..k12 (positive) and NN learning rates eta1..eta6."""

    k: np.ndarray = field(default_factory=lambda: np.array(canonical.BACKSTEP_K))
    eta: np.ndarray = field(default_factory=lambda: np.array(canonical.BACKSTEP_ETA))

    def __post_init__(self):
        self.k = np.asarray(self.k, dtype=float)
        self.eta = np.asarray(self.eta, dtype=float)
        if self.k.shape != (12,) or np.any(self.k <= 0.0):
            raise ValueError("need 12 strictly positive backstepping gains")
        if self.eta.shape != (6,) or np.any((self.eta <= 0) | (self.eta >= 1)):
            raise ValueError("need 6 learning rates in (0, 1)")


@dataclass
class PidGains:
    """Cascade PID gains: position/attitude P outer loops, velocity/rate PID
    inner loops (xy/z and rollpitch/yaw pairs share values)."""

    kp_xy: float = canonical.PID_GAINS["kp_xy"]
    kp_z: float = canonical.PID_GAINS["kp_z"]
    kp_vxy: float = canonical.PID_GAINS["kp_vxy"]
    kp_vz: float = canonical.PID_GAINS["kp_vz"]
    ki_vxy: float = canonical.PID_GAINS["ki_vxy"]
    ki_vz: float = canonical.PID_GAINS["ki_vz"]
    kd_vxy: float = canonical.PID_GAINS["kd_vxy"]
    kd_vz: float = canonical.PID_GAINS["kd_vz"]
    kp_rollpitch: float = canonical.PID_GAINS["kp_rollpitch"]
    kp_yaw: float = canonical.PID_GAINS["kp_yaw"]
    kp_pq: float = canonical.PID_GAINS["kp_pq"]
    kp_r: float = canonical.PID_GAINS["kp_r"]
    ki_pq: float = canonical.PID_GAINS["ki_pq"]
    ki_r: float = canonical.PID_GAINS["ki_r"]
    kd_pq: float = canonical.PID_GAINS["kd_pq"]
    kd_r: float = canonical.PID_GAINS["kd_r"]
    integral_limit: float = 1.0  # cap on each integral term's contribution


@dataclass
class ControlReference:
    """Position reference with derivatives plus yaw reference."""

    position_d: np.ndarray
    velocity_d: np.ndarray
    accel_d: np.ndarray
    yaw_d: float = 0.0
    yaw_rate_d: float = 0.0

    def __post_init__(self):
        self.position_d = np.asarray(self.position_d, dtype=float)
        self.velocity_d = np.asarray(self.velocity_d, dtype=float)
        self.accel_d = np.asarray(self.accel_d, dtype=float)

    @classmethod
    def hold(cls, position) -> "ControlReference":
        return cls(np.asarray(position, dtype=float), np.zeros(3), np.zeros(3))


@dataclass
class ControllerOutput:
    wrench: ControlWrench
    att_cmd: np.ndarray                 # commanded (roll, pitch, yaw) [rad]
    feedforward: Wrench                 # coupling compensation used (zero for PID)
    nn_outputs: np.ndarray              # 6 channel estimates (zero for PID)


class ExtractResult(NamedTuple):
    thrust: float
    roll_d: float
    pitch_d: float
    clamped: bool      # arcsin argument was saturated to [-1, 1]
    degenerate: bool   # force vector too small; caller should hold attitude


def thrust_attitude_extract(u_x: float, u_y: float, u_z: float,
                            yaw: float) -> ExtractResult:
    """Map a desired inertial force vector to thrust + roll/pitch commands.

    Inverse of the thrust direction map

        u_x = -u_m (cos r sin p cos y + sin r sin y)
        u_y = -u_m (cos r sin p sin y - sin r cos y)
        u_z = -u_m  cos r cos p

    valid while |roll|, |pitch| < pi/2 (i.e. u_z < 0); that forward map
    round-trips the extraction on the non-degenerate domain.
    """
    thrust = math.sqrt(u_x * u_x + u_y * u_y + u_z * u_z)
    if thrust < MIN_THRUST:
        return ExtractResult(thrust, 0.0, 0.0, False, True)
    arg = (u_y * math.cos(yaw) - u_x * math.sin(yaw)) / thrust
    clamped = abs(arg) > 1.0
    roll_d = math.asin(max(-1.0, min(1.0, arg)))
    pitch_d = math.atan((u_x * math.cos(yaw) + u_y * math.sin(yaw)) / u_z)
    return ExtractResult(thrust, roll_d, pitch_d, clamped, False)


def position_errors(state: UavState, ref: ControlReference, k) -> tuple[
        np.ndarray, np.ndarray, np.ndarray]:
    """Backstepping position error coordinates (z_odd, z_even, alpha_dot).

    z_odd is the position error, alpha the virtual velocity command
    -k_odd z_odd + vel_d, z_even the velocity error w.r.t. alpha, and
    alpha_dot its analytic derivative -k_odd (v - vel_d) + accel_d.
    """
    k_odd = np.array([k[0], k[2], k[4]])
    z_odd = state.position - ref.position_d
    alpha = -k_odd * z_odd + ref.velocity_d
    z_even = state.velocity - alpha
    alpha_dot = -k_odd * (state.velocity - ref.velocity_d) + ref.accel_d
    return z_odd, z_even, alpha_dot


def annb_position(state: UavState, ref: ControlReference, nn_out,
                  f_dis_hat, gains: BackstepGains, mass: float,
                  gravity: float) -> np.ndarray:
    """Backstepping position law: desired inertial force vector (u_x, u_y, u_z).

    Per channel: u = m(-k_even z_even + alpha_dot - nn - z_odd) - F_hat,
    with an extra -m*g in the vertical channel to carry the weight.
    """
    nn_out = np.asarray(nn_out, dtype=float)
    f_dis_hat = np.asarray(f_dis_hat, dtype=float)
    z_odd, z_even, alpha_dot = position_errors(state, ref, gains.k)
    k_even = np.array([gains.k[1], gains.k[3], gains.k[5]])
    u = mass * (-k_even * z_even + alpha_dot - nn_out - z_odd) - f_dis_hat
    u[2] -= mass * gravity
    return u


def attitude_errors(state: UavState, att_cmd, att_rate_cmd, k) -> tuple[
        np.ndarray, np.ndarray]:
    """Backstepping attitude error coordinates (z_odd, z_even)."""
    k_odd = np.array([k[6], k[8], k[10]])
    z_odd = state.euler - np.asarray(att_cmd, dtype=float)
    alpha = -k_odd * z_odd + np.asarray(att_rate_cmd, dtype=float)
    z_even = state.body_rates - alpha
    return z_odd, z_even


def annb_attitude(state: UavState, att_cmd, att_rate_cmd, nn_out,
                  tau_dis_hat, gains: BackstepGains, inertia_diag,
                  printed_gyro: bool = False) -> np.ndarray:
    """Backstepping attitude law: body torque (roll, pitch, yaw channels).

    The attitude-loop networks absorb the virtual-control derivative, so no
    alpha_dot appears here.  Gyroscopic cancellation follows the state-space
    model (roll channel uses q*r); printed_gyro=True substitutes the
    yaw-angle*r variant found in some statements of the law, kept only for
    fidelity studies.
    """
    nn_out = np.asarray(nn_out, dtype=float)
    tau_dis_hat = np.asarray(tau_dis_hat, dtype=float)
    j_roll, j_pitch, j_yaw = inertia_diag
    p, q, r = state.body_rates
    z_odd, z_even = attitude_errors(state, att_cmd, att_rate_cmd, gains.k)
    k_even = np.array([gains.k[7], gains.k[9], gains.k[11]])
    core = (np.array([j_roll, j_pitch, j_yaw])
            * (-k_even * z_even - nn_out - z_odd) - tau_dis_hat)
    roll_mix = state.euler[2] * r if printed_gyro else q * r
    core[0] += -j_pitch * roll_mix + j_yaw * r * p
    core[1] += -j_yaw * r * q + j_roll * p * r
    core[2] += -j_roll * p * p + j_pitch * q * q
    return core


class AnnbController:
    """Adaptive-NN backstepping controller with coupling feedforward.

    Owns six RBF networks (one per channel), the causal acceleration
    estimators feeding the coupling model, and the previous-step error
    bookkeeping for the NN error signals.  Single-writer: one instance per
    simulation loop.
    """

    def __init__(self, gains: BackstepGains, uav: UavParams,
                 inertia_model: InertiaModel, networks: list[RbfNetwork],
                 accel_cutoff_rad: float = 50.0, use_truth_accel: bool = False,
                 printed_gyro: bool = False, error_filter_cutoff: float | None = None,
                 thrust_limit: float | None = None,
                 torque_limit: float | None = None):
        if len(networks) != 6:
            raise ValueError("need one network per channel (6)")
        self.gains = gains
        self.uav = uav
        self.inertia_model = inertia_model
        self.networks = networks
        self.use_truth_accel = use_truth_accel
        self.printed_gyro = printed_gyro
        self.error_filter_cutoff = error_filter_cutoff
        self.thrust_limit = thrust_limit
        self.torque_limit = torque_limit
        self._vdot_est = DerivativeEstimator(accel_cutoff_rad)
        self._wdot_est = DerivativeEstimator(accel_cutoff_rad)
        self._attcmd_rate_est = DerivativeEstimator(accel_cutoff_rad, dim=2)
        self.reset()

    def reset(self):
        for net in self.networks:
            net.weights = np.zeros_like(net.weights)
        self._vdot_est.reset()
        self._wdot_est.reset()
        self._attcmd_rate_est.reset()
        self._prev_z_even: np.ndarray | None = None
        self._prev_att_cmd = np.zeros(2)
        self._filtered_error = np.zeros(6)
        self._truth_accel: tuple[np.ndarray, np.ndarray] | None = None
        self.degenerate_events = 0
        self.clamp_events = 0

    def provide_truth_accel(self, v_dot, omega_dot):
        """Verification hook: bypass the causal estimators with truth."""
        self._truth_accel = (np.asarray(v_dot, dtype=float),
                             np.asarray(omega_dot, dtype=float))

    def step(self, t: float, state: UavState, manip: ManipulatorState,
             ref: ControlReference, dt: float) -> ControllerOutput:
        k = self.gains.k
        x_nn = state.as_vector()

        if self.use_truth_accel and self._truth_accel is not None:
            v_dot_est, w_dot_est = self._truth_accel
        else:
            v_dot_est = self._vdot_est.update(state.velocity, dt)
            w_dot_est = self._wdot_est.update(state.body_rates, dt)
        ip = self.inertia_model.params(manip)
        ff = feedforward_wrench(state, ip, self.inertia_model.masses,
                                w_dot_est, v_dot_est, self.uav.gravity)

        # Position loop: update the channel networks from the previous-step
        # error coordinates, then evaluate the law with the fresh weights.
        z_odd_p, z_even_p, _ = position_errors(state, ref, k)
        nn_out = np.zeros(6)
        for i in range(3):
            err = error_signal(
                None if self._prev_z_even is None else self._prev_z_even[i],
                z_even_p[i], z_odd_p[i], k[2 * i + 1], dt)
            err = self._maybe_filter(i, err, dt)
            self.networks[i].ogd_update(err, x_nn, dt=dt)
            nn_out[i] = self.networks[i].evaluate(x_nn)
        u_vec = annb_position(state, ref, nn_out[0:3], ff.force, self.gains,
                              self.inertia_model.masses.total_mass,
                              self.uav.gravity)

        ext = thrust_attitude_extract(u_vec[0], u_vec[1], u_vec[2],
                                      state.euler[2])
        if ext.degenerate:
            self.degenerate_events += 1
            roll_d, pitch_d = self._prev_att_cmd
        else:
            roll_d, pitch_d = ext.roll_d, ext.pitch_d
            if ext.clamped:
                self.clamp_events += 1
        self._prev_att_cmd = np.array([roll_d, pitch_d])
        att_cmd = np.array([roll_d, pitch_d, ref.yaw_d])
        rp_rate = self._attcmd_rate_est.update(self._prev_att_cmd, dt)
        att_rate_cmd = np.array([rp_rate[0], rp_rate[1], ref.yaw_rate_d])

        z_odd_a, z_even_a = attitude_errors(state, att_cmd, att_rate_cmd, k)
        for i in range(3):
            err = error_signal(
                None if self._prev_z_even is None else self._prev_z_even[3 + i],
                z_even_a[i], z_odd_a[i], k[2 * i + 7], dt)
            err = self._maybe_filter(3 + i, err, dt)
            self.networks[3 + i].ogd_update(err, x_nn, dt=dt)
            nn_out[3 + i] = self.networks[3 + i].evaluate(x_nn)
        torque = annb_attitude(state, att_cmd, att_rate_cmd, nn_out[3:6],
                               ff.torque, self.gains, self.uav.inertia_diag,
                               printed_gyro=self.printed_gyro)

        self._prev_z_even = np.concatenate([z_even_p, z_even_a])
        thrust = ext.thrust
        if self.thrust_limit is not None:
            thrust = min(thrust, self.thrust_limit)
        if self.torque_limit is not None:
            torque = np.clip(torque, -self.torque_limit, self.torque_limit)
        return ControllerOutput(ControlWrench(thrust, torque), att_cmd, ff,
                                nn_out)

    def _maybe_filter(self, channel: int, err: float, dt: float) -> float:
        if self.error_filter_cutoff is None:
            return err
        alpha = self.error_filter_cutoff * dt / (1.0 + self.error_filter_cutoff * dt)
        self._filtered_error[channel] += alpha * (err - self._filtered_error[channel])
        return self._filtered_error[channel]


class CascadePidController:
    """Cascade PID: position/attitude P outer loops, velocity/rate PID inner
    loops.  With use_feedforward=True the coupling wrench is additionally
    compensated (force before attitude extraction, torque at the output),
    which is exactly the plain PID when that wrench is zero.
    """

    def __init__(self, gains: PidGains, uav: UavParams,
                 inertia_model: InertiaModel, use_feedforward: bool = False,
                 accel_cutoff_rad: float = 50.0, use_truth_accel: bool = False):
        self.gains = gains
        self.uav = uav
        self.inertia_model = inertia_model
        self.use_feedforward = use_feedforward
        self.use_truth_accel = use_truth_accel
        g = gains
        self._kp_pos = np.array([g.kp_xy, g.kp_xy, g.kp_z])
        self._kp_vel = np.array([g.kp_vxy, g.kp_vxy, g.kp_vz])
        self._ki_vel = np.array([g.ki_vxy, g.ki_vxy, g.ki_vz])
        self._kd_vel = np.array([g.kd_vxy, g.kd_vxy, g.kd_vz])
        self._kp_att = np.array([g.kp_rollpitch, g.kp_rollpitch, g.kp_yaw])
        self._kp_rate = np.array([g.kp_pq, g.kp_pq, g.kp_r])
        self._ki_rate = np.array([g.ki_pq, g.ki_pq, g.ki_r])
        self._kd_rate = np.array([g.kd_pq, g.kd_pq, g.kd_r])
        self._vdot_est = DerivativeEstimator(accel_cutoff_rad)
        self._wdot_est = DerivativeEstimator(accel_cutoff_rad)
        self.reset()

    def reset(self):
        self._vel_int = np.zeros(3)
        self._rate_int = np.zeros(3)
        self._prev_vel_err: np.ndarray | None = None
        self._prev_rate_err: np.ndarray | None = None
        self._prev_att_cmd = np.zeros(2)
        self._vdot_est.reset()
        self._wdot_est.reset()
        self._truth_accel: tuple[np.ndarray, np.ndarray] | None = None
        self.degenerate_events = 0
        self.clamp_events = 0

    def provide_truth_accel(self, v_dot, omega_dot):
        self._truth_accel = (np.asarray(v_dot, dtype=float),
                             np.asarray(omega_dot, dtype=float))

    def step(self, t: float, state: UavState, manip: ManipulatorState,
             ref: ControlReference, dt: float) -> ControllerOutput:
        if self.use_feedforward:
            if self.use_truth_accel and self._truth_accel is not None:
                v_dot_est, w_dot_est = self._truth_accel
            else:
                v_dot_est = self._vdot_est.update(state.velocity, dt)
                w_dot_est = self._wdot_est.update(state.body_rates, dt)
            ip = self.inertia_model.params(manip)
            ff = feedforward_wrench(state, ip, self.inertia_model.masses,
                                    w_dot_est, v_dot_est, self.uav.gravity)
        else:
            ff = Wrench.zero()

        vel_cmd = self._kp_pos * (ref.position_d - state.position) + ref.velocity_d
        vel_err = vel_cmd - state.velocity
        vel_err_rate = (np.zeros(3) if self._prev_vel_err is None
                        else (vel_err - self._prev_vel_err) / dt)
        self._prev_vel_err = vel_err
        self._vel_int = self._integrate(self._vel_int, vel_err, self._ki_vel, dt)
        accel_cmd = (self._kp_vel * vel_err + self._ki_vel * self._vel_int
                     + self._kd_vel * vel_err_rate)
        mass = self.inertia_model.masses.total_mass
        u_vec = mass * accel_cmd
        u_vec[2] -= mass * self.uav.gravity
        u_vec = u_vec - ff.force

        ext = thrust_attitude_extract(u_vec[0], u_vec[1], u_vec[2],
                                      state.euler[2])
        if ext.degenerate:
            self.degenerate_events += 1
            roll_d, pitch_d = self._prev_att_cmd
        else:
            roll_d, pitch_d = ext.roll_d, ext.pitch_d
            if ext.clamped:
                self.clamp_events += 1
        self._prev_att_cmd = np.array([roll_d, pitch_d])
        att_cmd = np.array([roll_d, pitch_d, ref.yaw_d])

        rate_cmd = self._kp_att * (att_cmd - state.euler)
        rate_err = rate_cmd - state.body_rates
        rate_err_rate = (np.zeros(3) if self._prev_rate_err is None
                         else (rate_err - self._prev_rate_err) / dt)
        self._prev_rate_err = rate_err
        self._rate_int = self._integrate(self._rate_int, rate_err,
                                         self._ki_rate, dt)
        torque = (self._kp_rate * rate_err + self._ki_rate * self._rate_int
                  + self._kd_rate * rate_err_rate)
        torque = torque - ff.torque
        return ControllerOutput(ControlWrench(ext.thrust, torque), att_cmd,
                                ff, np.zeros(6))

    def _integrate(self, acc, err, ki, dt):
        # Anti-windup: each integral term's contribution is capped at
        # +-integral_limit in its output unit.
        acc = acc + err * dt
        limit = self.gains.integral_limit
        with np.errstate(divide="ignore"):
            cap = np.where(ki > 0.0, limit / np.where(ki > 0.0, ki, 1.0), np.inf)
        return np.clip(acc, -cap, cap)
