"""Run configuration: defaults, YAML loading, validation, object builders.

A run is fully described by one YAML document.  Any subset of keys may be
given; missing keys take the defaults below, unknown keys are rejected by
name.  `default_config()` is the schema by example: key paths, types and
vector lengths are validated against it.
"""

from __future__ import annotations

import copy
import math
from typing import Any

import numpy as np
import yaml

from . import params as canonical
from .controllers import (AnnbController, BackstepGains, CascadePidController,
                          PidGains)
from .dynamics import AmsDynamics, UavParams, rotation_from_euler
from .inertia import InertiaModel
from .kinematics import ArmModel, DhRow, HomogeneousTransform, LinkParams
from .rbfnn import RbfNetwork


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


# Default envelope of the 12 state inputs [x, vx, y, vy, z, vz, roll, p,
# pitch, q, yaw, r] visited by the hover + arm-sweep scenarios, used to
# place RBF centers.  Derived from a dry run; override for other missions.
_RBF_LOWER = [-0.3, -0.5, -0.3, -0.5, -1.3, -1.0, -0.3, -1.0, -0.3, -1.0, -0.3, -1.0]
_RBF_UPPER = [0.3, 0.5, 0.3, 0.5, 0.1, 1.0, 0.3, 1.0, 0.3, 1.0, 0.3, 1.0]


def default_config() -> dict:
    """Canonical configuration reproducing the benchmark study at desk scale."""
    return {
        "seed": 0,
        "uav": {
            "mass": canonical.UAV_MASS,
            "inertia": list(canonical.UAV_INERTIA_DIAG),
            "gravity": canonical.GRAVITY,
        },
        "arm": {
            # Mount pose of the arm base in the body frame.  The reference
            # platform hangs the arm directly under the body origin with
            # aligned axes; flip the rpy here for an inverted mounting.
            "mount": {"translation": [0.0, 0.0, 0.0], "rpy": [0.0, 0.0, 0.0]},
            "dh": [[row.alpha_prev, row.a_prev, row.d, row.theta_offset]
                   for row in canonical.DH_TABLE],
            "links": [
                {"mass": m, "com": list(c), "inertia": i.tolist()}
                for m, c, i in zip(canonical.LINK_MASSES, canonical.LINK_COMS,
                                   canonical.LINK_INERTIAS)
            ],
            "joint_limits": [-math.pi, math.pi],
        },
        "sim": {
            "duration": 40.0,
            "physics_dt": 0.001,
            "control_dt": 0.002,
        },
        "scenario": {
            "takeoff_time": 1.0,
            "takeoff_ramp": 2.0,
            "takeoff_profile": "quintic",  # quintic | step
            "hover_height": 1.0,
            "joint_program": "eq21",  # static | eq21 | experiment_sweep | custom
            "static_pose": [0.0, 0.0, 0.0, 0.0],
            "sweep_period": 10.0,
            "sweep_start": 0.0,
            "sweep_pose": [0.0, 0.0, 0.0, 0.0],
            "custom_table": [],
            "step_disturbance": {
                "time": 15.0,
                "force": [0.0, 0.0, 3.75],
                "frame": "inertial",
            },
        },
        "controller": {
            "type": "annb",  # pid | pid_ff | annb
            "backstepping": {
                "k": list(canonical.BACKSTEP_K),
                "eta": list(canonical.BACKSTEP_ETA),
            },
            "pid": dict(canonical.PID_GAINS) | {"integral_limit": 1.0},
            "rbf": {
                "nodes": 25,
                "width_scale": 2.0,
                "input_lower": list(_RBF_LOWER),
                "input_upper": list(_RBF_UPPER),
                "dt_scaled": False,
            },
            "estimator": {
                "cutoff_rad": 50.0,
                "use_truth_accel": False,
            },
            "options": {
                "printed_gyro": False,
                "error_filter_cutoff": None,
                "thrust_limit": None,
                "torque_limit": None,
            },
        },
        "metrics": {
            "window": [10.0, 40.0],
            "mape_floor_fraction": 0.01,
        },
    }


def _validate(node: Any, default: Any, path: str):
    if isinstance(default, dict):
        if not isinstance(node, dict):
            raise ConfigError(f"config key '{path}' must be a mapping")
        for key, value in node.items():
            if key not in default:
                raise ConfigError(f"unknown config key '{path}.{key}'".lstrip("."))
            _validate(value, default[key], f"{path}.{key}" if path else key)
    elif isinstance(default, bool):
        if not isinstance(node, bool):
            raise ConfigError(f"config key '{path}' must be a boolean")
    elif isinstance(default, (int, float)):
        if node is not None and not isinstance(node, (int, float)):
            raise ConfigError(f"config key '{path}' must be a number")
    elif isinstance(default, str):
        if not isinstance(node, str):
            raise ConfigError(f"config key '{path}' must be a string")
    elif isinstance(default, list):
        if not isinstance(node, list):
            raise ConfigError(f"config key '{path}' must be a list")
    elif default is None:
        if node is not None and not isinstance(node, (int, float)):
            raise ConfigError(f"config key '{path}' must be a number or null")


def _merge(default: dict, override: dict) -> dict:
    out = copy.deepcopy(default)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def normalize_config(overrides: dict | None) -> dict:
    """Validate overrides against the schema and merge onto the defaults."""
    defaults = default_config()
    if overrides is None:
        return defaults
    if not isinstance(overrides, dict):
        raise ConfigError("top-level config must be a mapping")
    _validate(overrides, defaults, "")
    merged = _merge(defaults, overrides)
    _check_semantics(merged)
    return merged


def _check_semantics(cfg: dict):
    sim = cfg["sim"]
    if sim["duration"] <= 0:
        raise ConfigError("config key 'sim.duration' must be positive")
    if sim["physics_dt"] <= 0 or sim["control_dt"] <= 0:
        raise ConfigError("config keys 'sim.physics_dt'/'sim.control_dt' must be positive")
    ratio = sim["control_dt"] / sim["physics_dt"]
    if abs(ratio - round(ratio)) > 1e-9:
        raise ConfigError(
            "config key 'sim.control_dt' must be an integer multiple of 'sim.physics_dt'")
    if cfg["scenario"]["joint_program"] not in ("static", "eq21",
                                                "experiment_sweep", "custom"):
        raise ConfigError("config key 'scenario.joint_program' must be one of "
                          "static|eq21|experiment_sweep|custom")
    if cfg["scenario"]["takeoff_profile"] not in ("quintic", "step"):
        raise ConfigError("config key 'scenario.takeoff_profile' must be quintic|step")
    if cfg["controller"]["type"] not in ("pid", "pid_ff", "annb"):
        raise ConfigError("config key 'controller.type' must be pid|pid_ff|annb")
    step = cfg["scenario"]["step_disturbance"]
    if step is not None and step.get("frame") not in ("inertial", "body"):
        raise ConfigError(
            "config key 'scenario.step_disturbance.frame' must be inertial|body")


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        data = {}
    return normalize_config(data)


def dump_config(cfg: dict) -> str:
    return yaml.safe_dump(cfg, sort_keys=False)


# -- builders -----------------------------------------------------------------

def build_arm(cfg: dict) -> ArmModel:
    arm = cfg["arm"]
    mount_cfg = arm["mount"]
    mount = HomogeneousTransform(
        rotation_from_euler(mount_cfg["rpy"]),
        np.asarray(mount_cfg["translation"], dtype=float),
    )
    rows = [DhRow(*[float(v) for v in row]) for row in arm["dh"]]
    links = [LinkParams(mass=float(l["mass"]), com=l["com"], inertia_com=l["inertia"])
             for l in arm["links"]]
    return ArmModel(rows, links, mount=mount, joint_limits=arm["joint_limits"])


def build_uav(cfg: dict) -> UavParams:
    uav = cfg["uav"]
    return UavParams(mass=float(uav["mass"]),
                     inertia_diag=tuple(float(v) for v in uav["inertia"]),
                     gravity=float(uav["gravity"]))


def build_dynamics(cfg: dict) -> AmsDynamics:
    uav = build_uav(cfg)
    return AmsDynamics(uav, InertiaModel(build_arm(cfg), uav.mass))


def build_networks(cfg: dict, seed: int | None = None) -> list[RbfNetwork]:
    rbf = cfg["controller"]["rbf"]
    eta = cfg["controller"]["backstepping"]["eta"]
    base_seed = cfg["seed"] if seed is None else seed
    nets = []
    for channel in range(6):
        nets.append(RbfNetwork.latin_hypercube(
            rbf["input_lower"], rbf["input_upper"], int(rbf["nodes"]),
            float(eta[channel]), width_scale=float(rbf["width_scale"]),
            seed=int(base_seed) + channel, dt_scaled=bool(rbf["dt_scaled"])))
    return nets


def build_controller(cfg: dict, dynamics: AmsDynamics | None = None,
                     seed: int | None = None):
    if dynamics is None:
        dynamics = build_dynamics(cfg)
    ctrl = cfg["controller"]
    est = ctrl["estimator"]
    opts = ctrl["options"]
    kind = ctrl["type"]
    if kind == "annb":
        gains = BackstepGains(k=ctrl["backstepping"]["k"],
                              eta=ctrl["backstepping"]["eta"])
        return AnnbController(
            gains, dynamics.uav, dynamics.inertia_model,
            build_networks(cfg, seed=seed),
            accel_cutoff_rad=float(est["cutoff_rad"]),
            use_truth_accel=bool(est["use_truth_accel"]),
            printed_gyro=bool(opts["printed_gyro"]),
            error_filter_cutoff=opts["error_filter_cutoff"],
            thrust_limit=opts["thrust_limit"],
            torque_limit=opts["torque_limit"])
    gains = PidGains(**ctrl["pid"])
    return CascadePidController(
        gains, dynamics.uav, dynamics.inertia_model,
        use_feedforward=(kind == "pid_ff"),
        accel_cutoff_rad=float(est["cutoff_rad"]),
        use_truth_accel=bool(est["use_truth_accel"]))
