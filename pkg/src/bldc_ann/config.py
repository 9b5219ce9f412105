"""Flat dotted-key configuration files (TOML syntax).

Example::

    sim.t_end = 75.0
    pi.kp = 0.01
    pwm.shape = "triangle"
    reference.rpm = [[0, 0], [20, 3000]]
    load.torque = [[0, 0], [50, 12]]

Every key is optional; omitted keys keep the defaults listed in
:data:`CONFIG_KEYS`.
"""
from __future__ import annotations

import dataclasses
import math

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .controller import PiGains
from .drive import PwmConfig
from .errors import ConfigInvalid
from .motor import MotorParams
from .sim import Profile, SimConfig, rpm_to_rad

_MOTOR = MotorParams()
_SIM = SimConfig()
_PI = PiGains()

CONFIG_KEYS = {
    "sim.t_end": (_SIM.t_end, "run length, s"),
    "sim.ode_step": (_SIM.ode_step, "RK4 step, s"),
    "sim.control_step": (_SIM.control_step, "PI sample period, s"),
    "sim.log_step": (_SIM.log_step, "trace sample period, s"),
    "sim.seed": (_SIM.seed, "recorded seed (the simulation itself has no randomness)"),
    **{f"motor.{f.name}": (getattr(_MOTOR, f.name), "motor constant, SI")
       for f in dataclasses.fields(MotorParams)},
    "pwm.carrier_hz": (PwmConfig().carrier_frequency, "carrier frequency, Hz"),
    "pwm.shape": (PwmConfig().carrier_shape, "sawtooth | triangle"),
    "pi.kp": (_PI.kp, "proportional gain, duty per rad/s"),
    "pi.ki": (_PI.ki, "integral gain, duty per rad"),
    "pi.integral_limit": ("1/ki", "anti-windup clamp on the integral, rad"),
    "reference.rpm": ([[0, 0], [20, 3000]], "speed schedule [[t, rpm], ...]"),
    "load.torque": ([[0, 0], [50, 12]], "load schedule [[t, N*m], ...]"),
    "train.epochs": (100, "training epochs"),
    "train.learning_rate": ("per case", "initial step size (1e-3 cases 1-2, 1e-2 cases 3-4)"),
    "train.lr_decay": ("per case", "step size / (1 + lr_decay * (epoch - 1))"),
    "train.optimizer": ("adam", "adam | sgd"),
    "train.loss": ("mse", "mse | binary_cross_entropy"),
    "train.batch_size": ("per case", "mini-batch rows (128 cases 1-2, 32 cases 3-4)"),
    "train.split_fraction": (0.8, "training share of rows"),
    "train.seed": (0, "shuffle / init seed"),
}


def _flatten(tree, prefix=""):
    flat = {}
    for key, value in tree.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        else:
            flat[name] = value
    return flat


def read_config_file(path) -> dict:
    with open(path, "rb") as fh:
        try:
            tree = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigInvalid(f"{path}: {exc}") from exc
    flat = _flatten(tree)
    unknown = sorted(set(flat) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {', '.join(unknown)}")
    return flat


def sim_config_from_mapping(flat: dict) -> SimConfig:
    """Build a :class:`SimConfig` from dotted keys, validating as it goes."""
    try:
        motor = MotorParams(**{k[6:]: v for k, v in flat.items() if k.startswith("motor.")})
        limit = flat.get("pi.integral_limit")
        gains = PiGains(kp=float(flat.get("pi.kp", _PI.kp)), ki=float(flat.get("pi.ki", _PI.ki)),
                        integral_limit=None if limit is None else float(limit))
        pwm = PwmConfig(float(flat.get("pwm.carrier_hz", PwmConfig().carrier_frequency)),
                        str(flat.get("pwm.shape", PwmConfig().carrier_shape)))
        kwargs = {}
        for key in ("t_end", "ode_step", "control_step", "log_step"):
            if f"sim.{key}" in flat:
                kwargs[key] = float(flat[f"sim.{key}"])
        if "sim.seed" in flat:
            kwargs["seed"] = int(flat["sim.seed"])
        if "reference.rpm" in flat:
            kwargs["reference_profile"] = Profile(
                tuple((t, rpm_to_rad(v)) for t, v in flat["reference.rpm"]))
        if "load.torque" in flat:
            kwargs["load_profile"] = Profile(tuple((t, v) for t, v in flat["load.torque"]))
        cfg = SimConfig(motor=motor, gains=gains, pwm=pwm, **kwargs)
    except ConfigInvalid:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(str(exc)) from exc
    if not all(math.isfinite(x) for x in (cfg.t_end, cfg.ode_step, cfg.control_step, cfg.log_step)):
        raise ConfigInvalid("step sizes and t_end must be finite")
    cfg.step_counts()
    try:
        cfg.pwm.samples_per_period(cfg.ode_step)
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from exc
    return cfg


def load_sim_config(path) -> SimConfig:
    return sim_config_from_mapping(read_config_file(path))
