"""Experiment configuration: one nested key/value file drives every run.

The defaults below are the shipped baseline; a YAML config file may
override any subset.  Unknown keys are rejected, and the fully resolved
configuration is embedded as a comment header in every output artifact so
results stay reproducible from the artifact alone.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, fields
from typing import Any, Dict, Optional, Tuple

import yaml

from .discretize import Discretization
from .driver import DriverParams
from .maps import EngineMapSpec, MotorMapSpec, build_engine_map, build_motor_map
from .powertrain import BatteryParams, VehicleParams
from .qlearning import Hyperparams
from .sim import SimEnv
from .supervisory import EquivalenceParams
from .warmstart import HeuristicRule


class ConfigError(ValueError):
    """Raised for unknown keys, wrong types, or invariant violations."""


INITIALIZERS = ("cold", "heuristic", "ecms")


@dataclass(frozen=True)
class RunConfig:
    initializer: str = "cold"
    seeds: Tuple[int, ...] = (0, 1, 2, 3, 4)
    initial_soc: float = 0.6
    dt_s: float = 1.0
    grade_rad: float = 0.0


@dataclass(frozen=True)
class CyclePaths:
    udds: str = "data/cycles/udds.csv"
    wltp: str = "data/cycles/wltp_class3.csv"
    hwfet: str = "data/cycles/hwfet.csv"


# Vehicle fields owned by the config file; maps are built from their specs.
_VEHICLE_CONFIG_FIELDS = tuple(
    f.name for f in fields(VehicleParams) if f.name not in ("battery", "engine_map", "motor_map")
)


@dataclass(frozen=True)
class ExperimentConfig:
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    engine_map_spec: EngineMapSpec = field(default_factory=EngineMapSpec)
    motor_map_spec: MotorMapSpec = field(default_factory=MotorMapSpec)
    driver: DriverParams = field(default_factory=DriverParams)
    equivalence: EquivalenceParams = field(default_factory=EquivalenceParams)
    discretization: Discretization = field(default_factory=Discretization)
    heuristic: HeuristicRule = field(default_factory=HeuristicRule)
    hyper: Hyperparams = field(default_factory=Hyperparams)
    run: RunConfig = field(default_factory=RunConfig)
    cycles: CyclePaths = field(default_factory=CyclePaths)

    def env(self) -> SimEnv:
        return SimEnv(
            vehicle=self.vehicle,
            driver=self.driver,
            eq=self.equivalence,
            disc=self.discretization,
            initial_soc=self.run.initial_soc,
            dt_s=self.run.dt_s,
            grade_rad=self.run.grade_rad,
        )


def _coerce(value: Any, target_type: Any, key: str) -> Any:
    try:
        if target_type is float:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if target_type is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
        if target_type is str:
            if not isinstance(value, str):
                raise TypeError
            return value
        if target_type is bool:
            if not isinstance(value, bool):
                raise TypeError
            return value
    except (TypeError, ValueError):
        raise ConfigError(f"config key '{key}': expected {target_type.__name__}, got {value!r}")
    return value


def _build_dataclass(dc_type: Any, data: Dict[str, Any], path: str) -> Any:
    if not isinstance(data, dict):
        raise ConfigError(f"config section '{path}' must be a mapping")
    allowed = {f.name: f for f in fields(dc_type)}
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown config key(s) under '{path}': {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        f = allowed[name]
        key = f"{path}.{name}"
        if dataclasses.is_dataclass(f.type) if isinstance(f.type, type) else False:
            kwargs[name] = _build_dataclass(f.type, value, key)
        elif f.type in (float, "float"):
            kwargs[name] = _coerce(value, float, key)
        elif f.type in (int, "int"):
            kwargs[name] = _coerce(value, int, key)
        elif f.type in (str, "str"):
            kwargs[name] = _coerce(value, str, key)
        elif f.type in (bool, "bool"):
            kwargs[name] = _coerce(value, bool, key)
        elif "Tuple[float" in str(f.type):
            if not isinstance(value, (list, tuple)):
                raise ConfigError(f"config key '{key}' must be a list")
            kwargs[name] = tuple(_coerce(v, float, key) for v in value)
        elif "Tuple[int" in str(f.type):
            if not isinstance(value, (list, tuple)):
                raise ConfigError(f"config key '{key}' must be a list")
            kwargs[name] = tuple(_coerce(v, int, key) for v in value)
        else:
            raise ConfigError(f"config key '{key}' is not overridable")
    return dc_type(**kwargs)


def _validate(cfg: ExperimentConfig) -> None:
    v = cfg.vehicle
    checks = [
        (v.mass_kg > 0, "vehicle.mass_kg must be positive"),
        (v.wheel_radius_m > 0, "vehicle.wheel_radius_m must be positive"),
        (0 < v.trans_efficiency <= 1, "vehicle.trans_efficiency must be in (0, 1]"),
        (0 < v.em_mech_efficiency <= 1, "vehicle.em_mech_efficiency must be in (0, 1]"),
        (v.em_min_torque_nm < 0 < v.em_max_torque_nm, "vehicle EM torque limits must straddle zero"),
        (all(g > 0 for g in v.gear_ratios), "vehicle.gear_ratios must be positive"),
        (len(v.gear_upshift_mps) == len(v.gear_ratios) - 1, "gear_upshift_mps needs one threshold per shift"),
        (all(b > a for a, b in zip(v.gear_upshift_mps, v.gear_upshift_mps[1:])), "gear_upshift_mps must increase"),
        (0 <= v.battery.soc_min < v.battery.soc_max <= 1, "battery SOC window must satisfy 0 <= min < max <= 1"),
        (v.battery.cell_capacity_ah > 0, "battery.cell_capacity_ah must be positive"),
        (cfg.run.initializer in INITIALIZERS, f"run.initializer must be one of {INITIALIZERS}"),
        (
            v.battery.soc_min <= cfg.run.initial_soc <= v.battery.soc_max,
            "run.initial_soc must lie inside the battery SOC window",
        ),
        (cfg.hyper.iterations >= 1, "hyper.iterations must be >= 1"),
        (0 <= cfg.hyper.epsilon <= 1, "hyper.epsilon must be in [0, 1]"),
        (0 < cfg.hyper.alpha <= 1, "hyper.alpha must be in (0, 1]"),
        (cfg.run.dt_s > 0, "run.dt_s must be positive"),
        (cfg.discretization.n_actions >= 2, "discretization.n_actions must be >= 2"),
        (
            cfg.discretization.action_min_nm < cfg.discretization.action_max_nm,
            "discretization action range must be increasing",
        ),
        (
            all(b > a for a, b in zip(cfg.discretization.speed_bins_mph, cfg.discretization.speed_bins_mph[1:])),
            "discretization.speed_bins_mph must be strictly increasing",
        ),
        (
            all(b > a for a, b in zip(cfg.discretization.torque_bins_nm, cfg.discretization.torque_bins_nm[1:])),
            "discretization.torque_bins_nm must be strictly increasing",
        ),
        (
            0 <= cfg.discretization.default_action_index < cfg.discretization.n_actions,
            "discretization.default_action_index out of range",
        ),
    ]
    for ok, message in checks:
        if not ok:
            raise ConfigError(message)


def build_config(data: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Construct a config from a (possibly partial) nested dict."""
    data = dict(data or {})
    known_sections = {
        "vehicle",
        "battery",
        "engine_map",
        "motor_map",
        "driver",
        "equivalence",
        "discretization",
        "heuristic",
        "hyper",
        "run",
        "cycles",
    }
    unknown = set(data) - known_sections
    if unknown:
        raise ConfigError(f"unknown top-level config section(s): {sorted(unknown)}")

    vehicle_data = dict(data.get("vehicle") or {})
    unknown_vehicle = set(vehicle_data) - set(_VEHICLE_CONFIG_FIELDS)
    if unknown_vehicle:
        raise ConfigError(f"unknown config key(s) under 'vehicle': {sorted(unknown_vehicle)}")

    battery = _build_dataclass(BatteryParams, data.get("battery") or {}, "battery")
    engine_spec = _build_dataclass(EngineMapSpec, data.get("engine_map") or {}, "engine_map")
    motor_spec = _build_dataclass(MotorMapSpec, data.get("motor_map") or {}, "motor_map")

    vehicle_defaults = VehicleParams()
    vehicle_kwargs = {}
    for name in _VEHICLE_CONFIG_FIELDS:
        f = next(f for f in fields(VehicleParams) if f.name == name)
        if name in vehicle_data:
            if "Tuple" in str(f.type):
                vehicle_kwargs[name] = tuple(float(x) for x in vehicle_data[name])
            elif f.type in (float, "float"):
                vehicle_kwargs[name] = _coerce(vehicle_data[name], float, f"vehicle.{name}")
            else:
                vehicle_kwargs[name] = vehicle_data[name]
        else:
            vehicle_kwargs[name] = getattr(vehicle_defaults, name)
    vehicle = VehicleParams(
        battery=battery,
        engine_map=build_engine_map(engine_spec),
        motor_map=build_motor_map(motor_spec),
        **vehicle_kwargs,
    )

    cfg = ExperimentConfig(
        vehicle=vehicle,
        engine_map_spec=engine_spec,
        motor_map_spec=motor_spec,
        driver=_build_dataclass(DriverParams, data.get("driver") or {}, "driver"),
        equivalence=_build_dataclass(EquivalenceParams, data.get("equivalence") or {}, "equivalence"),
        discretization=_build_dataclass(Discretization, data.get("discretization") or {}, "discretization"),
        heuristic=_build_dataclass(HeuristicRule, data.get("heuristic") or {}, "heuristic"),
        hyper=_build_dataclass(Hyperparams, data.get("hyper") or {}, "hyper"),
        run=_build_dataclass(RunConfig, data.get("run") or {}, "run"),
        cycles=_build_dataclass(CyclePaths, data.get("cycles") or {}, "cycles"),
    )
    _validate(cfg)
    return cfg


def load_config(path: Optional[str]) -> ExperimentConfig:
    if path is None:
        return build_config({})
    try:
        with open(path, "r") as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config root must be a mapping")
    return build_config(data)


def _plain(value: Any) -> Any:
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: _plain(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def resolved_dict(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Every effective setting, defaults included, as a plain nested dict."""
    vehicle = {name: _plain(getattr(cfg.vehicle, name)) for name in _VEHICLE_CONFIG_FIELDS}
    return {
        "vehicle": vehicle,
        "battery": _plain(cfg.vehicle.battery),
        "engine_map": _plain(cfg.engine_map_spec),
        "motor_map": _plain(cfg.motor_map_spec),
        "driver": _plain(cfg.driver),
        "equivalence": _plain(cfg.equivalence),
        "discretization": _plain(cfg.discretization),
        "heuristic": _plain(cfg.heuristic),
        "hyper": _plain(cfg.hyper),
        "run": _plain(cfg.run),
        "cycles": _plain(cfg.cycles),
    }


def config_header(cfg: ExperimentConfig) -> str:
    """Single-line JSON of the resolved config for output-file headers."""
    return "config " + json.dumps(resolved_dict(cfg), sort_keys=False, separators=(",", ":"))
