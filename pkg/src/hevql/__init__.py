"""Forward-looking parallel hybrid vehicle simulation with tabular
Q-learning energy management and warm-started training."""

from .config import ConfigError, ExperimentConfig, build_config, load_config
from .cycle import CycleFormatError, DriveCycle, load_cycle
from .discretize import Discretization, discretize_state
from .driver import DriverParams, DriverState, TorqueDemand, driver_step, torque_demand
from .maps import EngineMap, EngineMapSpec, MotorMap, MotorMapSpec, build_engine_map, build_motor_map
from .powertrain import BatteryParams, PlantState, StepOutcome, VehicleParams, plant_step
from .qlearning import (
    Hyperparams,
    LearningRecord,
    QTable,
    evaluate_greedy,
    load_qtable,
    save_qtable,
    train,
)
from .sim import Episode, SimEnv, run_episode
from .supervisory import ControlDecision, EquivalenceParams, ecms_action, equivalent_fuel_rate, reward
from .warmstart import HeuristicRule, cold_init, ecms_warmstart, heuristic_init, optimal_action_map

__version__ = "0.1.0"

__all__ = [
    "BatteryParams",
    "ConfigError",
    "ControlDecision",
    "CycleFormatError",
    "Discretization",
    "DriveCycle",
    "DriverParams",
    "DriverState",
    "EngineMap",
    "EngineMapSpec",
    "Episode",
    "EquivalenceParams",
    "ExperimentConfig",
    "HeuristicRule",
    "Hyperparams",
    "LearningRecord",
    "MotorMap",
    "MotorMapSpec",
    "PlantState",
    "QTable",
    "SimEnv",
    "StepOutcome",
    "TorqueDemand",
    "VehicleParams",
    "build_config",
    "build_engine_map",
    "build_motor_map",
    "cold_init",
    "discretize_state",
    "driver_step",
    "ecms_action",
    "ecms_warmstart",
    "equivalent_fuel_rate",
    "evaluate_greedy",
    "heuristic_init",
    "load_config",
    "load_cycle",
    "load_qtable",
    "optimal_action_map",
    "plant_step",
    "reward",
    "run_episode",
    "save_qtable",
    "torque_demand",
    "train",
]
