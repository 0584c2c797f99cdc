"""State/action discretization for the tabular controller.

States are (vehicle speed, traction torque demand) pairs binned to the
nearest bin center with clamping at the ends; actions are an evenly spaced
EM torque grid indexed 0..n-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from .units import MPH_TO_MPS


def _bin_index(centers: Tuple[float, ...], value: float) -> int:
    # Nearest center wins; midpoints round down to the lower bin.
    best = 0
    best_d = abs(value - centers[0])
    for i in range(1, len(centers)):
        d = abs(value - centers[i])
        if d < best_d:
            best, best_d = i, d
    return best


@dataclass(frozen=True)
class Discretization:
    speed_bins_mph: Tuple[float, ...] = (0.0, 16.0, 32.0, 48.0, 64.0)
    torque_bins_nm: Tuple[float, ...] = (0.0, 100.0, 200.0, 300.0, 400.0)
    action_min_nm: float = -100.0
    action_max_nm: float = 250.0
    n_actions: int = 20
    default_action_index: int = 9  # tie-break action, torque nearest 65 N m

    @property
    def speed_bins_mps(self) -> Tuple[float, ...]:
        return tuple(v * MPH_TO_MPS for v in self.speed_bins_mph)

    @property
    def action_torques_nm(self) -> Tuple[float, ...]:
        step = (self.action_max_nm - self.action_min_nm) / (self.n_actions - 1)
        return tuple(self.action_min_nm + k * step for k in range(self.n_actions))

    @property
    def n_speed(self) -> int:
        return len(self.speed_bins_mph)

    @property
    def n_torque(self) -> int:
        return len(self.torque_bins_nm)

    def speed_index(self, speed_mps: float) -> int:
        return _bin_index(self.speed_bins_mps, speed_mps)

    def torque_index(self, demand_nm: float) -> int:
        return _bin_index(self.torque_bins_nm, demand_nm)


def discretize_state(speed_mps: float, demand_nm: float, disc: Discretization) -> Tuple[int, int]:
    return disc.speed_index(speed_mps), disc.torque_index(demand_nm)


def action_torque(index: int, disc: Discretization) -> float:
    if not 0 <= index < disc.n_actions:
        raise IndexError(f"action index {index} outside 0..{disc.n_actions - 1}")
    return disc.action_torques_nm[index]
