"""Closed-loop episode simulation: driver -> torque demand -> supervisory
action -> plant, at a fixed 1 Hz step.

The policy is only consulted on traction steps (demand > 0).  Braking steps
force regenerative EM torque scaled by the brake pedal, and pure-coast
steps apply zero torque; both are recorded as forced so learning updates
can skip them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List

from .cycle import DriveCycle
from .discretize import Discretization, discretize_state
from .driver import DriverParams, DriverState, driver_step, torque_demand
from .powertrain import PlantState, VehicleParams, plant_step, select_gear
from .supervisory import EquivalenceParams, em_demand_factor, reward, split_demand
from .units import FUEL_DENSITY_KG_PER_L, GALLON_L, MILE_M

# Controller: (speed_mps, gear, demand_nm, soc) -> action index.
Controller = Callable[[float, int, float, float], int]

FORCED_ACTION = -1


@dataclass(frozen=True)
class SimEnv:
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    driver: DriverParams = field(default_factory=DriverParams)
    eq: EquivalenceParams = field(default_factory=EquivalenceParams)
    disc: Discretization = field(default_factory=Discretization)
    initial_soc: float = 0.6
    dt_s: float = 1.0
    grade_rad: float = 0.0


@dataclass
class Episode:
    """One simulated traversal of a cycle; length = cycle samples - 1."""

    cycle_name: str
    ref_speeds: List[float]
    speeds: List[float]            # speed trace, one entry per cycle sample
    socs: List[float]
    gears: List[int]
    demands: List[float]           # traction demand per step (N m)
    brakes: List[float]            # brake demand per step (<= 0)
    speed_indices: List[int]
    demand_indices: List[int]
    action_indices: List[int]      # FORCED_ACTION on forced steps
    em_torques: List[float]        # realized EM shaft torque
    engine_torques: List[float]
    fuel_rates: List[float]
    battery_powers: List[float]
    rewards: List[float]
    dt_s: float
    reward_violations: int = 0
    engine_saturations: int = 0
    fuel_map_clamps: int = 0

    @property
    def n_steps(self) -> int:
        return len(self.rewards)

    @property
    def reward_sum(self) -> float:
        return math.fsum(self.rewards)

    @property
    def fuel_kg(self) -> float:
        return math.fsum(r * self.dt_s for r in self.fuel_rates)

    @property
    def distance_m(self) -> float:
        return math.fsum(
            0.5 * (self.speeds[j] + self.speeds[j + 1]) * self.dt_s for j in range(self.n_steps)
        )

    @property
    def final_soc(self) -> float:
        return self.socs[-1]

    def mpg(self) -> float:
        """Engine-fuel-only economy; nan when the cycle covers no distance."""
        dist = self.distance_m
        if dist <= 0.0:
            return float("nan")
        gallons = self.fuel_kg / FUEL_DENSITY_KG_PER_L / GALLON_L
        if gallons <= 0.0:
            return float("inf")
        return (dist / MILE_M) / gallons

    def tracking_errors_mps(self) -> List[float]:
        return [self.speeds[j] - self.ref_speeds[j] for j in range(len(self.speeds))]

    def max_tracking_error_mps(self) -> float:
        return max(abs(e) for e in self.tracking_errors_mps())

    def rms_tracking_error_mps(self) -> float:
        errs = self.tracking_errors_mps()
        return math.sqrt(math.fsum(e * e for e in errs) / len(errs))


def run_episode(controller: Controller, cycle: DriveCycle, env: SimEnv) -> Episode:
    """Simulate the full cycle under the given supervisory controller."""
    vehicle = env.vehicle
    disc = env.disc
    dt = env.dt_s
    kappa = em_demand_factor(vehicle)

    v0 = cycle.speeds_mps[0]
    state = PlantState(
        speed_mps=v0,
        soc=env.initial_soc,
        gear=select_gear(v0, vehicle),
        time_s=cycle.timestamps_s[0],
    )
    drv = DriverState()

    n = cycle.n_samples
    ep = Episode(
        cycle_name=cycle.name,
        ref_speeds=list(cycle.speeds_mps),
        speeds=[v0],
        socs=[state.soc],
        gears=[],
        demands=[],
        brakes=[],
        speed_indices=[],
        demand_indices=[],
        action_indices=[],
        em_torques=[],
        engine_torques=[],
        fuel_rates=[],
        battery_powers=[],
        rewards=[],
        dt_s=dt,
    )

    for j in range(n - 1):
        # The driver regulates against the concurrent cycle sample; aiming at
        # the next one settles steady ramps a full step ahead of the trace.
        pedal, drv = driver_step(cycle.speeds_mps[j], state.speed_mps, drv, dt, env.driver)
        demand = torque_demand(pedal, env.driver)

        s_idx, d_idx = discretize_state(state.speed_mps, demand.traction_nm, disc)

        if demand.brake_nm < 0.0:
            # Regenerative braking overrides the policy; friction brakes
            # absorb whatever the EM cannot, inside plant_step.
            a_idx = FORCED_ACTION
            em_cmd = demand.brake_nm / kappa
            ice_cmd = 0.0
        elif demand.traction_nm > 0.0:
            a_idx = controller(state.speed_mps, state.gear, demand.traction_nm, state.soc)
            em_cmd, ice_cmd = split_demand(
                demand.traction_nm, disc.action_torques_nm[a_idx], state.gear, vehicle
            )
        else:
            a_idx = FORCED_ACTION
            em_cmd = 0.0
            ice_cmd = 0.0

        out = plant_step(state, ice_cmd, em_cmd, env.grade_rad, dt, vehicle)
        r = reward(out.fuel_rate_kgps, out.battery_power_w, dt, env.eq)

        ep.gears.append(state.gear)
        ep.demands.append(demand.traction_nm)
        ep.brakes.append(demand.brake_nm)
        ep.speed_indices.append(s_idx)
        ep.demand_indices.append(d_idx)
        ep.action_indices.append(a_idx)
        ep.em_torques.append(out.em_torque_nm)
        ep.engine_torques.append(out.engine_torque_nm)
        ep.fuel_rates.append(out.fuel_rate_kgps)
        ep.battery_powers.append(out.battery_power_w)
        ep.rewards.append(r)
        ep.speeds.append(out.next_state.speed_mps)
        ep.socs.append(out.next_state.soc)
        if r <= 0.0:
            ep.reward_violations += 1
        if out.flags.engine_saturated:
            ep.engine_saturations += 1
        if out.flags.fuel_map_clamped:
            ep.fuel_map_clamps += 1

        state = out.next_state

    return ep
