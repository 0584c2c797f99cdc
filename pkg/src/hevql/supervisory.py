"""Supervisory torque split: equivalent-fuel cost, reward, and the
instantaneous-optimizing (equivalent consumption minimization) controller.

Torque demand lives in an axle-referred frame: a demand of D N m targets a
wheel torque of D * final_drive_ratio * trans_efficiency regardless of the
selected gear, which keeps driver gains and state discretization
gear-independent.  EM torques are physical shaft torques; their axle-demand
contribution is kappa * T_EM with kappa defined below, and the engine shaft
command for a split is (D - kappa * T_EM) / gear_ratio.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .powertrain import (
    VehicleParams,
    em_electrical_power,
    em_speed,
    engine_fuel_rate,
    engine_speed,
)


@dataclass(frozen=True)
class EquivalenceParams:
    s_discharge: float = 3.0
    s_charge: float = 3.0
    eta_discharge: float = 0.95
    eta_charge: float = 0.95
    fuel_lhv_j_per_kg: float = 43.0e6


def equivalent_fuel_rate(battery_power_w: float, params: EquivalenceParams) -> float:
    """Virtual fuel flow of battery use in kg/s (negative while charging)."""
    if battery_power_w > 0.0:
        return params.s_discharge * battery_power_w / (params.eta_discharge * params.fuel_lhv_j_per_kg)
    if battery_power_w < 0.0:
        return params.s_charge * params.eta_charge * battery_power_w / params.fuel_lhv_j_per_kg
    return 0.0


def reward(fuel_rate_kgps: float, battery_power_w: float, dt: float, params: EquivalenceParams) -> float:
    """Per-step reward: one minus total equivalent fuel mass for the step.

    Positive by construction for any reachable operating point; charging
    credit can push it above one.
    """
    return 1.0 - (fuel_rate_kgps + equivalent_fuel_rate(battery_power_w, params)) * dt


def em_demand_factor(params: VehicleParams) -> float:
    """Axle-demand torque contributed per N m of physical EM torque."""
    return (params.em_ratio * params.em_mech_efficiency) / (
        params.final_drive_ratio * params.trans_efficiency
    )


def split_demand(
    demand_nm: float, em_torque_nm: float, gear: int, params: VehicleParams
) -> Tuple[float, float]:
    """Resolve a traction demand and an EM torque choice into shaft commands.

    Returns (em_cmd_nm, engine_cmd_nm).  Positive EM torque is capped so the
    EM share never exceeds the total demand (the engine share stays >= 0);
    negative EM torque (charging) raises the engine share instead.
    """
    kappa = em_demand_factor(params)
    em = em_torque_nm
    if em > 0.0:
        em = min(em, demand_nm / kappa)
    ice_share = demand_nm - kappa * em
    if ice_share < 0.0:
        ice_share = 0.0
    return em, ice_share / params.gear_ratio(gear)


@dataclass(frozen=True)
class ControlDecision:
    action_index: int
    em_torque_nm: float        # physical EM command after the demand cap
    engine_torque_nm: float    # engine shaft command
    cost_kgps: float
    feasible: bool             # False when every candidate violated a limit


def ecms_action(
    speed_mps: float,
    gear: int,
    total_demand_nm: float,
    soc: float,
    action_torques: Sequence[float],
    vehicle: VehicleParams,
    eq: EquivalenceParams,
) -> ControlDecision:
    """Pick the action-grid EM torque minimizing instantaneous equivalent fuel.

    Candidates that violate engine capability, EM torque/power limits,
    battery power limits, or the SOC window are excluded.  Cost ties break
    toward the smallest |EM torque|, then the lowest index.  If every
    candidate is infeasible, the least-violating one is returned flagged.
    """
    w_ice = engine_speed(speed_mps, gear, vehicle)
    t_max = vehicle.engine_map.max_torque_at(w_ice)
    w_em = em_speed(speed_mps, vehicle)
    bat = vehicle.battery

    best: Optional[Tuple[float, float, int]] = None
    best_decision: Optional[ControlDecision] = None
    fallback: Optional[Tuple[float, int]] = None
    fallback_decision: Optional[ControlDecision] = None

    for idx, torque in enumerate(action_torques):
        em_cmd, ice_cmd = split_demand(total_demand_nm, torque, gear, vehicle)

        violation = 0.0
        if em_cmd > vehicle.em_max_torque_nm or em_cmd < vehicle.em_min_torque_nm:
            violation += abs(em_cmd) - vehicle.em_max_torque_nm
        if ice_cmd > t_max:
            violation += ice_cmd - t_max
        ice_eval = min(ice_cmd, t_max)
        if w_em > 0.0 and abs(em_cmd * w_em) > vehicle.em_max_power_w:
            violation += (abs(em_cmd * w_em) - vehicle.em_max_power_w) * 1e-3

        p_elec, _ = em_electrical_power(w_em, em_cmd, vehicle.motor_map)
        if p_elec > bat.max_discharge_power_w:
            violation += (p_elec - bat.max_discharge_power_w) * 1e-3
        elif p_elec < -bat.max_charge_power_w:
            violation += (-bat.max_charge_power_w - p_elec) * 1e-3
        if p_elec > 0.0 and soc <= bat.soc_min:
            violation += 1.0
        elif p_elec < 0.0 and soc >= bat.soc_max:
            violation += 1.0

        # Steady-state pricing: candidates are costed off the continuous fuel
        # map, so a zero-torque split is still charged the engine's spinning
        # loss.  The plant's fuel cut is deliberately absent from this cost
        # model; exploiting it is left to the learned controller.
        fuel, _ = engine_fuel_rate(w_ice, ice_eval, vehicle.engine_map)
        cost = fuel + equivalent_fuel_rate(p_elec, eq)
        decision = ControlDecision(
            action_index=idx,
            em_torque_nm=em_cmd,
            engine_torque_nm=ice_eval,
            cost_kgps=cost,
            feasible=violation == 0.0,
        )

        if violation == 0.0:
            key = (cost, abs(em_cmd), idx)
            if best is None or key < best:
                best = key
                best_decision = decision
        else:
            fkey = (violation, idx)
            if fallback is None or fkey < fallback:
                fallback = fkey
                fallback_decision = decision

    if best_decision is not None:
        return best_decision
    assert fallback_decision is not None
    return fallback_decision
