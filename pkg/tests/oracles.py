"""Hand-rolled reference implementations used to cross-check the package.

These lean on the public physics primitives but keep their own control
flow, so a regression in the shipped selection or learning logic cannot
hide behind shared code.
"""

from typing import List, Tuple

from hevql.powertrain import (
    VehicleParams,
    em_electrical_power,
    em_speed,
    engine_fuel_rate,
    engine_speed,
)
from hevql.supervisory import EquivalenceParams, equivalent_fuel_rate, split_demand


def ecms_scan(speed_mps: float, gear: int, demand_nm: float, soc: float,
              torques, vehicle: VehicleParams, eq: EquivalenceParams) -> int:
    """Exhaustive scan over the action grid, returning the winning index.

    Feasible candidates compete on (equivalent fuel cost, |EM torque|,
    index); if none are feasible the scan falls back to the smallest
    (limit violation, index) pair.
    """
    w_ice = engine_speed(speed_mps, gear, vehicle)
    t_max = vehicle.engine_map.max_torque_at(w_ice)
    w_em = em_speed(speed_mps, vehicle)
    bat = vehicle.battery

    feasible = []
    violating = []
    for idx, torque in enumerate(torques):
        em_cmd, ice_cmd = split_demand(demand_nm, torque, gear, vehicle)
        excess = 0.0
        if not (vehicle.em_min_torque_nm <= em_cmd <= vehicle.em_max_torque_nm):
            excess += abs(em_cmd) - vehicle.em_max_torque_nm
        if ice_cmd > t_max:
            excess += ice_cmd - t_max
        if w_em > 0.0 and abs(em_cmd) * w_em > vehicle.em_max_power_w:
            excess += (abs(em_cmd) * w_em - vehicle.em_max_power_w) * 1e-3
        p_elec, _ = em_electrical_power(w_em, em_cmd, vehicle.motor_map)
        if p_elec > bat.max_discharge_power_w:
            excess += (p_elec - bat.max_discharge_power_w) * 1e-3
        if p_elec < -bat.max_charge_power_w:
            excess += (-bat.max_charge_power_w - p_elec) * 1e-3
        if p_elec > 0.0 and soc <= bat.soc_min:
            excess += 1.0
        if p_elec < 0.0 and soc >= bat.soc_max:
            excess += 1.0
        fuel, _ = engine_fuel_rate(w_ice, min(ice_cmd, t_max), vehicle.engine_map)
        cost = fuel + equivalent_fuel_rate(p_elec, eq)
        if excess == 0.0:
            feasible.append((cost, abs(em_cmd), idx))
        else:
            violating.append((excess, idx))
    if feasible:
        return min(feasible)[2]
    return min(violating)[1]


CHAIN_N = 5


def chain_step(state: int, action: int) -> Tuple[int, float]:
    """Deterministic five-state chain: action 1 advances, action 0 retreats.

    Reward 1 is paid only for pressing on at the terminal state, so the
    optimal value of that state is 1 / (1 - gamma).
    """
    if action == 1:
        nxt = min(state + 1, CHAIN_N - 1)
    else:
        nxt = max(state - 1, 0)
    r = 1.0 if (state == CHAIN_N - 1 and action == 1) else 0.0
    return nxt, r


def chain_value_iteration(gamma: float, sweeps: int = 600) -> List[List[float]]:
    """Q-value iteration on the chain; 600 sweeps converges past double precision."""
    q = [[0.0, 0.0] for _ in range(CHAIN_N)]
    for _ in range(sweeps):
        nxt_q = [[0.0, 0.0] for _ in range(CHAIN_N)]
        for s in range(CHAIN_N):
            for a in (0, 1):
                s2, r = chain_step(s, a)
                nxt_q[s][a] = r + gamma * max(q[s2])
        q = nxt_q
    return q
