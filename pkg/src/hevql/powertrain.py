"""Parallel hybrid plant model.

Architecture: engine drives the front axle through a stepped transmission
and final drive; the EM drives the rear axle through a fixed reduction.
Longitudinal dynamics integrate with forward Euler at the caller's dt.

Sign conventions: torques in N m (EM negative = regeneration), battery
power in W (positive = discharge), grade angle in rad.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .maps import EngineMap, MotorMap, build_engine_map, build_motor_map
from .units import GRAVITY


@dataclass(frozen=True)
class BatteryParams:
    cell_capacity_ah: float = 6.5
    series_cells: int = 250
    parallel_strings: int = 1
    cell_ocv_v: float = 3.2          # constant open-circuit voltage per cell
    cell_resistance_ohm: float = 0.0015
    soc_min: float = 0.4
    soc_max: float = 0.8
    max_discharge_power_w: float = 60.0e3
    max_charge_power_w: float = 60.0e3   # magnitude of the charging limit

    @property
    def pack_ocv_v(self) -> float:
        return self.cell_ocv_v * self.series_cells

    @property
    def pack_resistance_ohm(self) -> float:
        return self.cell_resistance_ohm * self.series_cells / self.parallel_strings

    @property
    def pack_capacity_ah(self) -> float:
        return self.cell_capacity_ah * self.parallel_strings


@dataclass(frozen=True)
class VehicleParams:
    mass_kg: float = 1636.0
    drag_coeff: float = 0.30
    frontal_area_m2: float = 2.2
    air_density_kg_m3: float = 1.2
    rolling_coeff: float = 0.01
    wheel_radius_m: float = 0.30
    gear_ratios: Tuple[float, ...] = (2.847, 1.552, 1.000, 0.700)
    final_drive_ratio: float = 4.13
    trans_efficiency: float = 0.97
    em_ratio: float = 0.4            # rear-axle reduction between EM and wheel
    em_mech_efficiency: float = 0.97
    em_max_torque_nm: float = 400.0
    em_min_torque_nm: float = -400.0
    em_max_power_w: float = 143.0e3
    engine_max_speed_rads: float = 628.3185307179587  # 6000 rpm
    engine_idle_speed_rads: float = 800.0 * math.pi / 30.0
    # Gear schedule: upshift above these speeds (m/s), 1 m/s hysteresis down.
    gear_upshift_mps: Tuple[float, ...] = (5.0, 10.0, 15.0)
    gear_hysteresis_mps: float = 1.0
    fuel_lhv_j_per_kg: float = 43.0e6
    battery: BatteryParams = field(default_factory=BatteryParams)
    engine_map: EngineMap = field(default_factory=build_engine_map)
    motor_map: MotorMap = field(default_factory=build_motor_map)

    def gear_ratio(self, gear: int) -> float:
        return self.gear_ratios[gear - 1]


@dataclass(frozen=True)
class PlantState:
    speed_mps: float
    soc: float
    gear: int
    time_s: float = 0.0


@dataclass(frozen=True)
class StepFlags:
    engine_saturated: bool = False
    em_torque_clamped: bool = False
    em_power_clamped: bool = False
    battery_power_clamped: bool = False
    soc_blocked: bool = False
    soc_overshoot: bool = False
    fuel_map_clamped: bool = False
    friction_brake_used: bool = False


@dataclass(frozen=True)
class StepOutcome:
    next_state: PlantState
    fuel_rate_kgps: float
    battery_power_w: float
    engine_torque_nm: float      # realized, at the engine shaft
    em_torque_nm: float          # realized, at the EM shaft
    friction_force_n: float      # <= 0, decelerating
    road_forces: Tuple[float, float, float, float]  # (F_air, F_roll, F_grade, F_trac)
    battery_current_a: float
    flags: StepFlags = field(default_factory=StepFlags)


def road_loads(speed: float, grade_rad: float, params: VehicleParams) -> Tuple[float, float, float]:
    """Aerodynamic drag, rolling resistance and grade force in N.

    Rolling resistance is reported for a moving vehicle; the caller zeroes
    it at standstill.
    """
    f_air = 0.5 * params.air_density_kg_m3 * params.drag_coeff * params.frontal_area_m2 * speed * speed
    f_roll = math.cos(grade_rad) * params.rolling_coeff * params.mass_kg * GRAVITY
    f_grade = math.sin(grade_rad) * params.mass_kg * GRAVITY
    return f_air, f_roll, f_grade


def select_gear(speed: float, params: VehicleParams, prev_gear: Optional[int] = None) -> int:
    """Speed-scheduled gear with hysteresis so cruise never oscillates."""
    up = params.gear_upshift_mps
    n = len(up) + 1
    base = 1
    while base < n and speed > up[base - 1]:
        base += 1
    if prev_gear is None:
        return base
    if base > prev_gear:
        return base
    if base < prev_gear:
        # Downshift only once speed drops a full hysteresis band below the
        # upshift threshold of the gear we would leave.
        gear = prev_gear
        while gear > 1 and speed <= up[gear - 2] - params.gear_hysteresis_mps:
            gear -= 1
        return gear
    return prev_gear


def engine_speed(speed: float, gear: int, params: VehicleParams) -> float:
    """Engine shaft speed in rad/s for a given vehicle speed and gear.

    The launch clutch slips below idle, so an engaged engine never turns
    slower than engine_idle_speed_rads.
    """
    geared = (speed / params.wheel_radius_m) * params.final_drive_ratio * params.gear_ratio(gear)
    return max(geared, params.engine_idle_speed_rads)


def em_speed(speed: float, params: VehicleParams) -> float:
    return (speed / params.wheel_radius_m) * params.em_ratio


def engine_fuel_rate(speed_rads: float, torque_nm: float, engine_map: EngineMap) -> Tuple[float, bool]:
    """Fuel flow in kg/s; zero when the engine is not spinning."""
    return engine_map.fuel_rate(speed_rads, torque_nm)


def em_electrical_power(speed_rads: float, torque_nm: float, motor_map: MotorMap) -> Tuple[float, bool]:
    """Battery-side EM power: mechanical power divided by efficiency when
    motoring, multiplied when generating.  Zero at zero mechanical power."""
    p_mech = speed_rads * torque_nm
    if p_mech == 0.0:
        return 0.0, False
    eta, clamped = motor_map.efficiency(speed_rads, torque_nm)
    if p_mech > 0.0:
        return p_mech / eta, clamped
    return p_mech * eta, clamped


def battery_step(power_w: float, soc: float, dt: float, params: BatteryParams) -> Tuple[float, float, float, StepFlags]:
    """Equivalent-circuit battery update.

    Solves P = I * (U_oc - I * R) for the physical (smaller-magnitude)
    current root, integrates SOC, and clamps to the SOC window.  Returns
    (next_soc, current_a, realized_power_w, flags).
    """
    u = params.pack_ocv_v
    r = params.pack_resistance_ohm
    flags_power = False
    p_limit = u * u / (4.0 * r)  # maximum deliverable discharge power
    if power_w > p_limit:
        power_w = p_limit
        flags_power = True
    disc = u * u - 4.0 * r * power_w
    current = (u - math.sqrt(disc)) / (2.0 * r)
    next_soc = soc - current * dt / (params.pack_capacity_ah * 3600.0)
    overshoot = False
    if next_soc < params.soc_min:
        next_soc = params.soc_min
        overshoot = True
    elif next_soc > params.soc_max:
        next_soc = params.soc_max
        overshoot = True
    flags = StepFlags(battery_power_clamped=flags_power, soc_overshoot=overshoot)
    return next_soc, current, power_w, flags


def _clamp_em_torque(
    torque: float, w_em: float, soc: float, params: VehicleParams
) -> Tuple[float, StepFlags]:
    """Apply actuator, power and SOC limits in that order."""
    bat = params.battery
    clamped_t = False
    t = torque
    if t > params.em_max_torque_nm:
        t, clamped_t = params.em_max_torque_nm, True
    elif t < params.em_min_torque_nm:
        t, clamped_t = params.em_min_torque_nm, True

    power_clamped = False
    if w_em > 0.0 and abs(t * w_em) > params.em_max_power_w:
        t = math.copysign(params.em_max_power_w / w_em, t)
        power_clamped = True

    # Battery power limits, solved on the efficiency map by bisection since
    # electrical power is monotone in torque at fixed speed.
    batt_clamped = False
    p_elec, _ = em_electrical_power(w_em, t, params.motor_map)
    if p_elec > bat.max_discharge_power_w:
        t = _bisect_torque(w_em, t, bat.max_discharge_power_w, params)
        batt_clamped = True
    elif p_elec < -bat.max_charge_power_w:
        t = _bisect_torque(w_em, t, -bat.max_charge_power_w, params)
        batt_clamped = True

    soc_blocked = False
    p_elec, _ = em_electrical_power(w_em, t, params.motor_map)
    if p_elec > 0.0 and soc <= bat.soc_min:
        t, soc_blocked = 0.0, True
    elif p_elec < 0.0 and soc >= bat.soc_max:
        t, soc_blocked = 0.0, True

    return t, StepFlags(
        em_torque_clamped=clamped_t,
        em_power_clamped=power_clamped,
        battery_power_clamped=batt_clamped,
        soc_blocked=soc_blocked,
    )


def _bisect_torque(w_em: float, torque: float, target_power: float, params: VehicleParams) -> float:
    lo, hi = (0.0, torque) if torque > 0.0 else (torque, 0.0)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        p, _ = em_electrical_power(w_em, mid, params.motor_map)
        if torque > 0.0:
            if p > target_power:
                hi = mid
            else:
                lo = mid
        else:
            if p < target_power:
                lo = mid
            else:
                hi = mid
    return lo if torque > 0.0 else hi


def plant_step(
    state: PlantState,
    engine_torque_cmd: float,
    em_torque_cmd: float,
    grade_rad: float,
    dt: float,
    params: VehicleParams,
) -> StepOutcome:
    """Advance the plant one step under shaft torque commands.

    Commands are clamped (actuators, then battery power, then SOC window);
    traction shortfall from clamping is not reassigned to the other path.
    Regenerative braking requested beyond the EM's clamped capability is
    absorbed by ideal friction brakes.
    """
    v = state.speed_mps
    gear = state.gear
    # Fuel flows only when torque is commanded: zero-command steps model
    # deceleration fuel cut and engine-off EV running.
    engine_on = engine_torque_cmd > 0.0

    # Engine path.
    fuel_clamped = False
    if engine_on:
        w_ice = engine_speed(v, gear, params)
        t_max = params.engine_map.max_torque_at(w_ice)
        t_ice = min(max(engine_torque_cmd, 0.0), t_max)
        engine_sat = engine_torque_cmd > t_max
        fuel, fuel_clamped = engine_fuel_rate(w_ice, t_ice, params.engine_map)
    else:
        t_ice = 0.0
        engine_sat = False
        fuel = 0.0

    # EM path.
    w_em = em_speed(v, params)
    t_em, em_flags = _clamp_em_torque(em_torque_cmd, w_em, state.soc, params)
    p_elec, _ = em_electrical_power(w_em, t_em, params.motor_map)

    # Unrealized regenerative torque is made up by friction brakes at the
    # same wheel leverage (no energy recovery).
    friction_force = 0.0
    if em_torque_cmd < t_em:
        friction_force = (
            (em_torque_cmd - t_em) * params.em_ratio * params.em_mech_efficiency / params.wheel_radius_m
        )

    next_soc, current, p_realized, bat_flags = battery_step(p_elec, state.soc, dt, params.battery)

    f_ice = t_ice * params.gear_ratio(gear) * params.final_drive_ratio * params.trans_efficiency / params.wheel_radius_m
    f_em = t_em * params.em_ratio * params.em_mech_efficiency / params.wheel_radius_m
    f_trac = f_ice + f_em
    f_air, f_roll, f_grade = road_loads(v, grade_rad, params)
    if v <= 0.0:
        f_air = 0.0
        # Rolling resistance holds the vehicle until traction exceeds it.
        f_roll = min(f_roll, max(f_trac + friction_force - f_grade, 0.0))

    accel = (f_trac + friction_force - f_air - f_roll - f_grade) / params.mass_kg
    next_v = v + accel * dt
    if next_v < 0.0:
        next_v = 0.0

    next_gear = select_gear(next_v, params, prev_gear=gear)
    next_state = PlantState(speed_mps=next_v, soc=next_soc, gear=next_gear, time_s=state.time_s + dt)
    flags = StepFlags(
        engine_saturated=engine_sat,
        em_torque_clamped=em_flags.em_torque_clamped,
        em_power_clamped=em_flags.em_power_clamped,
        battery_power_clamped=em_flags.battery_power_clamped or bat_flags.battery_power_clamped,
        soc_blocked=em_flags.soc_blocked,
        soc_overshoot=bat_flags.soc_overshoot,
        fuel_map_clamped=fuel_clamped,
        friction_brake_used=friction_force < 0.0,
    )
    return StepOutcome(
        next_state=next_state,
        fuel_rate_kgps=fuel,
        battery_power_w=p_realized,
        engine_torque_nm=t_ice,
        em_torque_nm=t_em,
        friction_force_n=friction_force,
        road_forces=(f_air, f_roll, f_grade, f_trac),
        battery_current_a=current,
        flags=flags,
    )
