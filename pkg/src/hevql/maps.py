"""Gridded lookup tables for the engine fuel map and EM efficiency map.

Tables are dense rectangular grids with bilinear interpolation between
nodes.  Queries outside the grid hull are clamped to the hull boundary and
reported via a flag so callers can count saturations.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence, Tuple

from .units import RPM_TO_RADS


def interp1(grid: Sequence[float], values: Sequence[float], x: float) -> Tuple[float, bool]:
    """Piecewise-linear interpolation with hull clamping.

    Returns (value, clamped) where clamped is True when x fell outside
    [grid[0], grid[-1]] and was clamped to the boundary.
    """
    clamped = False
    if x <= grid[0]:
        clamped = x < grid[0]
        return values[0], clamped
    if x >= grid[-1]:
        clamped = x > grid[-1]
        return values[-1], clamped
    i = bisect_right(grid, x) - 1
    t = (x - grid[i]) / (grid[i + 1] - grid[i])
    return values[i] + t * (values[i + 1] - values[i]), clamped


def interp2(
    x_grid: Sequence[float],
    y_grid: Sequence[float],
    table: Sequence[Sequence[float]],
    x: float,
    y: float,
) -> Tuple[float, bool]:
    """Bilinear interpolation on table[ix][iy] with hull clamping.

    Exact at grid nodes; the midpoint of a cell evaluates to the arithmetic
    mean of the four corner values.
    """
    clamped = False
    if x < x_grid[0]:
        x, clamped = x_grid[0], True
    elif x > x_grid[-1]:
        x, clamped = x_grid[-1], True
    if y < y_grid[0]:
        y, clamped = y_grid[0], True
    elif y > y_grid[-1]:
        y, clamped = y_grid[-1], True

    i = min(max(bisect_right(x_grid, x) - 1, 0), len(x_grid) - 2)
    j = min(max(bisect_right(y_grid, y) - 1, 0), len(y_grid) - 2)
    tx = (x - x_grid[i]) / (x_grid[i + 1] - x_grid[i])
    ty = (y - y_grid[j]) / (y_grid[j + 1] - y_grid[j])
    v00 = table[i][j]
    v10 = table[i + 1][j]
    v01 = table[i][j + 1]
    v11 = table[i + 1][j + 1]
    value = (
        v00 * (1.0 - tx) * (1.0 - ty)
        + v10 * tx * (1.0 - ty)
        + v01 * (1.0 - tx) * ty
        + v11 * tx * ty
    )
    return value, clamped


@dataclass(frozen=True)
class EngineMap:
    """Steady-state fuel-rate map: fuel_rate_table[i][j] in kg/s at
    speed_grid[i] (rad/s) x torque_grid[j] (N m).

    max_torque holds the saturation torque at each speed node.
    """

    speed_grid: Tuple[float, ...]
    torque_grid: Tuple[float, ...]
    fuel_rate_table: Tuple[Tuple[float, ...], ...]
    max_torque: Tuple[float, ...]

    def fuel_rate(self, speed: float, torque: float) -> Tuple[float, bool]:
        """Fuel mass flow in kg/s.  Zero when the engine is not spinning."""
        if speed <= 0.0:
            return 0.0, False
        return interp2(self.speed_grid, self.torque_grid, self.fuel_rate_table, speed, torque)

    def max_torque_at(self, speed: float) -> float:
        value, _ = interp1(self.speed_grid, self.max_torque, speed)
        return value


@dataclass(frozen=True)
class MotorMap:
    """EM efficiency map, symmetric in torque sign.  Values in (0, 1]."""

    speed_grid: Tuple[float, ...]
    torque_grid: Tuple[float, ...]
    efficiency_table: Tuple[Tuple[float, ...], ...]

    def efficiency(self, speed: float, torque: float) -> Tuple[float, bool]:
        return interp2(self.speed_grid, self.torque_grid, self.efficiency_table, speed, torque)


@dataclass(frozen=True)
class EngineMapSpec:
    """Parameters for the synthetic fuel map.

    The map is a Willans line with an affine spin loss, two low-speed
    throttling penalties, and a quadratic high-torque excess ("enrichment")
    above a knee:

        mdot = (w*T * (1 + drag(w)) + band(w, T) + loss(w) + enrich(w, T))
               / (peak_efficiency * fuel_lhv)
        loss(w) = loss_const + loss_slope * w
        drag(w) = low_speed_drag * fade(w)
        band(w, T) = light_load_slope * fade(w) * w * min(T, light_load_torque)
        enrich(w, T) = coeff * w * (T - knee)^2 / (Tmax(w) - knee),  T > knee

    fade(w) is 1 below drag_full_below_rpm, 0 above drag_zero_above_rpm,
    linear between, so both penalties are low-speed effects.  The band term
    steepens the fuel slope below light_load_torque: light engine loads pay
    a poor marginal efficiency, which is what makes shifting them to the
    battery worthwhile.  coeff is solved so that brake efficiency on the
    max-torque line equals sat_efficiency at sat_ref_speed; the loss shares
    shrink with speed, so that efficiency rises with speed below the anchor
    and hovers just above sat_efficiency beyond it.
    """

    idle_speed_rpm: float = 800.0
    max_speed_rpm: float = 6000.0
    peak_torque_nm: float = 115.0
    peak_power_w: float = 64.6e3
    peak_efficiency: float = 0.32
    sat_efficiency: float = 0.28
    sat_ref_speed_rpm: float = 2800.0
    loss_const_w: float = 1200.0
    loss_slope_w_per_rads: float = 8.0
    low_speed_drag: float = 0.0
    light_load_slope: float = 0.6
    light_load_torque_nm: float = 30.0
    drag_full_below_rpm: float = 1600.0
    drag_zero_above_rpm: float = 2600.0
    knee_fraction: float = 0.45
    fuel_lhv_j_per_kg: float = 43.0e6
    n_speed: int = 27
    n_torque: int = 24


def _linspace(lo: float, hi: float, n: int) -> Tuple[float, ...]:
    step = (hi - lo) / (n - 1)
    pts = [lo + k * step for k in range(n)]
    pts[-1] = hi
    return tuple(pts)


def engine_loss_w(spec: EngineMapSpec, speed: float) -> float:
    return spec.loss_const_w + spec.loss_slope_w_per_rads * speed


def engine_speed_fade(spec: EngineMapSpec, speed: float) -> float:
    """Low-speed penalty weight: 1 below the full bound, 0 above the zero
    bound, linear between."""
    lo = spec.drag_full_below_rpm * RPM_TO_RADS
    hi = spec.drag_zero_above_rpm * RPM_TO_RADS
    if speed <= lo:
        return 1.0
    if speed >= hi:
        return 0.0
    return (hi - speed) / (hi - lo)


def engine_drag(spec: EngineMapSpec, speed: float) -> float:
    """Low-speed pumping drag as a fraction of indicated power."""
    return spec.low_speed_drag * engine_speed_fade(spec, speed)


def engine_light_band_w(spec: EngineMapSpec, speed: float, torque: float) -> float:
    """Extra light-load fuel power from throttling losses."""
    capped = min(torque, spec.light_load_torque_nm)
    return spec.light_load_slope * engine_speed_fade(spec, speed) * speed * capped


def engine_sat_torque_nm(spec: EngineMapSpec, speed: float) -> float:
    return min(spec.peak_torque_nm, spec.peak_power_w / speed)


def solve_enrichment_coeff(spec: EngineMapSpec) -> float:
    """Enrichment coefficient pinned by the saturation-efficiency target."""
    w = spec.sat_ref_speed_rpm * RPM_TO_RADS
    t_max = engine_sat_torque_nm(spec, w)
    knee = spec.knee_fraction * t_max
    # Total loss budget so that eta = sat_efficiency at (w, t_max).
    budget = w * t_max * (spec.peak_efficiency / spec.sat_efficiency - 1.0)
    excess = (
        budget
        - engine_loss_w(spec, w)
        - engine_drag(spec, w) * w * t_max
        - engine_light_band_w(spec, w, t_max)
    )
    if excess <= 0.0:
        raise ValueError(
            "spin loss and low-speed penalties exceed the saturation-"
            "efficiency budget; reduce loss_const_w/loss_slope_w_per_rads/"
            "low_speed_drag/light_load_slope"
        )
    return excess / (w * (t_max - knee))


def engine_fuel_rate_formula(spec: EngineMapSpec, coeff: float, speed: float, torque: float) -> float:
    t_max = engine_sat_torque_nm(spec, speed)
    knee = spec.knee_fraction * t_max
    power = (
        speed * torque * (1.0 + engine_drag(spec, speed))
        + engine_light_band_w(spec, speed, torque)
        + engine_loss_w(spec, speed)
    )
    if torque > knee:
        power += coeff * speed * (torque - knee) ** 2 / (t_max - knee)
    return power / (spec.peak_efficiency * spec.fuel_lhv_j_per_kg)


def build_engine_map(spec: EngineMapSpec = EngineMapSpec()) -> EngineMap:
    coeff = solve_enrichment_coeff(spec)
    speeds = _linspace(spec.idle_speed_rpm * RPM_TO_RADS, spec.max_speed_rpm * RPM_TO_RADS, spec.n_speed)
    torques = _linspace(0.0, spec.peak_torque_nm, spec.n_torque)
    table = tuple(
        tuple(engine_fuel_rate_formula(spec, coeff, w, t) for t in torques) for w in speeds
    )
    sat = tuple(engine_sat_torque_nm(spec, w) for w in speeds)
    return EngineMap(speed_grid=speeds, torque_grid=torques, fuel_rate_table=table, max_torque=sat)


@dataclass(frozen=True)
class MotorMapSpec:
    """Parameters for the synthetic EM efficiency map.

    Efficiency peaks at mid speed / mid |torque| and falls off quadratically
    toward the grid extremes (including the zero-speed/zero-torque corner,
    where no power flows anyway).

    max_speed_rads should cover the motor's reachable envelope under its
    axle gearing; a grid stretched far past it parks every operating point
    on the low-efficiency edge and wastes interpolation resolution.
    """

    max_speed_rads: float = 50.0
    max_torque_nm: float = 400.0
    peak_efficiency: float = 0.92
    min_efficiency: float = 0.80
    n_speed: int = 22
    n_torque: int = 33


def motor_efficiency_formula(spec: MotorMapSpec, speed: float, torque: float) -> float:
    su = speed / spec.max_speed_rads
    tu = abs(torque) / spec.max_torque_nm
    # Squared distance from the map center, normalized so corners give 1.
    d2 = ((su - 0.5) ** 2 + (tu - 0.5) ** 2) / 0.5
    return spec.min_efficiency + (spec.peak_efficiency - spec.min_efficiency) * (1.0 - d2)


def build_motor_map(spec: MotorMapSpec = MotorMapSpec()) -> MotorMap:
    speeds = _linspace(0.0, spec.max_speed_rads, spec.n_speed)
    torques = _linspace(-spec.max_torque_nm, spec.max_torque_nm, spec.n_torque)
    table = tuple(
        tuple(motor_efficiency_formula(spec, w, t) for t in torques) for w in speeds
    )
    return MotorMap(speed_grid=speeds, torque_grid=torques, efficiency_table=table)
