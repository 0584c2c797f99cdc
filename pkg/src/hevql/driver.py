"""Speed-tracking driver: PID from speed error to a pedal in [-1, 1].

Positive pedal scales the traction torque reference; negative pedal scales
the braking torque reference.  The driver is pure: state goes in, the new
state comes out, so rollouts can be replayed deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple


@dataclass(frozen=True)
class DriverParams:
    kp: float = 0.4            # pedal per m/s of speed error
    ki: float = 0.1
    kd: float = 0.0
    integral_clamp: float = 1.0  # |integral contribution| ceiling (anti-windup)
    torque_ref_nm: float = 400.0   # axle-demand torque at full pedal
    brake_ref_nm: float = -400.0   # axle-demand brake torque at full brake


@dataclass(frozen=True)
class DriverState:
    integral_error: float = 0.0
    last_error: float = 0.0


def driver_step(
    ref_speed: float, actual_speed: float, state: DriverState, dt: float, params: DriverParams
) -> Tuple[float, DriverState]:
    """One PID update; returns (pedal, next_state) with pedal in [-1, 1]."""
    error = ref_speed - actual_speed
    integral = state.integral_error + error * dt
    if params.ki > 0.0:
        bound = params.integral_clamp / params.ki
        integral = min(max(integral, -bound), bound)
    derivative = (error - state.last_error) / dt
    pedal = params.kp * error + params.ki * integral + params.kd * derivative
    pedal = min(max(pedal, -1.0), 1.0)
    return pedal, DriverState(integral_error=integral, last_error=error)


@dataclass(frozen=True)
class TorqueDemand:
    traction_nm: float   # >= 0, axle-demand frame
    brake_nm: float      # <= 0, axle-demand frame


def torque_demand(pedal: float, params: DriverParams) -> TorqueDemand:
    """Map pedal to mutually exclusive traction/brake torque demands."""
    if pedal > 0.0:
        return TorqueDemand(traction_nm=pedal * params.torque_ref_nm, brake_nm=0.0)
    if pedal < 0.0:
        return TorqueDemand(traction_nm=0.0, brake_nm=-pedal * params.brake_ref_nm)
    return TorqueDemand(traction_nm=0.0, brake_nm=0.0)
