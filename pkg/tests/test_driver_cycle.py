"""Cycle file loading and the speed-tracking driver."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hevql.cycle import CycleFormatError, load_cycle
from hevql.driver import DriverParams, DriverState, driver_step, torque_demand
from hevql.units import MPH_TO_MPS


def write(tmp_path, text: str) -> str:
    p = tmp_path / "cycle.csv"
    p.write_text(text)
    return str(p)


def test_loader_rejects_empty_file(tmp_path):
    with pytest.raises(CycleFormatError):
        load_cycle(write(tmp_path, ""))


def test_loader_rejects_unknown_header(tmp_path):
    with pytest.raises(CycleFormatError):
        load_cycle(write(tmp_path, "t,v\n0,0\n1,0\n"))


def test_loader_rejects_unparseable_row(tmp_path):
    with pytest.raises(CycleFormatError, match="row"):
        load_cycle(write(tmp_path, "time_s,speed_mph\n0,0\n1,fast\n"))


def test_loader_rejects_negative_speed(tmp_path):
    with pytest.raises(CycleFormatError):
        load_cycle(write(tmp_path, "time_s,speed_mph\n0,0\n1,-3\n"))


def test_loader_rejects_single_sample(tmp_path):
    with pytest.raises(CycleFormatError):
        load_cycle(write(tmp_path, "time_s,speed_mph\n0,0\n"))


def test_loader_rejects_non_uniform_timestep(tmp_path):
    with pytest.raises(CycleFormatError, match="row"):
        load_cycle(write(tmp_path, "time_s,speed_mph\n0,0\n1,5\n3,5\n"))


def test_loader_accepts_minimal_cycle(tmp_path):
    cyc = load_cycle(write(tmp_path, "time_s,speed_mph\n0,0\n1,0\n"), name="tiny")
    assert cyc.n_samples == 2
    assert cyc.dt_s == 1.0
    assert cyc.duration_s == 1.0
    assert cyc.speeds_mps == (0.0, 0.0)


def test_loader_converts_mph_and_keeps_mps(tmp_path):
    mph = load_cycle(write(tmp_path, "time_s,speed_mph\n0,10\n1,10\n"))
    assert math.isclose(mph.speeds_mps[0], 10.0 * MPH_TO_MPS, rel_tol=1e-12)
    metric = load_cycle(write(tmp_path, "time_s,speed_mps\n0,10\n1,10\n"))
    assert metric.speeds_mps[0] == 10.0


def test_loader_skips_comment_lines(tmp_path):
    text = "# generated trace\ntime_s,speed_mph\n0,0\n# midpoint note\n1,5\n2,5\n"
    cyc = load_cycle(write(tmp_path, text))
    assert cyc.n_samples == 3


def test_city_cycle_statistics(udds):
    assert udds.n_samples == 1370
    assert udds.dt_s == 1.0
    assert math.isclose(udds.max_speed_mps, 56.7 * MPH_TO_MPS, rel_tol=1e-12)


def test_driver_rests_when_on_target():
    pedal, state = driver_step(12.0, 12.0, DriverState(), 1.0, DriverParams())
    assert pedal == 0.0
    assert state.integral_error == 0.0


def test_driver_pedal_saturates():
    params = DriverParams(kp=0.5, ki=0.0, kd=0.0)
    assert driver_step(20.0, 10.0, DriverState(), 1.0, params)[0] == 1.0
    assert driver_step(0.0, 10.0, DriverState(), 1.0, params)[0] == -1.0


@given(st.lists(st.tuples(
    st.floats(min_value=0.0, max_value=30.0, allow_nan=False),
    st.floats(min_value=0.0, max_value=30.0, allow_nan=False),
), min_size=1, max_size=50))
def test_driver_integral_windup_is_clamped(trace):
    params = DriverParams()
    state = DriverState()
    bound = params.integral_clamp / params.ki
    for ref, actual in trace:
        pedal, state = driver_step(ref, actual, state, 1.0, params)
        assert -1.0 <= pedal <= 1.0
        assert abs(state.integral_error) <= bound + 1e-12


def test_torque_demand_oracles():
    params = DriverParams()
    idle = torque_demand(0.0, params)
    assert idle.traction_nm == 0.0 and idle.brake_nm == 0.0
    full = torque_demand(1.0, params)
    assert full.traction_nm == 400.0
    assert full.brake_nm == 0.0
    braking = torque_demand(-0.5, DriverParams(brake_ref_nm=-100.0))
    assert braking.traction_nm == 0.0
    assert math.isclose(braking.brake_nm, -50.0, rel_tol=1e-12)


@given(st.floats(min_value=-1.0, max_value=1.0, allow_nan=False))
def test_torque_demand_is_mutually_exclusive(pedal):
    demand = torque_demand(pedal, DriverParams())
    assert demand.traction_nm >= 0.0
    assert demand.brake_nm <= 0.0
    assert demand.traction_nm == 0.0 or demand.brake_nm == 0.0
