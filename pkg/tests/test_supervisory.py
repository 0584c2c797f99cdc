"""Equivalent-fuel pricing, reward shaping, and the instantaneous optimizer."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hevql.supervisory import (
    EquivalenceParams,
    ecms_action,
    em_demand_factor,
    equivalent_fuel_rate,
    reward,
    split_demand,
)

from oracles import ecms_scan

EQ = EquivalenceParams()


def test_equivalent_fuel_rate_oracles():
    assert equivalent_fuel_rate(0.0, EQ) == 0.0
    discharge = equivalent_fuel_rate(10e3, EQ)
    assert math.isclose(discharge, 3.0 * 10e3 / (0.95 * 43.0e6), rel_tol=1e-12)
    charge = equivalent_fuel_rate(-10e3, EQ)
    assert math.isclose(charge, -3.0 * 0.95 * 10e3 / 43.0e6, rel_tol=1e-12)


def test_round_trip_pricing_is_asymmetric():
    """A watt drawn costs more than a watt banked refunds, by the square of
    the electrical efficiency."""
    discharge_slope = equivalent_fuel_rate(1e3, EQ) / 1e3
    charge_slope = equivalent_fuel_rate(-1e3, EQ) / -1e3
    assert math.isclose(discharge_slope / charge_slope, 1.0 / 0.95**2, rel_tol=1e-12)


def test_reward_oracles():
    assert math.isclose(reward(0.001, 0.0, 1.0, EQ), 0.999, rel_tol=1e-12)
    charging = reward(0.0005, -10e3, 1.0, EQ)
    assert math.isclose(charging, 1.0 - 0.0005 + 3.0 * 0.95 * 10e3 / 43.0e6, rel_tol=1e-12)


@given(
    st.floats(min_value=0.0, max_value=0.01, allow_nan=False),
    st.floats(min_value=0.0, max_value=0.01, allow_nan=False),
    st.floats(min_value=-60e3, max_value=60e3, allow_nan=False),
)
def test_reward_falls_linearly_with_fuel(f1, f2, power):
    r1 = reward(f1, power, 1.0, EQ)
    r2 = reward(f2, power, 1.0, EQ)
    assert math.isclose(r1 - r2, f2 - f1, rel_tol=1e-9, abs_tol=1e-12)


def test_em_demand_factor_value(cfg):
    assert math.isclose(em_demand_factor(cfg.vehicle), 0.4 / 4.13, rel_tol=1e-12)


def test_split_demand_oracles(cfg):
    veh = cfg.vehicle
    kappa = em_demand_factor(veh)

    em, ice = split_demand(100.0, 50.0, 2, veh)
    assert em == 50.0
    assert math.isclose(ice, (100.0 - kappa * 50.0) / 1.552, rel_tol=1e-12)

    # oversized EM request collapses to a pure electric split
    em, ice = split_demand(50.0, 1000.0, 1, veh)
    assert math.isclose(em, 50.0 / kappa, rel_tol=1e-12)
    assert ice == 0.0

    # charging torque raises the engine share
    em, ice = split_demand(100.0, -100.0, 3, veh)
    assert em == -100.0
    assert math.isclose(ice, (100.0 + kappa * 100.0) / 1.000, rel_tol=1e-12)


@given(
    st.floats(min_value=0.0, max_value=400.0, allow_nan=False),
    st.floats(min_value=-400.0, max_value=600.0, allow_nan=False),
    st.integers(min_value=1, max_value=4),
)
def test_split_demand_reconstructs_the_demand(cfg, demand, em_torque, gear):
    veh = cfg.vehicle
    kappa = em_demand_factor(veh)
    em, ice = split_demand(demand, em_torque, gear, veh)
    assert ice >= 0.0
    assert math.isclose(kappa * em + ice * veh.gear_ratio(gear), demand, rel_tol=1e-9, abs_tol=1e-9)


def test_optimizer_idles_for_free_demand(cfg):
    """With nothing asked of the axle the cheapest legal split commands no
    torque anywhere; its cost is exactly the engine's spinning loss."""
    torques = cfg.discretization.action_torques_nm
    decision = ecms_action(0.0, 1, 0.0, 0.6, torques, cfg.vehicle, cfg.equivalence)
    assert decision.feasible
    assert decision.em_torque_nm == 0.0
    assert decision.engine_torque_nm == 0.0
    idle = 800.0 * math.pi / 30.0
    spin_loss = (1200.0 + 8.0 * idle) / (0.32 * 43.0e6)
    assert math.isclose(decision.cost_kgps, spin_loss, rel_tol=1e-9)
    # lowest index whose grid torque is capped to a zero EM command
    assert decision.action_index == 6


def test_optimizer_leans_on_em_when_engine_cannot_cope(cfg):
    """Low speed and a tall demand exceed engine capability in 2nd gear, so
    the least-violating split maxes out electric assist."""
    torques = cfg.discretization.action_torques_nm
    decision = ecms_action(15.0 * 0.44704, 2, 300.0, 0.6, torques, cfg.vehicle, cfg.equivalence)
    assert not decision.feasible
    assert decision.em_torque_nm >= 150.0
    assert decision.action_index == len(torques) - 1


@settings(max_examples=80, deadline=None)
@given(
    st.floats(min_value=0.0, max_value=35.0, allow_nan=False),
    st.integers(min_value=1, max_value=4),
    st.floats(min_value=0.0, max_value=400.0, allow_nan=False),
    st.floats(min_value=0.4, max_value=0.8, allow_nan=False),
)
def test_optimizer_matches_exhaustive_scan(cfg, speed, gear, demand, soc):
    torques = cfg.discretization.action_torques_nm
    got = ecms_action(speed, gear, demand, soc, torques, cfg.vehicle, cfg.equivalence)
    assert got.action_index == ecms_scan(speed, gear, demand, soc, torques, cfg.vehicle, cfg.equivalence)
