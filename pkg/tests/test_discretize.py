"""State binning and the EM action grid."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hevql.discretize import Discretization, action_torque, discretize_state
from hevql.units import MPH_TO_MPS

DISC = Discretization()


def test_state_bins_pick_nearest_center():
    s_idx, d_idx = discretize_state(10.0 * MPH_TO_MPS, 450.0, DISC)
    assert s_idx == 1  # 10 mph sits closer to 16 than to 0
    assert d_idx == 4  # demand above the last center clamps to it


def test_state_bin_ties_keep_the_lower_bin():
    s_idx, _ = discretize_state(8.0 * MPH_TO_MPS, 0.0, DISC)
    assert s_idx == 0


@given(st.integers(min_value=0, max_value=4), st.integers(min_value=0, max_value=4))
def test_bin_centers_map_to_themselves(i, j):
    speed = DISC.speed_bins_mph[i] * MPH_TO_MPS
    demand = DISC.torque_bins_nm[j]
    assert discretize_state(speed, demand, DISC) == (i, j)


def test_action_grid_endpoints_and_spacing():
    assert action_torque(0, DISC) == -100.0
    assert action_torque(19, DISC) == 250.0
    step = 350.0 / 19.0
    assert math.isclose(action_torque(9, DISC), -100.0 + 9.0 * step, rel_tol=1e-12)
    torques = DISC.action_torques_nm
    assert len(torques) == 20
    for a, b in zip(torques, torques[1:]):
        assert math.isclose(b - a, step, rel_tol=1e-12)


def test_action_grid_rejects_out_of_range_indices():
    with pytest.raises(IndexError):
        action_torque(-1, DISC)
    with pytest.raises(IndexError):
        action_torque(20, DISC)


def test_default_action_is_a_mild_assist():
    assert DISC.default_action_index == 9
    torque = action_torque(DISC.default_action_index, DISC)
    assert math.isclose(torque, -100.0 + 9.0 * 350.0 / 19.0, rel_tol=1e-12)
    assert 0.0 < torque < 100.0
