"""Q-table initializers: cold zeros, rule-based seeding for the launch
region, and a warm start that imitates the instantaneous-optimizing
controller by replaying one of its episodes into a fresh table.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from .cycle import DriveCycle
from .discretize import Discretization
from .qlearning import Hyperparams, QTable, replay_episode
from .sim import Controller, Episode, SimEnv, run_episode
from .supervisory import ecms_action


@dataclass(frozen=True)
class HeuristicRule:
    """Seed high-EM-torque actions where the vehicle launches under load:
    low speed, meaningful demand, large assist."""

    speed_threshold_mph: float = 20.0
    demand_threshold_nm: float = 50.0
    em_torque_threshold_nm: float = 200.0
    seed_value: float = 1.0


def cold_init(disc: Discretization) -> QTable:
    """All-zero table: greedy control degenerates to the default action."""
    return QTable(disc)


def heuristic_init(disc: Discretization, rule: HeuristicRule = HeuristicRule()) -> QTable:
    q = QTable(disc)
    torques = disc.action_torques_nm
    for s, speed_mph in enumerate(disc.speed_bins_mph):
        if not speed_mph < rule.speed_threshold_mph:
            continue
        for d, demand_nm in enumerate(disc.torque_bins_nm):
            if not demand_nm > rule.demand_threshold_nm:
                continue
            for a, torque in enumerate(torques):
                if torque >= rule.em_torque_threshold_nm:
                    q.set(s, d, a, rule.seed_value)
    return q


def ecms_controller(env: SimEnv) -> Controller:
    """Supervisory controller choosing grid actions by instantaneous
    equivalent-fuel cost."""
    torques = env.disc.action_torques_nm

    def controller(speed_mps: float, gear: int, demand_nm: float, soc: float) -> int:
        decision = ecms_action(speed_mps, gear, demand_nm, soc, torques, env.vehicle, env.eq)
        return decision.action_index

    return controller


def ecms_warmstart(
    cycle: DriveCycle, env: SimEnv, hyper: Hyperparams
) -> Tuple[QTable, Episode]:
    """One optimizer-driven episode replayed onto a cold table.

    The resulting table is nonzero exactly on the (state, action) pairs the
    controller actually chose, so greedy control imitates it there and
    falls back to the default action elsewhere.
    """
    q = cold_init(env.disc)
    episode = run_episode(ecms_controller(env), cycle, env)
    replay_episode(q, episode, hyper)
    return q, episode


def optimal_action_map(qtable: QTable) -> List[Tuple[float, float, float]]:
    """Greedy EM torque per state bin: (speed_mph, demand_nm, em_torque_nm).

    Uses the same tie-break as action selection, so unvisited states report
    the default action torque.
    """
    disc = qtable.disc
    rows = []
    for s, speed_mph in enumerate(disc.speed_bins_mph):
        for d, demand_nm in enumerate(disc.torque_bins_nm):
            a = qtable.best_action(s, d)
            rows.append((speed_mph, demand_nm, disc.action_torques_nm[a]))
    return rows


ACTION_MAP_COLUMNS = "speed_mph,torque_demand_nm,best_em_torque_nm"


def save_action_map(qtable: QTable, path: str, header_comment: str = "") -> None:
    rows = optimal_action_map(qtable)
    with open(path, "w", newline="\n") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(ACTION_MAP_COLUMNS + "\n")
        for speed_mph, demand_nm, torque in rows:
            fh.write(f"{repr(float(speed_mph))},{repr(float(demand_nm))},{repr(float(torque))}\n")
