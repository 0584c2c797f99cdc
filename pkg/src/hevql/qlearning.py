"""Tabular Q-learning over (speed bin, demand bin) states and EM-torque
actions, with experience filtering: an exploratory episode is replayed into
the table only when its reward sum beats the best greedy reward seen so
far, after which the greedy benchmark is re-evaluated.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .cycle import DriveCycle
from .discretize import Discretization
from .sim import FORCED_ACTION, Controller, Episode, SimEnv, run_episode


@dataclass(frozen=True)
class Hyperparams:
    alpha: float = 0.1
    gamma: float = 0.9
    epsilon: float = 0.1
    iterations: int = 500
    seed: int = 0


class QTable:
    """Dense (n_speed x n_torque x n_actions) action-value table."""

    def __init__(self, disc: Discretization):
        self.disc = disc
        self.values: List[List[List[float]]] = [
            [[0.0] * disc.n_actions for _ in range(disc.n_torque)] for _ in range(disc.n_speed)
        ]

    def get(self, speed_idx: int, torque_idx: int, action_idx: int) -> float:
        return self.values[speed_idx][torque_idx][action_idx]

    def set(self, speed_idx: int, torque_idx: int, action_idx: int, value: float) -> None:
        self.values[speed_idx][torque_idx][action_idx] = value

    def row(self, speed_idx: int, torque_idx: int) -> List[float]:
        return self.values[speed_idx][torque_idx]

    def max_value(self, speed_idx: int, torque_idx: int) -> float:
        return max(self.values[speed_idx][torque_idx])

    def best_action(self, speed_idx: int, torque_idx: int) -> int:
        """Greedy argmax; ties prefer the default action, then lowest index."""
        row = self.values[speed_idx][torque_idx]
        best = max(row)
        default = self.disc.default_action_index
        if row[default] == best:
            return default
        for i, v in enumerate(row):
            if v == best:
                return i
        return default  # unreachable

    def copy(self) -> "QTable":
        dup = QTable(self.disc)
        dup.values = [[list(row) for row in plane] for plane in self.values]
        return dup

    def state_hash(self) -> str:
        flat = [v for plane in self.values for row in plane for v in row]
        return hashlib.sha256(struct.pack(f"{len(flat)}d", *flat)).hexdigest()

    def nonzero_cells(self) -> List[Tuple[int, int, int]]:
        out = []
        for s, plane in enumerate(self.values):
            for d, row in enumerate(plane):
                for a, v in enumerate(row):
                    if v != 0.0:
                        out.append((s, d, a))
        return out


def select_action(
    qtable: QTable,
    speed_idx: int,
    torque_idx: int,
    epsilon: float,
    rng: np.random.Generator,
) -> int:
    """Epsilon-greedy draw; greedy path uses the table tie-break rule."""
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(0, qtable.disc.n_actions))
    return qtable.best_action(speed_idx, torque_idx)


def q_update(
    qtable: QTable,
    state_idx: Tuple[int, int],
    action_idx: int,
    reward_value: float,
    next_state_idx: Optional[Tuple[int, int]],
    hyper: Hyperparams,
) -> float:
    """One temporal-difference backup; terminal transitions bootstrap zero."""
    s, d = state_idx
    old = qtable.get(s, d, action_idx)
    bootstrap = qtable.max_value(*next_state_idx) if next_state_idx is not None else 0.0
    new = old + hyper.alpha * (reward_value + hyper.gamma * bootstrap - old)
    qtable.set(s, d, action_idx, new)
    return new


def greedy_controller(qtable: QTable) -> Controller:
    def controller(speed_mps: float, gear: int, demand_nm: float, soc: float) -> int:
        del gear, soc
        s = qtable.disc.speed_index(speed_mps)
        d = qtable.disc.torque_index(demand_nm)
        return qtable.best_action(s, d)

    return controller


def epsilon_greedy_controller(qtable: QTable, epsilon: float, rng: np.random.Generator) -> Controller:
    def controller(speed_mps: float, gear: int, demand_nm: float, soc: float) -> int:
        del gear, soc
        s = qtable.disc.speed_index(speed_mps)
        d = qtable.disc.torque_index(demand_nm)
        return select_action(qtable, s, d, epsilon, rng)

    return controller


def rollout(
    qtable: QTable,
    cycle: DriveCycle,
    env: SimEnv,
    epsilon: float,
    rng: np.random.Generator,
) -> Episode:
    """One exploratory traversal of the cycle under epsilon-greedy control."""
    return run_episode(epsilon_greedy_controller(qtable, epsilon, rng), cycle, env)


def evaluate_greedy(qtable: QTable, cycle: DriveCycle, env: SimEnv) -> Episode:
    """Deterministic greedy traversal (no exploration, no RNG draws)."""
    return run_episode(greedy_controller(qtable), cycle, env)


def replay_episode(qtable: QTable, episode: Episode, hyper: Hyperparams) -> int:
    """Replay policy-chosen transitions through q_update in time order.

    Forced steps (braking, pure coast) are skipped: the policy did not pick
    those actions.  Returns the number of updates applied.
    """
    n = episode.n_steps
    count = 0
    for j in range(n):
        a = episode.action_indices[j]
        if a == FORCED_ACTION:
            continue
        state = (episode.speed_indices[j], episode.demand_indices[j])
        nxt = (
            (episode.speed_indices[j + 1], episode.demand_indices[j + 1]) if j + 1 < n else None
        )
        q_update(qtable, state, a, episode.rewards[j], nxt, hyper)
        count += 1
    return count


@dataclass(frozen=True)
class LearningRecord:
    iteration: int
    exploratory_reward_sum: float
    greedy_reward_sum: float
    greedy_mpg: float
    updated: bool


IterationCallback = Callable[[int, QTable, LearningRecord], None]


def train(
    cycle: DriveCycle,
    env: SimEnv,
    hyper: Hyperparams,
    qtable: Optional[QTable] = None,
    warm_policy: Optional[Controller] = None,
    on_iteration: Optional[IterationCallback] = None,
) -> Tuple[QTable, List[LearningRecord]]:
    """Experience-filtered Q-learning over repeated cycle traversals.

    Iteration 1 is deterministic: the warm-start controller if one is given,
    otherwise the greedy policy of the initial table (for a cold table this
    is the constant default action).  Exploration begins at iteration 2.
    Each episode is replayed into the table only when its reward sum beats
    the best greedy reward so far, after which the greedy policy is
    re-evaluated and becomes the new benchmark.

    Record bookkeeping: iteration 1's greedy_mpg is the economy of the
    episode actually driven (exploration-free by construction), so the
    first curve row reports the initializer's own fuel economy; later rows
    report the post-update greedy evaluation.  The benchmark reward sum
    always comes from the re-evaluation.
    """
    q = qtable if qtable is not None else QTable(env.disc)
    rng = np.random.default_rng(hyper.seed)
    records: List[LearningRecord] = []
    r_tot = 0.0
    greedy_mpg = float("nan")

    for it in range(1, hyper.iterations + 1):
        if it == 1:
            policy = warm_policy if warm_policy is not None else greedy_controller(q)
            episode = run_episode(policy, cycle, env)
        else:
            episode = rollout(q, cycle, env, hyper.epsilon, rng)
        exp_sum = episode.reward_sum
        updated = exp_sum > r_tot
        if updated:
            replay_episode(q, episode, hyper)
            greedy_ep = evaluate_greedy(q, cycle, env)
            r_tot = greedy_ep.reward_sum
            greedy_mpg = episode.mpg() if it == 1 else greedy_ep.mpg()
        record = LearningRecord(
            iteration=it,
            exploratory_reward_sum=exp_sum,
            greedy_reward_sum=r_tot,
            greedy_mpg=greedy_mpg,
            updated=updated,
        )
        records.append(record)
        if on_iteration is not None:
            on_iteration(it, q, record)

    return q, records


# ---------------------------------------------------------------------------
# Persistence: Q-table text format and learning-curve CSV.
# ---------------------------------------------------------------------------

QTABLE_COLUMNS = "speed_idx,torque_idx,action_idx,q_value"
CURVE_COLUMNS = "iteration,exploratory_reward_sum,greedy_reward_sum,greedy_mpg,updated"


def _fmt(x: float) -> str:
    return repr(float(x))


def save_qtable(qtable: QTable, path: str, header_comment: str = "") -> None:
    """Plain-text dump: grid declarations, then one row per table cell.

    Floats are written with full round-trip precision so save/load/save is
    byte-identical.
    """
    disc = qtable.disc
    with open(path, "w", newline="\n") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write("speed_bins_mph," + ",".join(_fmt(v) for v in disc.speed_bins_mph) + "\n")
        fh.write("torque_demand_bins_nm," + ",".join(_fmt(v) for v in disc.torque_bins_nm) + "\n")
        fh.write("action_torques_nm," + ",".join(_fmt(v) for v in disc.action_torques_nm) + "\n")
        fh.write(QTABLE_COLUMNS + "\n")
        for s in range(disc.n_speed):
            for d in range(disc.n_torque):
                for a in range(disc.n_actions):
                    fh.write(f"{s},{d},{a},{_fmt(qtable.get(s, d, a))}\n")


class QTableFormatError(ValueError):
    pass


def load_qtable(path: str) -> QTable:
    """Load a table written by save_qtable, reconstructing its grids."""
    grids = {}
    rows = []
    with open(path, "r") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if line.startswith(("speed_bins_mph,", "torque_demand_bins_nm,", "action_torques_nm,")):
                key, rest = line.split(",", 1)
                grids[key] = tuple(float(x) for x in rest.split(","))
            elif line == QTABLE_COLUMNS:
                continue
            else:
                parts = line.split(",")
                if len(parts) != 4:
                    raise QTableFormatError(f"{path}: malformed row {line!r}")
                rows.append((int(parts[0]), int(parts[1]), int(parts[2]), float(parts[3])))
    for key in ("speed_bins_mph", "torque_demand_bins_nm", "action_torques_nm"):
        if key not in grids:
            raise QTableFormatError(f"{path}: missing grid header {key}")

    actions = grids["action_torques_nm"]
    disc = Discretization(
        speed_bins_mph=grids["speed_bins_mph"],
        torque_bins_nm=grids["torque_demand_bins_nm"],
        action_min_nm=actions[0],
        action_max_nm=actions[-1],
        n_actions=len(actions),
    )
    if disc.action_torques_nm != actions:
        raise QTableFormatError(f"{path}: action grid is not evenly spaced")
    q = QTable(disc)
    if len(rows) != disc.n_speed * disc.n_torque * disc.n_actions:
        raise QTableFormatError(
            f"{path}: expected {disc.n_speed * disc.n_torque * disc.n_actions} rows, got {len(rows)}"
        )
    for s, d, a, v in rows:
        q.set(s, d, a, v)
    return q


def save_curve(records: Sequence[LearningRecord], path: str, header_comment: str = "") -> None:
    with open(path, "w", newline="\n") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(CURVE_COLUMNS + "\n")
        for r in records:
            fh.write(
                f"{r.iteration},{_fmt(r.exploratory_reward_sum)},{_fmt(r.greedy_reward_sum)},"
                f"{_fmt(r.greedy_mpg)},{'true' if r.updated else 'false'}\n"
            )


def load_curve(path: str) -> List[LearningRecord]:
    records = []
    with open(path, "r") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line == CURVE_COLUMNS:
                continue
            it, exp, greedy, mpg, updated = line.split(",")
            records.append(
                LearningRecord(
                    iteration=int(it),
                    exploratory_reward_sum=float(exp),
                    greedy_reward_sum=float(greedy),
                    greedy_mpg=float(mpg),
                    updated=updated == "true",
                )
            )
    return records
