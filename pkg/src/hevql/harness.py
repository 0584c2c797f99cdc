"""Experiment orchestration: training runs across seeds and initializers,
greedy and ECMS evaluations, initializer comparisons, and all artifact I/O.

Every output file starts with comment lines embedding the fully resolved
configuration and the cycle it was produced from, so any artifact can be
regenerated from itself plus the cycle files.  No timestamps, hostnames, or
other machine entropy appear anywhere: same config + seed is byte-identical.
"""

from __future__ import annotations

import math
import os
import statistics
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .config import ExperimentConfig, config_header
from .cycle import DriveCycle, load_cycle
from .discretize import Discretization
from .qlearning import (
    LearningRecord,
    QTable,
    evaluate_greedy,
    load_curve,
    load_qtable,
    save_curve,
    save_qtable,
    train,
)
from .sim import Controller, Episode, SimEnv, run_episode
from .units import MILE_M, MPH_TO_MPS
from .warmstart import (
    cold_init,
    ecms_controller,
    ecms_warmstart,
    heuristic_init,
    save_action_map,
)


class ValidationError(ValueError):
    """Artifact/config cross-checks failed (e.g. Q-table grid mismatch)."""


# ---------------------------------------------------------------------------
# Shared artifact helpers.
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def run_header(cfg: ExperimentConfig, cycle: DriveCycle, cycle_path: str) -> str:
    """Comment block written at the top of every artifact."""
    return "\n".join(
        [
            config_header(cfg),
            f"cycle name={cycle.name} path={cycle_path} samples={cycle.n_samples}",
            f"steps {cycle.n_samples - 1}",
        ]
    )


def curve_steps(path: str) -> int:
    """Recover the per-episode step count recorded in a curve file header."""
    with open(path, "r") as fh:
        for line in fh:
            if line.startswith("# steps "):
                return int(line.split()[2])
            if not line.startswith("#"):
                break
    raise ValidationError(f"{path}: missing '# steps' header line")


EPISODE_COLUMNS = (
    "time_s,ref_speed_mps,speed_mps,gear,demand_nm,brake_nm,action_index,"
    "em_torque_nm,engine_torque_nm,fuel_rate_kgps,battery_power_w,soc,reward"
)


def save_episode(episode: Episode, path: str, header_comment: str = "") -> None:
    with open(path, "w", newline="\n") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(EPISODE_COLUMNS + "\n")
        for j in range(episode.n_steps):
            fh.write(
                ",".join(
                    [
                        _fmt((j + 1) * episode.dt_s),
                        _fmt(episode.ref_speeds[j]),
                        _fmt(episode.speeds[j]),
                        str(episode.gears[j]),
                        _fmt(episode.demands[j]),
                        _fmt(episode.brakes[j]),
                        str(episode.action_indices[j]),
                        _fmt(episode.em_torques[j]),
                        _fmt(episode.engine_torques[j]),
                        _fmt(episode.fuel_rates[j]),
                        _fmt(episode.battery_powers[j]),
                        _fmt(episode.socs[j]),
                        _fmt(episode.rewards[j]),
                    ]
                )
                + "\n"
            )


@dataclass(frozen=True)
class EvalSummary:
    cycle: str
    policy: str
    mpg: float
    fuel_kg: float
    distance_mi: float
    final_soc: float
    reward_sum: float
    max_tracking_err_mph: float
    rms_tracking_err_mph: float
    reward_violations: int


SUMMARY_COLUMNS = (
    "cycle,policy,mpg,fuel_kg,distance_mi,final_soc,reward_sum,"
    "max_tracking_err_mph,rms_tracking_err_mph,reward_violations"
)


def summarize(episode: Episode, cycle: DriveCycle, policy: str) -> EvalSummary:
    return EvalSummary(
        cycle=cycle.name,
        policy=policy,
        mpg=episode.mpg(),
        fuel_kg=episode.fuel_kg,
        distance_mi=episode.distance_m / MILE_M,
        final_soc=episode.final_soc,
        reward_sum=episode.reward_sum,
        max_tracking_err_mph=episode.max_tracking_error_mps() / MPH_TO_MPS,
        rms_tracking_err_mph=episode.rms_tracking_error_mps() / MPH_TO_MPS,
        reward_violations=episode.reward_violations,
    )


def save_summaries(summaries: Sequence[EvalSummary], path: str, header_comment: str = "") -> None:
    with open(path, "w", newline="\n") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(SUMMARY_COLUMNS + "\n")
        for s in summaries:
            fh.write(
                f"{s.cycle},{s.policy},{_fmt(s.mpg)},{_fmt(s.fuel_kg)},{_fmt(s.distance_mi)},"
                f"{_fmt(s.final_soc)},{_fmt(s.reward_sum)},{_fmt(s.max_tracking_err_mph)},"
                f"{_fmt(s.rms_tracking_err_mph)},{s.reward_violations}\n"
            )


# ---------------------------------------------------------------------------
# Initializers.
# ---------------------------------------------------------------------------


def initializer_setup(
    name: str, cfg: ExperimentConfig, env: SimEnv
) -> Tuple[QTable, Optional[Controller]]:
    """Initial Q-table plus the controller that drives iteration 1.

    cold and heuristic runs start from their table and let iteration 1 be
    the table's own greedy policy; the ECMS run starts from a zero table
    and feeds the ECMS rollout in as iteration 1's experience.
    """
    if name == "cold":
        return cold_init(cfg.discretization), None
    if name == "heuristic":
        return heuristic_init(cfg.discretization, cfg.heuristic), None
    if name == "ecms":
        return cold_init(cfg.discretization), ecms_controller(env)
    raise ValidationError(f"unknown initializer {name!r}")


def pristine_table(name: str, cfg: ExperimentConfig, cycle: DriveCycle, env: SimEnv) -> QTable:
    """The initializer's table before any training iterations.

    For the ECMS initializer this is the table produced by replaying one
    ECMS rollout, which is what training reaches at the end of iteration 1.
    """
    if name == "cold":
        return cold_init(cfg.discretization)
    if name == "heuristic":
        return heuristic_init(cfg.discretization, cfg.heuristic)
    if name == "ecms":
        table, _ = ecms_warmstart(cycle, env, cfg.hyper)
        return table
    raise ValidationError(f"unknown initializer {name!r}")


# ---------------------------------------------------------------------------
# Training orchestration.
# ---------------------------------------------------------------------------


@dataclass
class TrainRun:
    initializer: str
    seed: int
    records: List[LearningRecord]
    table: QTable
    curve_path: str
    qtable_path: str


def run_training(
    cfg: ExperimentConfig,
    cycle: DriveCycle,
    cycle_path: str,
    initializer: str,
    seed: int,
    out_dir: str,
) -> TrainRun:
    env = cfg.env()
    hyper = replace(cfg.hyper, seed=seed)
    table0, warm = initializer_setup(initializer, cfg, env)
    table, records = train(cycle, env, hyper, qtable=table0, warm_policy=warm)

    header = run_header(cfg, cycle, cycle_path) + f"\ninitializer {initializer}\nseed {seed}"
    curve_path = os.path.join(out_dir, f"{initializer}_seed{seed}_curve.csv")
    qtable_path = os.path.join(out_dir, f"{initializer}_seed{seed}_qtable.txt")
    save_curve(records, curve_path, header_comment=header)
    save_qtable(table, qtable_path, header_comment=header)
    return TrainRun(initializer, seed, records, table, curve_path, qtable_path)


MEAN_CURVE_COLUMNS = (
    "iteration,exploratory_reward_sum_mean,greedy_reward_sum_mean,greedy_mpg_mean,update_rate"
)


def save_mean_curve(runs: Sequence[TrainRun], path: str, header_comment: str = "") -> None:
    """Per-iteration means across seeds (the learning curve usually plotted)."""
    n_iter = len(runs[0].records)
    with open(path, "w", newline="\n") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(MEAN_CURVE_COLUMNS + "\n")
        for i in range(n_iter):
            rows = [run.records[i] for run in runs]
            exp_mean = math.fsum(r.exploratory_reward_sum for r in rows) / len(rows)
            greedy_mean = math.fsum(r.greedy_reward_sum for r in rows) / len(rows)
            mpg_mean = math.fsum(r.greedy_mpg for r in rows) / len(rows)
            rate = sum(1 for r in rows if r.updated) / len(rows)
            fh.write(
                f"{rows[0].iteration},{_fmt(exp_mean)},{_fmt(greedy_mean)},"
                f"{_fmt(mpg_mean)},{_fmt(rate)}\n"
            )


def cmd_train(
    cfg: ExperimentConfig,
    cycle_path: str,
    out_dir: str,
    initializer: Optional[str] = None,
) -> List[TrainRun]:
    """Train one initializer across all configured seeds; write artifacts."""
    init = initializer or cfg.run.initializer
    cycle = load_cycle(cycle_path)
    os.makedirs(out_dir, exist_ok=True)
    runs = [run_training(cfg, cycle, cycle_path, init, seed, out_dir) for seed in cfg.run.seeds]
    header = run_header(cfg, cycle, cycle_path) + f"\ninitializer {init}"
    save_mean_curve(runs, os.path.join(out_dir, f"{init}_curve_mean.csv"), header_comment=header)
    return runs


# ---------------------------------------------------------------------------
# Evaluation commands.
# ---------------------------------------------------------------------------


def check_grid_match(table_disc: Discretization, cfg_disc: Discretization, source: str) -> None:
    """Refuse to evaluate a table whose grids differ from the config's."""
    diffs = []
    for label, got, want in [
        ("speed_bins_mph", table_disc.speed_bins_mph, cfg_disc.speed_bins_mph),
        ("torque_demand_bins_nm", table_disc.torque_bins_nm, cfg_disc.torque_bins_nm),
        ("action_torques_nm", table_disc.action_torques_nm, cfg_disc.action_torques_nm),
    ]:
        if got != want:
            diffs.append(f"{label}: table={list(got)} config={list(want)}")
    if diffs:
        raise ValidationError(f"{source}: grid mismatch with config; " + "; ".join(diffs))


def cmd_eval(
    cfg: ExperimentConfig, qtable_path: str, cycle_path: str, out_dir: str
) -> EvalSummary:
    """Greedy rollout of a persisted Q-table; no learning updates."""
    table = load_qtable(qtable_path)
    check_grid_match(table.disc, cfg.discretization, qtable_path)
    cycle = load_cycle(cycle_path)
    env = cfg.env()
    episode = evaluate_greedy(table, cycle, env)
    summary = summarize(episode, cycle, policy=f"greedy:{os.path.basename(qtable_path)}")
    os.makedirs(out_dir, exist_ok=True)
    header = run_header(cfg, cycle, cycle_path) + f"\nqtable {qtable_path}"
    save_episode(episode, os.path.join(out_dir, "eval_episode.csv"), header_comment=header)
    save_summaries([summary], os.path.join(out_dir, "eval_summary.csv"), header_comment=header)
    return summary


def cmd_ecms_eval(cfg: ExperimentConfig, cycle_path: str, out_dir: str) -> EvalSummary:
    """Closed-loop rollout with the ECMS controller as the policy."""
    cycle = load_cycle(cycle_path)
    env = cfg.env()
    episode = run_episode(ecms_controller(env), cycle, env)
    summary = summarize(episode, cycle, policy="ecms")
    os.makedirs(out_dir, exist_ok=True)
    header = run_header(cfg, cycle, cycle_path)
    save_episode(episode, os.path.join(out_dir, "ecms_episode.csv"), header_comment=header)
    save_summaries([summary], os.path.join(out_dir, "ecms_summary.csv"), header_comment=header)
    return summary


def cmd_cycle_validate(cycle_path: str) -> Dict[str, object]:
    """Load a cycle file and report its aggregate statistics."""
    cycle = load_cycle(cycle_path)
    distance_m = 0.0
    for a, b in zip(cycle.speeds_mps, cycle.speeds_mps[1:]):
        distance_m += 0.5 * (a + b) * cycle.dt_s
    mean_mps = math.fsum(cycle.speeds_mps) / cycle.n_samples
    return {
        "name": cycle.name,
        "samples": cycle.n_samples,
        "duration_s": cycle.duration_s,
        "max_speed_mph": cycle.max_speed_mps / MPH_TO_MPS,
        "mean_speed_mph": mean_mps / MPH_TO_MPS,
        "distance_mi": distance_m / MILE_M,
    }


# ---------------------------------------------------------------------------
# Comparison report.
# ---------------------------------------------------------------------------


def iterations_to_threshold(records: Sequence[LearningRecord], steps: int, fraction: float = 0.95) -> int:
    """First iteration whose greedy reward sum closes 95% of the fuel gap.

    The reward scale carries a +1-per-step offset, so "95% of the final
    reward sum" is measured from the perfect-reward ceiling (steps x 1):
    the shortfall from that ceiling is the episode's total equivalent fuel,
    and the run has converged once its shortfall is within 1/fraction of
    the final shortfall.  Falls back to the last iteration if never reached.
    """
    final_gap = steps - records[-1].greedy_reward_sum
    limit = final_gap / fraction
    for r in records:
        if steps - r.greedy_reward_sum <= limit:
            return r.iteration
    return records[-1].iteration


@dataclass(frozen=True)
class ComparisonRow:
    initializer: str
    n_seeds: int
    iteration1_mpg: float
    final_mpg_mean: float
    final_mpg_std: float
    iterations_to_threshold_mean: float
    iterations_ratio_vs_cold: float
    final_greedy_reward_sum_mean: float


REPORT_COLUMNS = (
    "initializer,n_seeds,iteration1_mpg,final_mpg_mean,final_mpg_std,"
    "iterations_to_threshold_mean,iterations_ratio_vs_cold,final_greedy_reward_sum_mean"
)


def build_report(
    records_by_init: Dict[str, List[List[LearningRecord]]], steps: int
) -> List[ComparisonRow]:
    """Aggregate per-seed learning curves into one row per initializer.

    The iteration-count ratio is taken against the cold rows when present,
    otherwise against the row itself (ratio 1.0).
    """
    means: Dict[str, float] = {}
    rows: List[ComparisonRow] = []
    for init, all_records in records_by_init.items():
        iters = [iterations_to_threshold(records, steps) for records in all_records]
        means[init] = math.fsum(iters) / len(iters)
    for init, all_records in records_by_init.items():
        iter1 = [records[0].greedy_mpg for records in all_records]
        finals = [records[-1].greedy_mpg for records in all_records]
        sums = [records[-1].greedy_reward_sum for records in all_records]
        baseline = means.get("cold", means[init])
        rows.append(
            ComparisonRow(
                initializer=init,
                n_seeds=len(all_records),
                iteration1_mpg=iter1[0],
                final_mpg_mean=statistics.fmean(finals),
                final_mpg_std=statistics.pstdev(finals) if len(finals) > 1 else 0.0,
                iterations_to_threshold_mean=means[init],
                iterations_ratio_vs_cold=means[init] / baseline if baseline else 1.0,
                final_greedy_reward_sum_mean=statistics.fmean(sums),
            )
        )
    return rows


def save_report(rows: Sequence[ComparisonRow], path: str, header_comment: str = "") -> None:
    with open(path, "w", newline="\n") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(REPORT_COLUMNS + "\n")
        for r in rows:
            fh.write(
                f"{r.initializer},{r.n_seeds},{_fmt(r.iteration1_mpg)},{_fmt(r.final_mpg_mean)},"
                f"{_fmt(r.final_mpg_std)},{_fmt(r.iterations_to_threshold_mean)},"
                f"{_fmt(r.iterations_ratio_vs_cold)},{_fmt(r.final_greedy_reward_sum_mean)}\n"
            )


def report_from_curves(curve_paths_by_init: Dict[str, List[str]], steps: Optional[int] = None) -> List[ComparisonRow]:
    """Rebuild the comparison report from persisted curve files alone."""
    records_by_init: Dict[str, List[List[LearningRecord]]] = {}
    for init, paths in curve_paths_by_init.items():
        records_by_init[init] = [load_curve(p) for p in paths]
        if steps is None:
            steps = curve_steps(paths[0])
    assert steps is not None
    return build_report(records_by_init, steps)


def cmd_compare(
    cfg: ExperimentConfig,
    cycle_path: str,
    out_dir: str,
    initializers: Sequence[str] = ("cold", "heuristic", "ecms"),
) -> List[ComparisonRow]:
    """Train every requested initializer across seeds and aggregate.

    Also emits the per-state optimal-action maps before and after training
    and a per-seed greedy evaluation summary of every trained table.
    """
    cycle = load_cycle(cycle_path)
    env = cfg.env()
    os.makedirs(out_dir, exist_ok=True)
    header = run_header(cfg, cycle, cycle_path)

    records_by_init: Dict[str, List[List[LearningRecord]]] = {}
    eval_summaries: List[EvalSummary] = []
    for init in initializers:
        table0 = pristine_table(init, cfg, cycle, env)
        save_action_map(
            table0,
            os.path.join(out_dir, f"{init}_action_map_initial.csv"),
            header_comment=header + f"\ninitializer {init} stage=initial",
        )
        runs = []
        for seed in cfg.run.seeds:
            run = run_training(cfg, cycle, cycle_path, init, seed, out_dir)
            runs.append(run)
            save_action_map(
                run.table,
                os.path.join(out_dir, f"{init}_seed{seed}_action_map_trained.csv"),
                header_comment=header + f"\ninitializer {init} seed={seed} stage=trained",
            )
            final_ep = evaluate_greedy(run.table, cycle, env)
            eval_summaries.append(summarize(final_ep, cycle, policy=f"greedy:{init}:seed{seed}"))
        save_mean_curve(
            runs,
            os.path.join(out_dir, f"{init}_curve_mean.csv"),
            header_comment=header + f"\ninitializer {init}",
        )
        records_by_init[init] = [run.records for run in runs]

    rows = build_report(records_by_init, cycle.n_samples - 1)
    save_report(rows, os.path.join(out_dir, "compare_report.csv"), header_comment=header)
    save_summaries(
        eval_summaries, os.path.join(out_dir, "compare_eval_summary.csv"), header_comment=header
    )
    return rows
