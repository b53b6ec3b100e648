"""Randomized-task benchmark: sample tasks, generalize, regress, score.

Per-trial RNGs are derived from (seed, trial index), so trials are
independent of execution order and a run is reproducible byte for byte.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import PhaseSchedule, Pose, Trajectory
from .gmr import regress
from .metrics import (EvalReport, average_jerk, boundary_error, phase_deviation,
                      shape_deviation)
from .model import GmmModel
from .reparam import ReparamConfig, TaskSpec, generalize
from .scene import Scene, SuccessThresholds, sample_task, trajectory_success

SUMMARY_COLUMNS = (
    "method", "success_rate",
    "start_err_mm", "start_err_deg", "goal_err_mm", "goal_err_deg",
    "grasp_dev_mm", "grasp_dev_deg", "release_dev_mm", "release_dev_deg",
    "shape_dev", "jerk_lin", "jerk_ang",
)


def default_times(duration: float, rate: float = 100.0) -> np.ndarray:
    return np.linspace(0.0, duration, int(round(duration * rate)) + 1)


def evaluate_trajectory(traj: Trajectory, task: TaskSpec, scene: Scene,
                        reference: Trajectory, phases: PhaseSchedule,
                        thresholds: SuccessThresholds = SuccessThresholds(),
                        shape_points: int = 200,
                        jerk_rate: float = 100.0) -> EvalReport:
    """Score one trajectory with the full metric suite plus the success check."""
    (start_mm, start_deg), (goal_mm, goal_deg) = boundary_error(traj, task)
    (grasp_mm, grasp_deg), (release_mm, release_deg) = phase_deviation(traj, phases)
    shape = shape_deviation(traj, reference, shape_points)
    jerk_lin, jerk_ang = average_jerk(traj, jerk_rate)
    success, reason = trajectory_success(traj, scene, task, thresholds)
    return EvalReport(
        success=success,
        failure_reason=reason,
        start_error_mm=start_mm,
        start_error_deg=start_deg,
        goal_error_mm=goal_mm,
        goal_error_deg=goal_deg,
        grasp_dev_mm=grasp_mm,
        grasp_dev_deg=grasp_deg,
        release_dev_mm=release_mm,
        release_dev_deg=release_deg,
        shape_deviation=shape,
        jerk_linear=jerk_lin,
        jerk_angular=jerk_ang,
    )


@dataclass(frozen=True)
class TrialRecord:
    index: int
    task: TaskSpec
    report: EvalReport


@dataclass(frozen=True)
class BenchmarkResult:
    method: str
    mode: str
    seed: int
    trials: tuple
    summary: dict


def model_endpoints(model: GmmModel):
    """First/last component means as poses; they anchor the task sampler."""
    first = model.components[0].x_mean
    last = model.components[-1].x_mean
    return Pose(first[:3], first[3:6]), Pose(last[:3], last[3:6])


def summarize(records, method: str) -> dict:
    reports = [r.report for r in records]
    means = {
        "start_err_mm": np.mean([r.start_error_mm for r in reports]),
        "start_err_deg": np.mean([r.start_error_deg for r in reports]),
        "goal_err_mm": np.mean([r.goal_error_mm for r in reports]),
        "goal_err_deg": np.mean([r.goal_error_deg for r in reports]),
        "grasp_dev_mm": np.mean([r.grasp_dev_mm for r in reports]),
        "grasp_dev_deg": np.mean([r.grasp_dev_deg for r in reports]),
        "release_dev_mm": np.mean([r.release_dev_mm for r in reports]),
        "release_dev_deg": np.mean([r.release_dev_deg for r in reports]),
        "shape_dev": np.mean([r.shape_deviation for r in reports]),
        "jerk_lin": np.mean([r.jerk_linear for r in reports]),
        "jerk_ang": np.mean([r.jerk_angular for r in reports]),
    }
    summary = {
        "method": method,
        "success_rate": 100.0 * sum(r.success for r in reports) / len(reports),
    }
    summary.update({k: float(v) for k, v in means.items()})
    return summary


def run_benchmark(model: GmmModel, scene: Scene, mode: str, trials: int, seed: int,
                  config: ReparamConfig | None = None,
                  thresholds: SuccessThresholds = SuccessThresholds(),
                  reference: Trajectory | None = None,
                  method: str | None = None, rate: float = 100.0,
                  workers: int = 1) -> BenchmarkResult:
    """Run seeded trials of sample-generalize-regress-evaluate.

    The reference trajectory for shape deviation defaults to the source
    model's own regression.  Trial i draws from default_rng([seed, i]), so
    results do not depend on evaluation order and a parallel run is byte
    identical to a serial one.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if workers < 1:
        raise ValueError("need at least one worker")
    if config is None:
        config = ReparamConfig()
    times = default_times(model.duration, rate)
    if reference is None:
        reference = regress(model, times)
    if method is None:
        method = "ablated" if config.ablate_covariance else "full"
    base_start, base_goal = model_endpoints(model)

    def run_trial(i: int) -> TrialRecord:
        rng = np.random.default_rng([seed, i])
        task = sample_task(scene, mode, rng, base_start, base_goal)
        adapted = generalize(model, task, config)
        traj = regress(adapted, times)
        report = evaluate_trajectory(traj, task, scene, reference, model.phases,
                                     thresholds)
        return TrialRecord(i, task, report)

    if workers == 1:
        records = [run_trial(i) for i in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_trial, range(trials)))
    summary = summarize(records, method)
    return BenchmarkResult(method, mode, seed, tuple(records), summary)


def summary_csv_lines(summaries) -> list:
    lines = [",".join(SUMMARY_COLUMNS)]
    for row in summaries:
        fields = []
        for col in SUMMARY_COLUMNS:
            value = row[col]
            fields.append(value if isinstance(value, str) else str(float(value)))
        lines.append(",".join(fields))
    return lines


def write_summary_csv(summaries, path) -> None:
    Path(path).write_text("\n".join(summary_csv_lines(summaries)) + "\n",
                          encoding="utf-8")


def trial_to_dict(result: BenchmarkResult, record: TrialRecord) -> dict:
    return {
        "trial": record.index,
        "method": result.method,
        "mode": result.mode,
        "seed": result.seed,
        "task": {
            "start": [float(v) for v in record.task.start_vector()],
            "goal": [float(v) for v in record.task.goal_vector()],
        },
        "report": record.report.to_dict(),
    }


def write_trials_jsonl(result: BenchmarkResult, path) -> None:
    lines = [json.dumps(trial_to_dict(result, rec)) for rec in result.trials]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
