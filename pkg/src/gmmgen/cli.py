"""Command-line pipeline: synth, fit, generalize, regress, evaluate, benchmark, plot.

Exit codes: 0 on success, 2 for invalid inputs or paths, 1 for unexpected
internal failures.  A JSON config file can pre-set any subcommand flag;
explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench, plot
from .data import PhaseSchedule, Pose, load_trajectory, save_trajectory
from .gmr import regress
from .model import FitConfig, fit_gmm, load_model, save_model
from .reparam import (ReparamConfig, TaskSpec, generalize, load_reparam_model,
                      save_reparam_model)
from .scene import SuccessThresholds, default_scene, load_scene, scene_to_dict
from .synth import SynthConfig, generate_demonstrations

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2


def _parse_pose(text: str) -> Pose:
    parts = text.split(",")
    if len(parts) != 6:
        raise ValueError(f"pose '{text}' must have 6 comma-separated numbers")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ValueError(f"pose '{text}' contains a non-numeric entry") from None
    return Pose.from_vector(values)


def _load_scene_arg(path):
    return load_scene(path) if path else default_scene()


def _load_any_model(path):
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    if "task" in obj:
        return load_reparam_model(path)
    return load_model(path)


def _thresholds(args) -> SuccessThresholds:
    return SuccessThresholds(args.max_boundary_pos, args.max_boundary_rot,
                             args.collision_samples)


def _add_threshold_flags(sub):
    sub.add_argument("--max-boundary-pos", type=float, default=10.0,
                     help="boundary position threshold, mm")
    sub.add_argument("--max-boundary-rot", type=float, default=5.0,
                     help="boundary rotation threshold, deg")
    sub.add_argument("--collision-samples", type=int, default=200,
                     help="poses sampled along the trajectory for collision checks")


def cmd_synth(args) -> int:
    scene = _load_scene_arg(args.scene)
    cfg = SynthConfig(
        n_demos=args.demos,
        lift_height=args.lift,
        noise_pos=args.noise_pos_mm / 1000.0,
        noise_rot=np.deg2rad(args.noise_rot_deg),
        sample_rate=args.rate,
        seed=args.seed,
    )
    demos, task = generate_demonstrations(scene, cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for j, demo in enumerate(demos):
        name = f"demo_{j:02d}.csv"
        save_trajectory(demo, out_dir / name)
        names.append(name)
    phases = cfg.phases()
    manifest = {
        "files": names,
        "seed": args.seed,
        "phases": {"grasp_end": phases.grasp_end,
                   "release_start": phases.release_start,
                   "duration": phases.duration},
        "task": {"start": [float(v) for v in task.start_vector()],
                 "goal": [float(v) for v in task.goal_vector()]},
        "config": {"demos": args.demos, "lift": cfg.lift_height,
                   "noise_pos_mm": args.noise_pos_mm,
                   "noise_rot_deg": args.noise_rot_deg, "rate": cfg.sample_rate},
        "scene": scene_to_dict(scene),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n",
                                           encoding="utf-8")
    print(f"wrote {len(names)} demonstrations to {out_dir}")
    return EXIT_OK


def _demo_paths(args):
    paths = [Path(p) for p in args.demos]
    phases = None
    if len(paths) == 1 and paths[0].suffix == ".json":
        manifest_path = paths[0]
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
            files = manifest["files"]
        except OSError as exc:
            raise ValueError(f"{manifest_path}: {exc}") from exc
        except (json.JSONDecodeError, KeyError) as exc:
            raise ValueError(f"{manifest_path}: invalid manifest: {exc}") from exc
        paths = [manifest_path.parent / f for f in files]
        if "phases" in manifest:
            p = manifest["phases"]
            phases = PhaseSchedule(p["grasp_end"], p["release_start"], p["duration"])
    return paths, phases


def cmd_fit(args) -> int:
    paths, phases = _demo_paths(args)
    demos = [load_trajectory(p) for p in paths]
    if args.grasp_end is not None and args.release_start is not None:
        phases = PhaseSchedule(args.grasp_end, args.release_start,
                               demos[0].duration)
    config = FitConfig(n_components=args.components, max_iters=args.max_iters,
                       loglik_tol=args.tol, cov_floor=args.cov_floor,
                       seed=args.seed)
    result = fit_gmm(demos, config, phases)
    save_model(result.model, args.out)
    print(f"fit {result.model.n_components} components on {len(demos)} demos; "
          f"loglik {result.loglik_trace[-1]:.3f} after {len(result.loglik_trace)} iters")
    return EXIT_OK


def cmd_generalize(args) -> int:
    model = load_model(args.model)
    task = TaskSpec(_parse_pose(args.start), _parse_pose(args.goal))
    config = ReparamConfig(ablate_covariance=args.ablate_covariance)
    adapted = generalize(model, task, config)
    save_reparam_model(adapted, args.out_model)
    if args.out_traj:
        times = bench.default_times(model.duration, args.rate)
        save_trajectory(regress(adapted, times), args.out_traj)
    print(f"generalized model written to {args.out_model}")
    return EXIT_OK


def cmd_regress(args) -> int:
    model = _load_any_model(args.model)
    times = bench.default_times(model.duration, args.rate)
    save_trajectory(regress(model, times), args.out)
    print(f"regressed {len(times)} samples to {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    model = _load_any_model(args.model)
    traj = load_trajectory(args.traj)
    scene = _load_scene_arg(args.scene)
    task = TaskSpec(_parse_pose(args.start), _parse_pose(args.goal))
    if args.ref:
        reference = load_trajectory(args.ref)
    else:
        reference = regress(model, bench.default_times(model.duration, args.rate))
    report = bench.evaluate_trajectory(traj, task, scene, reference, model.phases,
                                       _thresholds(args))
    text = json.dumps(report.to_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    model = load_model(args.model)
    scene = _load_scene_arg(args.scene)
    config = ReparamConfig(ablate_covariance=args.ablate_covariance)
    reference = load_trajectory(args.ref) if args.ref else None
    result = bench.run_benchmark(model, scene, args.mode, args.trials, args.seed,
                                 config, _thresholds(args), reference,
                                 method=args.method, rate=args.rate,
                                 workers=args.workers)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bench.write_summary_csv([result.summary], out_dir / "summary.csv")
    bench.write_trials_jsonl(result, out_dir / "trials.jsonl")
    print(f"{result.method} {result.mode}: success {result.summary['success_rate']:.1f}% "
          f"over {args.trials} trials; results in {out_dir}")
    return EXIT_OK


def cmd_plot(args) -> int:
    trajectories = [load_trajectory(p) for p in args.traj]
    scene = load_scene(args.scene) if args.scene else None
    plot.save_svg(trajectories, args.out, scene)
    if args.out_csv:
        save_trajectory(trajectories[0], args.out_csv)
    print(f"plot written to {args.out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gmmgen",
        description="Learn, generalize, and evaluate demonstration trajectories.")
    subs = parser.add_subparsers(dest="command", required=True)
    registry = {}

    def sub(name, func, **kwargs):
        s = subs.add_parser(name, **kwargs)
        s.add_argument("--config", default=None,
                       help="JSON file with default values for this subcommand's flags")
        s.set_defaults(func=func)
        registry[name] = s
        return s

    synth_defaults = SynthConfig()
    s = sub("synth", cmd_synth, help="generate synthetic demonstrations")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--scene", default=None, help="scene JSON (default: built-in shelf)")
    s.add_argument("--demos", type=int, default=synth_defaults.n_demos)
    s.add_argument("--lift", type=float, default=synth_defaults.lift_height,
                   help="transport arc lift, m")
    s.add_argument("--noise-pos-mm", type=float,
                   default=synth_defaults.noise_pos * 1000.0)
    s.add_argument("--noise-rot-deg", type=float,
                   default=float(np.rad2deg(synth_defaults.noise_rot)))
    s.add_argument("--rate", type=float, default=synth_defaults.sample_rate)
    s.add_argument("--seed", type=int, default=synth_defaults.seed)

    s = sub("fit", cmd_fit, help="fit a mixture model to demonstrations")
    s.add_argument("--demos", nargs="+", required=True,
                   help="demo CSVs, or a single synth manifest JSON")
    s.add_argument("--components", type=int, default=15)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-iters", type=int, default=200)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--cov-floor", type=float, default=1e-6)
    s.add_argument("--grasp-end", type=float, default=None)
    s.add_argument("--release-start", type=float, default=None)

    s = sub("generalize", cmd_generalize, help="adapt a model to new start/goal poses")
    s.add_argument("--model", required=True)
    s.add_argument("--start", required=True, help="px,py,pz,rx,ry,rz")
    s.add_argument("--goal", required=True, help="px,py,pz,rx,ry,rz")
    s.add_argument("--ablate-covariance", action="store_true",
                   help="keep source covariances; remap means only")
    s.add_argument("--out-model", required=True)
    s.add_argument("--out-traj", default=None)
    s.add_argument("--rate", type=float, default=100.0)

    s = sub("regress", cmd_regress, help="regress a trajectory from a model")
    s.add_argument("--model", required=True, help="fitted or generalized model JSON")
    s.add_argument("--out", required=True)
    s.add_argument("--rate", type=float, default=100.0)

    s = sub("evaluate", cmd_evaluate, help="score a trajectory against a task")
    s.add_argument("--traj", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--start", required=True)
    s.add_argument("--goal", required=True)
    s.add_argument("--scene", default=None)
    s.add_argument("--ref", default=None, help="reference CSV for shape deviation")
    s.add_argument("--out", default=None)
    s.add_argument("--rate", type=float, default=100.0)
    _add_threshold_flags(s)

    s = sub("benchmark", cmd_benchmark, help="run randomized generalization trials")
    s.add_argument("--model", required=True)
    s.add_argument("--scene", default=None)
    s.add_argument("--mode", choices=("translational", "combined"),
                   default="translational")
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--ablate-covariance", action="store_true")
    s.add_argument("--method", default=None, help="label for the summary row")
    s.add_argument("--ref", default=None)
    s.add_argument("--rate", type=float, default=100.0)
    s.add_argument("--workers", type=int, default=1,
                   help="trial parallelism; results match a serial run")
    _add_threshold_flags(s)

    s = sub("plot", cmd_plot, help="render trajectories (and scene) to SVG")
    s.add_argument("--traj", nargs="+", required=True)
    s.add_argument("--scene", default=None)
    s.add_argument("--out", required=True)
    s.add_argument("--out-csv", default=None,
                   help="also export the first trajectory's plotted data")

    return parser, registry


def _apply_config_defaults(argv, registry) -> None:
    if "--config" not in argv:
        return
    path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
    if path is None or not argv or argv[0] not in registry:
        return
    try:
        values = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(values, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    registry[argv[0]].set_defaults(
        **{k.replace("-", "_"): v for k, v in values.items()})


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser, registry = build_parser()
    try:
        _apply_config_defaults(argv, registry)
        args = parser.parse_args(argv)
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
