"""Command-line front end: single runs, parameter sweeps, and reports.

Exit codes: 0 on success, 1 for configuration problems, 2 for evaluator or
worker-protocol failures, 3 for I/O and artifact problems. Every failure
prints a one-line diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .artifacts import ArtifactError, read_run, write_run_artifacts
from .bridge import BridgeError, BridgeEvaluator, WorkerHandle
from .core import (
    ConfigError,
    EvolutionConfig,
    derive_child_seed,
    load_config,
    make_rng,
)
from .engine import RunAborted, run_evolution
from .evaluators import EvaluationError, SyntheticWorld
from .metrics import (
    convergence_curves,
    deception_delta,
    diversity_matrix,
    summarize_distances,
)

JOBS_ENV_VAR = "LATENT_EVOLVE_JOBS"

# Grid axes accepted by cmd_sweep, mapped to their config fields.
_GRID_AXES = {"pR": "crossover_prob", "pM": "mutation_prob"}


def _fail(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV_VAR)
    if raw is None:
        return 1
    try:
        jobs = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{JOBS_ENV_VAR} must be an integer, got {raw!r}") from exc
    if jobs < 1:
        raise ConfigError(f"{JOBS_ENV_VAR} must be >= 1, got {jobs}")
    return jobs


def _load_effective_config(config_path: str | None, seed: int | None) -> EvolutionConfig:
    config = load_config(config_path) if config_path else EvolutionConfig()
    if seed is not None:
        config = dataclasses.replace(config, master_seed=seed)
    return config


def _build_synthetic(config: EvolutionConfig, world_seed: int, proxy_dim: int | None) -> SyntheticWorld:
    return SyntheticWorld.from_seed(
        world_seed,
        latent_dim=config.latent_dim,
        proxy_dim=proxy_dim if proxy_dim is not None else 2 * config.latent_dim,
        embedding_dim=config.embedding_dim,
    )


def _verify_and_fetch_best_embedding(evaluator, record):
    """Re-evaluate the best latent; its stored distance must reproduce."""
    best_latent, best_distance = record.hall_of_fame[0]
    ((embedding, replayed),) = evaluator.evaluate_batch([best_latent])
    if abs(replayed - best_distance) > 1e-6:
        raise EvaluationError(
            f"best solution replay drifted: recorded {best_distance!r}, got {replayed!r}"
        )
    return embedding


def _make_progress_observer(label: str):
    def observer(stats):
        print(
            f"[{label}] gen {stats.generation}: best={stats.best_distance:.6f} "
            f"mean={stats.mean_distance:.6f} evals={stats.evaluations_so_far}",
            file=sys.stderr,
        )

    return observer


def cmd_run(args: argparse.Namespace) -> int:
    config = _load_effective_config(args.config, args.seed)
    if args.evaluator == "worker":
        if not args.worker_cmd:
            raise ConfigError("--evaluator worker requires --worker-cmd")
        if not args.target:
            raise ConfigError("--evaluator worker requires --target")
    elif args.worker_cmd or args.target:
        raise ConfigError("--worker-cmd/--target only apply to --evaluator worker")

    handle = None
    try:
        if args.evaluator == "worker":
            handle = WorkerHandle.spawn(args.worker_cmd)
            handle.handshake(config.latent_dim, config.embedding_dim)
            evaluator = BridgeEvaluator(handle, command=args.worker_cmd)
            evaluator.set_target(args.target)
        else:
            evaluator = _build_synthetic(config, args.world_seed, args.proxy_dim)

        observer = _make_progress_observer("run") if args.verbose else None
        record = run_evolution(config, evaluator, make_rng(config.master_seed), observer)
        best_embedding = _verify_and_fetch_best_embedding(evaluator, record)
        write_run_artifacts(
            args.out, record, config.master_seed, evaluator.describe(), best_embedding
        )
    finally:
        if handle is not None:
            handle.shutdown()

    best_distance = record.hall_of_fame[0][1]
    print(f"run complete: best_distance={best_distance!r} artifacts={args.out}")
    return 0


def _parse_grid(spec: str) -> list[tuple[str, list[float]]]:
    """Parse "pR=0.6,0.75,0.9;pM=0.001,0.01,0.1" into ordered axes."""
    axes = []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        key, sep, values = chunk.partition("=")
        key = key.strip()
        if not sep or key not in _GRID_AXES:
            known = ", ".join(sorted(_GRID_AXES))
            raise ConfigError(f"bad grid axis {chunk!r}; axes must be one of: {known}")
        try:
            parsed = [float(v) for v in values.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad grid values in {chunk!r}: {exc}") from exc
        if not parsed:
            raise ConfigError(f"grid axis {key!r} has no values")
        axes.append((key, parsed))
    if not axes:
        raise ConfigError("--grid must name at least one axis")
    seen = [k for k, _ in axes]
    if len(seen) != len(set(seen)):
        raise ConfigError(f"grid axis repeated in {spec!r}")
    return axes


def _grid_cells(axes: list[tuple[str, list[float]]]) -> list[list[tuple[str, float]]]:
    """Cross product in grid-major order: later axes vary fastest."""
    cells: list[list[tuple[str, float]]] = [[]]
    for key, values in axes:
        cells = [cell + [(key, value)] for cell in cells for value in values]
    return cells


def _cell_label(cell: list[tuple[str, float]]) -> str:
    return "_".join(f"{key}{value!r}" for key, value in cell)


def _sweep_task(task: dict) -> dict:
    """Run one sweep cell repeat; returns its summary row (never raises)."""
    started = time.perf_counter()
    try:
        config = EvolutionConfig(**task["config"])
        world = SyntheticWorld.from_seed(
            task["world_seed"],
            latent_dim=config.latent_dim,
            proxy_dim=task["proxy_dim"] if task["proxy_dim"] is not None else 2 * config.latent_dim,
            embedding_dim=config.embedding_dim,
        )
        record = run_evolution(config, world, make_rng(task["seed"]))
        best_embedding = _verify_and_fetch_best_embedding(world, record)
        write_run_artifacts(task["out"], record, task["seed"], world.describe(), best_embedding)
        return {
            "cell": task["cell"],
            "repeat": task["repeat"],
            "best_distance": repr(record.hall_of_fame[0][1]),
            "wall_time_s": repr(time.perf_counter() - started),
            "status": "ok",
        }
    except Exception as exc:  # a failed run must not sink the sweep
        return {
            "cell": task["cell"],
            "repeat": task["repeat"],
            "best_distance": "",
            "wall_time_s": repr(time.perf_counter() - started),
            "status": f"error: {exc}",
        }


def cmd_sweep(args: argparse.Namespace) -> int:
    base = _load_effective_config(args.config, args.seed)
    if args.repeats < 1:
        raise ConfigError(f"--repeats must be >= 1, got {args.repeats}")
    axes = _parse_grid(args.grid)
    cells = _grid_cells(axes)
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    if jobs < 1:
        raise ConfigError(f"--jobs must be >= 1, got {jobs}")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    tasks = []
    for cell_index, cell in enumerate(cells):
        label = _cell_label(cell)
        overrides = {_GRID_AXES[key]: value for key, value in cell}
        cell_config = dict(base.to_dict(), **overrides)
        for repeat in range(args.repeats):
            run_index = cell_index * args.repeats + repeat
            seed = derive_child_seed(base.master_seed, run_index)
            cell_config_run = dict(cell_config, master_seed=seed)
            tasks.append(
                {
                    "cell": label,
                    "repeat": repeat,
                    "config": cell_config_run,
                    "seed": seed,
                    "world_seed": args.world_seed,
                    "proxy_dim": args.proxy_dim,
                    "out": str(out_dir / f"{label}_r{repeat:02d}"),
                }
            )

    grid_echo = {key: values for key, values in axes}
    with open(out_dir / "sweep.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                "master_seed": base.master_seed,
                "grid": grid_echo,
                "repeats": args.repeats,
                "base_config": base.to_dict(),
                "world_seed": args.world_seed,
            },
            fh,
            indent=2,
        )
        fh.write("\n")

    if jobs == 1:
        rows = [_sweep_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_task, tasks))

    failures = sum(1 for row in rows if row["status"] != "ok")
    with open(out_dir / "sweep_summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=("cell", "repeat", "best_distance", "wall_time_s", "status")
        )
        writer.writeheader()
        writer.writerows(rows)

    print(f"sweep complete: {len(rows) - failures}/{len(rows)} runs ok, summary={out_dir / 'sweep_summary.csv'}")
    return 0


def _run_ids(paths: list[Path]) -> list[str]:
    names = [p.name for p in paths]
    return names if len(set(names)) == len(names) else [str(p) for p in paths]


def cmd_report(args: argparse.Namespace) -> int:
    run_dirs = [Path(p) for p in args.runs]
    loaded = [read_run(p) for p in run_dirs]
    ids = _run_ids(run_dirs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.emit == "summary":
        best = [run.record.hall_of_fame[0][1] for run in loaded]
        summary = summarize_distances(best)
        header = ["runs", "min", "mean", "std"]
        row = [len(best), repr(summary.min), repr(summary.mean), repr(summary.std)]
        if args.baseline is not None:
            header += ["baseline", "delta_pct"]
            row += [repr(args.baseline), repr(deception_delta(summary.min, args.baseline))]
        target = out_dir / "summary.csv"
        with open(target, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerow(row)
    elif args.emit == "diversity":
        diversity = diversity_matrix([run.best_embedding for run in loaded])
        target = out_dir / "diversity.csv"
        with open(target, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(ids)
            for row_values in diversity.matrix:
                writer.writerow([repr(float(v)) for v in row_values])
        with open(out_dir / "diversity_summary.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["min", "max", "mean", "std"])
            writer.writerow(
                [repr(diversity.min), repr(diversity.max), repr(diversity.mean), repr(diversity.std)]
            )
    else:
        rows = convergence_curves([run.record for run in loaded], run_ids=ids)
        target = out_dir / "curves.csv"
        with open(target, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["generation", "run_id", "best_distance"])
            for generation, run_id, distance in rows:
                writer.writerow([generation, run_id, repr(distance)])

    print(f"report written: {target}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latent-evolve",
        description="Evolve latent vectors so a generator's outputs embed close to a target.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one evolutionary search")
    run_p.add_argument("--config", help="flat JSON file of EvolutionConfig fields")
    run_p.add_argument("--evaluator", choices=("synthetic", "worker"), default="synthetic")
    run_p.add_argument("--worker-cmd", help="command line that starts a model worker")
    run_p.add_argument("--target", help="reference image path (worker evaluator only)")
    run_p.add_argument("--seed", type=int, help="overrides master_seed from the config")
    run_p.add_argument("--world-seed", type=int, default=0, help="synthetic world instance seed")
    run_p.add_argument("--proxy-dim", type=int, help="synthetic proxy dimension (default 2x latent)")
    run_p.add_argument("--out", required=True, help="directory for run artifacts")
    run_p.add_argument("--verbose", action="store_true", help="log per-generation progress")
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="grid of runs over operator probabilities")
    sweep_p.add_argument("--config", help="flat JSON file of EvolutionConfig fields")
    sweep_p.add_argument(
        "--grid",
        required=True,
        help='axes like "pR=0.6,0.75,0.9;pM=0.001,0.01,0.1"',
    )
    sweep_p.add_argument("--repeats", type=int, default=30, help="runs per grid cell")
    sweep_p.add_argument("--seed", type=int, help="master seed for per-run seed derivation")
    sweep_p.add_argument("--world-seed", type=int, default=0, help="synthetic world instance seed")
    sweep_p.add_argument("--proxy-dim", type=int, help="synthetic proxy dimension (default 2x latent)")
    sweep_p.add_argument("--jobs", type=int, help=f"parallel runs (default ${JOBS_ENV_VAR} or 1)")
    sweep_p.add_argument("--out", required=True, help="directory for sweep output")
    sweep_p.set_defaults(func=cmd_sweep)

    report_p = sub.add_parser("report", help="aggregate finished run directories")
    report_p.add_argument("--runs", nargs="+", required=True, help="run directories to aggregate")
    report_p.add_argument("--emit", choices=("summary", "diversity", "curves"), required=True)
    report_p.add_argument("--baseline", type=float, help="baseline distance for deception delta")
    report_p.add_argument("--out", required=True, help="directory for report output")
    report_p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _fail(str(exc))
        return 1
    except (BridgeError, EvaluationError, RunAborted) as exc:
        _fail(str(exc))
        return 2
    except OSError as exc:
        _fail(str(exc))
        return 3
    except ValueError as exc:
        _fail(str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
