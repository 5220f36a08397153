"""Run directory layout: what a finished run leaves on disk.

Each run directory holds meta.json (config echo, seed, evaluator descriptor,
wall time), stats.csv (one row per recorded generation), best_latent.json and
best_embedding.json (bare arrays), and hall_of_fame.json. Every file is
deterministic for a fixed seed and config except the wall time inside
meta.json; floats are serialized with shortest round-trip precision so the
reader reproduces the run record exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .core import Embedding, LatentVector, config_from_dict
from .engine import GenerationStats, RunRecord

META_FILE = "meta.json"
STATS_FILE = "stats.csv"
BEST_LATENT_FILE = "best_latent.json"
BEST_EMBEDDING_FILE = "best_embedding.json"
HALL_OF_FAME_FILE = "hall_of_fame.json"

_STATS_COLUMNS = (
    "generation",
    "best_distance",
    "mean_distance",
    "std_distance",
    "evaluations_so_far",
)


class ArtifactError(OSError):
    """A run directory is missing artifacts or holds ones that do not parse."""


@dataclass
class LoadedRun:
    """A run read back from disk."""

    path: Path
    seed: int
    evaluator: dict
    record: RunRecord
    best_embedding: Embedding


def write_run_artifacts(
    directory: str | Path,
    record: RunRecord,
    seed: int,
    evaluator_descriptor: dict,
    best_embedding: Embedding,
) -> Path:
    """Persist one run record into `directory` (created if needed)."""
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    if not record.hall_of_fame:
        raise ValueError("cannot persist a run with an empty hall of fame")
    best_latent, _ = record.hall_of_fame[0]

    meta = {
        "seed": int(seed),
        "config": record.config.to_dict(),
        "evaluator": evaluator_descriptor,
        "wall_time_s": record.wall_time,
    }
    _dump_json(path / META_FILE, meta, indent=2)
    _dump_json(path / BEST_LATENT_FILE, best_latent.to_list())
    _dump_json(path / BEST_EMBEDDING_FILE, best_embedding.to_list())
    _dump_json(
        path / HALL_OF_FAME_FILE,
        [{"distance": dist, "latent": vec.to_list()} for vec, dist in record.hall_of_fame],
    )

    with open(path / STATS_FILE, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_STATS_COLUMNS)
        for entry in record.stats:
            writer.writerow(
                [
                    entry.generation,
                    repr(entry.best_distance),
                    repr(entry.mean_distance),
                    repr(entry.std_distance),
                    entry.evaluations_so_far,
                ]
            )
    return path


def _dump_json(path: Path, payload, indent: int | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=indent)
        fh.write("\n")


def _load_json(run_dir: Path, name: str):
    target = run_dir / name
    try:
        with open(target, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ArtifactError(f"run directory {run_dir} is missing {name}") from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"run directory {run_dir} has a corrupt {name}: {exc}") from exc


def read_run(directory: str | Path) -> LoadedRun:
    """Read one run directory back into memory, validating as it goes."""
    run_dir = Path(directory)
    if not run_dir.is_dir():
        raise ArtifactError(f"run directory {run_dir} does not exist")

    meta = _load_json(run_dir, META_FILE)
    try:
        config = config_from_dict(meta["config"])
        seed = int(meta["seed"])
        evaluator = dict(meta["evaluator"])
        wall_time = float(meta["wall_time_s"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"run directory {run_dir} has an invalid {META_FILE}: {exc}") from exc

    stats = _read_stats(run_dir)
    hall = _read_hall_of_fame(run_dir, config.latent_dim)
    best_embedding_raw = _load_json(run_dir, BEST_EMBEDDING_FILE)
    best_latent_raw = _load_json(run_dir, BEST_LATENT_FILE)
    try:
        best_embedding = Embedding(best_embedding_raw, dim=config.embedding_dim)
        best_latent = LatentVector(best_latent_raw, dim=config.latent_dim)
    except ValueError as exc:
        raise ArtifactError(f"run directory {run_dir} has a malformed best solution: {exc}") from exc
    if not hall or best_latent != hall[0][0]:
        raise ArtifactError(
            f"run directory {run_dir}: {BEST_LATENT_FILE} does not match the hall of fame head"
        )

    record = RunRecord(config=config, stats=stats, hall_of_fame=hall, wall_time=wall_time)
    return LoadedRun(
        path=run_dir, seed=seed, evaluator=evaluator, record=record, best_embedding=best_embedding
    )


def _read_stats(run_dir: Path) -> list[GenerationStats]:
    target = run_dir / STATS_FILE
    try:
        with open(target, "r", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if tuple(header or ()) != _STATS_COLUMNS:
                raise ArtifactError(f"run directory {run_dir} has an unexpected {STATS_FILE} header")
            stats = []
            for row in reader:
                stats.append(
                    GenerationStats(
                        generation=int(row[0]),
                        best_distance=float(row[1]),
                        mean_distance=float(row[2]),
                        std_distance=float(row[3]),
                        evaluations_so_far=int(row[4]),
                    )
                )
    except FileNotFoundError as exc:
        raise ArtifactError(f"run directory {run_dir} is missing {STATS_FILE}") from exc
    except (OSError, ValueError, IndexError) as exc:
        raise ArtifactError(f"run directory {run_dir} has a corrupt {STATS_FILE}: {exc}") from exc
    if not stats:
        raise ArtifactError(f"run directory {run_dir} has an empty {STATS_FILE}")
    return stats


def _read_hall_of_fame(run_dir: Path, latent_dim: int) -> list[tuple[LatentVector, float]]:
    raw = _load_json(run_dir, HALL_OF_FAME_FILE)
    if not isinstance(raw, list) or not raw:
        raise ArtifactError(f"run directory {run_dir} has an empty {HALL_OF_FAME_FILE}")
    hall = []
    try:
        for entry in raw:
            hall.append((LatentVector(entry["latent"], dim=latent_dim), float(entry["distance"])))
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(
            f"run directory {run_dir} has a malformed {HALL_OF_FAME_FILE}: {exc}"
        ) from exc
    distances = [d for _, d in hall]
    if distances != sorted(distances):
        raise ArtifactError(f"run directory {run_dir}: hall of fame is not sorted by distance")
    return hall
