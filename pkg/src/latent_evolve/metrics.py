"""Aggregation of run results: distance summaries, deception deltas,
solution diversity, and convergence curves.

Formatting helpers render table rows like "0.350 & 0.453 ± 0.041" and parse
them back, so published-style rows round-trip exactly at the chosen number
of decimals.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Embedding
from .engine import RunRecord
from .evaluators import euclidean_distance


@dataclass(frozen=True)
class DistanceSummary:
    """Min / mean / sample standard deviation of a set of distances."""

    min: float
    mean: float
    std: float


@dataclass(frozen=True)
class DiversityMatrix:
    """Pairwise distances between solutions plus off-diagonal statistics."""

    matrix: np.ndarray
    min: float
    max: float
    mean: float
    std: float


def summarize_distances(values: Sequence[float]) -> DistanceSummary:
    """Summarize best-distance samples; std uses the n-1 (sample) denominator.

    A single sample has zero spread by convention.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty set of distances")
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return DistanceSummary(min=float(arr.min()), mean=float(arr.mean()), std=std)


def deception_delta(target_vs_fake: float, baseline: float) -> float:
    """Percentage reduction of the evolved distance relative to a baseline.

    Returns 100 * (baseline - target_vs_fake) / baseline; positive when the
    evolved solution sits closer to the target than the baseline pair does.
    """
    if baseline <= 0.0:
        raise ValueError(f"baseline distance must be positive, got {baseline!r}")
    return 100.0 * (baseline - target_vs_fake) / baseline


def diversity_matrix(embeddings: Sequence[Embedding]) -> DiversityMatrix:
    """Pairwise Euclidean distances between solution embeddings.

    Statistics are computed over the unordered off-diagonal pairs (i < j),
    with the sample (n-1) standard deviation.
    """
    n = len(embeddings)
    if n < 2:
        raise ValueError(f"diversity needs at least 2 embeddings, got {n}")
    dim = len(embeddings[0])
    for i, emb in enumerate(embeddings):
        if len(emb) != dim:
            raise ValueError(f"embedding at index {i} has length {len(emb)}, expected {dim}")
    matrix = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            d = euclidean_distance(embeddings[i], embeddings[j])
            matrix[i, j] = d
            matrix[j, i] = d
    matrix.setflags(write=False)
    upper = matrix[np.triu_indices(n, k=1)]
    std = float(np.std(upper, ddof=1)) if upper.size > 1 else 0.0
    return DiversityMatrix(
        matrix=matrix,
        min=float(upper.min()),
        max=float(upper.max()),
        mean=float(upper.mean()),
        std=std,
    )


def convergence_curves(
    records: Sequence[RunRecord], run_ids: Sequence[str] | None = None
) -> list[tuple[int, str, float]]:
    """Long-format table of (generation, run_id, best_distance) rows.

    All records must share a configuration apart from master_seed. Rows are
    ordered run by run, generation ascending; each run contributes one row
    per recorded generation (including generation zero).
    """
    if not records:
        raise ValueError("no run records given")
    if run_ids is None:
        run_ids = [str(i) for i in range(len(records))]
    if len(run_ids) != len(records):
        raise ValueError(f"got {len(run_ids)} run ids for {len(records)} records")
    reference = dataclasses.replace(records[0].config, master_seed=0)
    for i, record in enumerate(records):
        if dataclasses.replace(record.config, master_seed=0) != reference:
            raise ValueError(f"record {i} was produced under a different configuration")
    rows: list[tuple[int, str, float]] = []
    for run_id, record in zip(run_ids, records):
        for entry in record.stats:
            rows.append((entry.generation, str(run_id), entry.best_distance))
    return rows


def format_distance_summary(summary: DistanceSummary, decimals: int = 3) -> str:
    """Render a summary as a table row: "0.350 & 0.453 ± 0.041"."""
    return (
        f"{summary.min:.{decimals}f} & "
        f"{summary.mean:.{decimals}f} ± {summary.std:.{decimals}f}"
    )


def parse_distance_summary(text: str) -> DistanceSummary:
    """Inverse of format_distance_summary (at its printed precision)."""
    match = re.fullmatch(
        r"\s*([\d.+-eE]+)\s*&\s*([\d.+-eE]+)\s*±\s*([\d.+-eE]+)\s*", text
    )
    if match is None:
        raise ValueError(f"not a distance summary row: {text!r}")
    lo, mean, std = (float(g) for g in match.groups())
    return DistanceSummary(min=lo, mean=mean, std=std)


def format_diversity_summary(diversity: DiversityMatrix, decimals: int = 3) -> str:
    """Render diversity statistics as "0.482 & 0.865 & 0.645 ± 0.099"."""
    return (
        f"{diversity.min:.{decimals}f} & {diversity.max:.{decimals}f} & "
        f"{diversity.mean:.{decimals}f} ± {diversity.std:.{decimals}f}"
    )


def parse_diversity_summary(text: str) -> tuple[float, float, float, float]:
    """Inverse of format_diversity_summary; returns (min, max, mean, std)."""
    match = re.fullmatch(
        r"\s*([\d.+-eE]+)\s*&\s*([\d.+-eE]+)\s*&\s*([\d.+-eE]+)\s*±\s*([\d.+-eE]+)\s*",
        text,
    )
    if match is None:
        raise ValueError(f"not a diversity summary row: {text!r}")
    lo, hi, mean, std = (float(g) for g in match.groups())
    return (lo, hi, mean, std)
