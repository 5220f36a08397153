"""Generational evolutionary loop over a latent space.

One generation: tournament selection of a full parent pool, blend crossover
on consecutive pairs, a per-individual mutation gate, then a single batch
evaluation of exactly the genotypes that changed. Replacement is wholesale
(no elitism); the best solutions ever evaluated survive in an external hall
of fame instead.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import EvolutionConfig, Individual, LatentVector, Rng
from .evaluators import BatchEvaluator
from .operators import blx_crossover, gaussian_mutate, init_individual, tournament_select

Observer = Callable[["GenerationStats"], None]


class RunAborted(RuntimeError):
    """Evaluation failed mid-run; carries how far the run got."""

    def __init__(self, message: str, generation: int, stats: list[GenerationStats]):
        super().__init__(message)
        self.generation = generation
        self.stats = stats


@dataclass(frozen=True)
class GenerationStats:
    """Distance statistics of one generation's population.

    Values describe the current population (so best_distance may fluctuate
    between generations); std_distance is the population standard deviation.
    evaluations_so_far counts every evaluator item consumed since the run
    started, including initialization.
    """

    generation: int
    best_distance: float
    mean_distance: float
    std_distance: float
    evaluations_so_far: int


@dataclass
class RunRecord:
    """Everything one run produced, minus wall-clock noise for comparisons."""

    config: EvolutionConfig
    stats: list[GenerationStats]
    hall_of_fame: list[tuple[LatentVector, float]]
    wall_time: float


class HallOfFame:
    """Bounded archive of the best (genotype, distance) pairs ever seen.

    Kept sorted ascending by distance; exact duplicate genotypes are stored
    once. Ties keep insertion order.
    """

    def __init__(self, maxsize: int):
        if maxsize < 1:
            raise ValueError(f"maxsize must be >= 1, got {maxsize}")
        self.maxsize = maxsize
        self._entries: list[tuple[LatentVector, float]] = []

    def update(self, individuals: Sequence[Individual]) -> None:
        for ind in individuals:
            if not ind.evaluated:
                raise ValueError("hall of fame only accepts evaluated individuals")
            self._insert(ind.genotype, ind.distance)

    def _insert(self, genotype: LatentVector, distance: float) -> None:
        if len(self._entries) == self.maxsize and distance >= self._entries[-1][1]:
            return
        for existing, _ in self._entries:
            if np.array_equal(existing.values, genotype.values):
                return
        pos = len(self._entries)
        while pos > 0 and self._entries[pos - 1][1] > distance:
            pos -= 1
        self._entries.insert(pos, (genotype, distance))
        del self._entries[self.maxsize :]

    @property
    def entries(self) -> list[tuple[LatentVector, float]]:
        return list(self._entries)

    def __len__(self) -> int:
        return len(self._entries)


def best_so_far(record: RunRecord) -> tuple[LatentVector, float]:
    """Best solution of a completed run (head of the hall of fame)."""
    if not record.hall_of_fame:
        raise ValueError("run record has an empty hall of fame")
    return record.hall_of_fame[0]


def best_so_far_curve(record: RunRecord) -> np.ndarray:
    """Running minimum of per-generation best distances."""
    if not record.stats:
        raise ValueError("run record has no generation statistics")
    return np.minimum.accumulate([s.best_distance for s in record.stats])


def _population_stats(
    generation: int, population: Sequence[Individual], evaluations: int
) -> GenerationStats:
    distances = np.array([ind.distance for ind in population], dtype=np.float64)
    return GenerationStats(
        generation=generation,
        best_distance=float(distances.min()),
        mean_distance=float(distances.mean()),
        std_distance=float(distances.std()),
        evaluations_so_far=evaluations,
    )


def _evaluate(
    evaluator: BatchEvaluator,
    individuals: Sequence[Individual],
    generation: int,
    stats: list[GenerationStats],
) -> None:
    genotypes = [ind.genotype for ind in individuals]
    try:
        results = evaluator.evaluate_batch(genotypes)
    except Exception as exc:
        raise RunAborted(
            f"evaluation failed at generation {generation} after "
            f"{len(stats)} recorded generations: {exc}",
            generation=generation,
            stats=list(stats),
        ) from exc
    if len(results) != len(individuals):
        raise RunAborted(
            f"evaluator returned {len(results)} results for a batch of "
            f"{len(individuals)} at generation {generation}",
            generation=generation,
            stats=list(stats),
        )
    for ind, (_, distance) in zip(individuals, results):
        ind.set_distance(distance)


def _maybe_replace(individual: Individual, candidate: LatentVector) -> None:
    # Only a value-level change invalidates the cached evaluation; operators
    # that reproduce the genotype exactly (identical parents, empty mutation
    # mask) cost no re-evaluation.
    if not np.array_equal(candidate.values, individual.genotype.values):
        individual.genotype = candidate
        individual.invalidate()


def run_evolution(
    config: EvolutionConfig,
    evaluator: BatchEvaluator,
    rng: Rng,
    observer: Observer | None = None,
) -> RunRecord:
    """Run one full evolutionary search and return its record.

    Per generation the evaluator sees at most one batch call, holding exactly
    the genotypes changed by crossover or mutation. With equal configs and
    equal generator states, two runs produce identical records except for
    wall_time.
    """
    if evaluator.latent_dim != config.latent_dim:
        raise ValueError(
            f"evaluator latent_dim {evaluator.latent_dim} != config latent_dim {config.latent_dim}"
        )
    if evaluator.embedding_dim != config.embedding_dim:
        raise ValueError(
            f"evaluator embedding_dim {evaluator.embedding_dim} != "
            f"config embedding_dim {config.embedding_dim}"
        )

    started = time.perf_counter()
    stats: list[GenerationStats] = []
    hall = HallOfFame(config.hall_of_fame_size)
    evaluations = 0

    population = [
        Individual(init_individual(rng, config.latent_dim))
        for _ in range(config.population_size)
    ]
    _evaluate(evaluator, population, generation=0, stats=stats)
    evaluations += len(population)
    hall.update(population)
    stats.append(_population_stats(0, population, evaluations))
    if observer is not None:
        observer(stats[-1])

    for generation in range(1, config.generations + 1):
        parents = tournament_select(
            rng, population, k=config.tournament_size, count=config.population_size
        )
        offspring = [parent.copy() for parent in parents]

        for i in range(0, config.population_size - 1, 2):
            if rng.random() < config.crossover_prob:
                child_a, child_b = blx_crossover(
                    rng, offspring[i].genotype, offspring[i + 1].genotype, config.blx_alpha
                )
                _maybe_replace(offspring[i], child_a)
                _maybe_replace(offspring[i + 1], child_b)

        for ind in offspring:
            if rng.random() < config.mutation_prob:
                mutated = gaussian_mutate(
                    rng, ind.genotype, config.mutation_sigma, config.per_gene_mutation_rate
                )
                _maybe_replace(ind, mutated)

        changed = [ind for ind in offspring if not ind.evaluated]
        if changed:
            _evaluate(evaluator, changed, generation=generation, stats=stats)
            evaluations += len(changed)
            hall.update(changed)

        population = offspring
        stats.append(_population_stats(generation, population, evaluations))
        if observer is not None:
            observer(stats[-1])

    return RunRecord(
        config=config,
        stats=stats,
        hall_of_fame=hall.entries,
        wall_time=time.perf_counter() - started,
    )
