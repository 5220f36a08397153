"""Selection and variation operators for real-valued genotypes.

All operators are pure: results depend only on their arguments and on draws
taken from the generator passed in, never on hidden state. Genes are never
clamped; the latent prior tolerates values outside its typical range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Individual, LatentVector, Rng


@dataclass(frozen=True)
class OperatorParams:
    """Knobs consumed by the variation operators."""

    blx_alpha: float = 0.2
    mutation_sigma: float = 1.0
    per_gene_mutation_rate: float = 0.05
    tournament_size: int = 3

    def __post_init__(self):
        if self.blx_alpha < 0.0:
            raise ValueError(f"blx_alpha must be non-negative, got {self.blx_alpha!r}")
        if self.mutation_sigma <= 0.0:
            raise ValueError(f"mutation_sigma must be positive, got {self.mutation_sigma!r}")
        if not 0.0 <= self.per_gene_mutation_rate <= 1.0:
            raise ValueError(
                f"per_gene_mutation_rate must be in [0, 1], got {self.per_gene_mutation_rate!r}"
            )
        if self.tournament_size < 1:
            raise ValueError(f"tournament_size must be >= 1, got {self.tournament_size!r}")


def init_individual(rng: Rng, latent_dim: int) -> LatentVector:
    """Sample a fresh genotype with iid standard normal genes."""
    if latent_dim < 1:
        raise ValueError(f"latent_dim must be >= 1, got {latent_dim}")
    return LatentVector(rng.standard_normal(latent_dim))


def tournament_select(rng: Rng, population: list[Individual], k: int, count: int) -> list[Individual]:
    """Select `count` individuals by independent k-tournaments.

    Each tournament draws k competitors uniformly with replacement and keeps
    the one with maximum fitness; on exact ties the earliest-drawn competitor
    wins. Every individual must already be evaluated.
    """
    n = len(population)
    if n == 0:
        raise ValueError("population must be non-empty")
    if not 1 <= k <= n:
        raise ValueError(f"tournament size k={k} must be in [1, {n}]")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    fitness = np.empty(n, dtype=np.float64)
    for i, ind in enumerate(population):
        if not ind.evaluated:
            raise ValueError(f"individual at index {i} has no fitness; evaluate before selecting")
        fitness[i] = ind.fitness
    draws = rng.integers(0, n, size=(count, k))
    # argmax returns the first maximal column, which is the earliest draw.
    winner_cols = np.argmax(fitness[draws], axis=1)
    winners = draws[np.arange(count), winner_cols]
    return [population[int(i)] for i in winners]


def blx_crossover(
    rng: Rng, parent_a: LatentVector, parent_b: LatentVector, alpha: float
) -> tuple[LatentVector, LatentVector]:
    """Blend crossover: two children drawn per gene from the extended parent span.

    For each gene with parent values spanning [lo, hi] and width w = hi - lo,
    both children sample independently and uniformly from
    [lo - alpha * w, hi + alpha * w]. Identical parents reproduce exactly.
    """
    if alpha < 0.0:
        raise ValueError(f"alpha must be non-negative, got {alpha!r}")
    a, b = parent_a.values, parent_b.values
    if a.size != b.size:
        raise ValueError(f"parent genotypes differ in length: {a.size} != {b.size}")
    width = np.abs(a - b) * alpha
    low = np.minimum(a, b) - width
    high = np.maximum(a, b) + width
    child_a = rng.uniform(low, high)
    child_b = rng.uniform(low, high)
    return LatentVector(child_a), LatentVector(child_b)


def gaussian_mutate(
    rng: Rng, genotype: LatentVector, sigma: float, per_gene_rate: float
) -> LatentVector:
    """Add N(0, sigma^2) noise to each gene independently with probability per_gene_rate.

    A rate of 0 returns the genotype bit-for-bit unchanged (the gene mask is
    still drawn, keeping the stream position independent of outcomes).
    """
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    if not 0.0 <= per_gene_rate <= 1.0:
        raise ValueError(f"per_gene_rate must be in [0, 1], got {per_gene_rate!r}")
    genes = genotype.values.copy()
    mask = rng.random(genes.size) < per_gene_rate
    hits = int(mask.sum())
    if hits:
        genes[mask] += sigma * rng.standard_normal(hits)
    return LatentVector(genes)
