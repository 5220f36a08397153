"""Selection and variation operator contracts."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from scipy import stats as scipy_stats

from latent_evolve import (
    Individual,
    LatentVector,
    OperatorParams,
    blx_crossover,
    gaussian_mutate,
    init_individual,
    make_rng,
    tournament_select,
)


def _population(fitnesses):
    pop = []
    for f in fitnesses:
        ind = Individual(LatentVector([float(f)]))
        ind.set_distance(-float(f))  # fitness is -distance
        pop.append(ind)
    return pop


def enumerate_tournament_probs(fitness, k):
    """Independent oracle: exact win probabilities by enumerating all k-draws."""
    n = len(fitness)
    counts = [0] * n
    for draw in itertools.product(range(n), repeat=k):
        best = draw[0]
        for idx in draw[1:]:
            if fitness[idx] > fitness[best]:
                best = idx
        counts[best] += 1
    return [c / n**k for c in counts]


def test_operator_params_validation():
    OperatorParams()
    with pytest.raises(ValueError):
        OperatorParams(blx_alpha=-0.1)
    with pytest.raises(ValueError):
        OperatorParams(mutation_sigma=0.0)
    with pytest.raises(ValueError):
        OperatorParams(per_gene_mutation_rate=1.5)
    with pytest.raises(ValueError):
        OperatorParams(tournament_size=0)


def test_init_individual_length_and_purity():
    rng = make_rng(3)
    vec = init_individual(rng, 512)
    assert len(vec) == 512
    assert init_individual(make_rng(3), 512) == init_individual(make_rng(3), 512)
    with pytest.raises(ValueError):
        init_individual(rng, 0)


def test_init_individual_moments():
    # 1000 individuals of 512 genes pooled; loose LLN bounds.
    rng = make_rng(17)
    genes = np.concatenate([init_individual(rng, 512).values for _ in range(1000)])
    assert abs(genes.mean()) <= 0.01
    assert abs(genes.var() - 1.0) <= 0.02


def test_tournament_single_individual_population():
    pop = _population([-1.0])
    winners = tournament_select(make_rng(0), pop, k=1, count=5)
    assert all(w is pop[0] for w in winners)


def test_tournament_rejects_unevaluated_individuals():
    pop = _population([-1.0, -2.0])
    pop[1].invalidate()
    with pytest.raises(ValueError, match="index 1"):
        tournament_select(make_rng(0), pop, k=2, count=1)


def test_tournament_rejects_oversized_k():
    pop = _population([-1.0, -2.0])
    with pytest.raises(ValueError):
        tournament_select(make_rng(0), pop, k=3, count=1)


def test_tournament_all_equal_fitness_is_legal():
    pop = _population([-1.0, -1.0, -1.0])
    winners = tournament_select(make_rng(5), pop, k=3, count=100)
    assert all(w in pop for w in winners)


def test_tournament_frequencies_match_analytic_rank_probabilities():
    # Fitness {-1..-200}: win probability of rank r (1 = best) among 3
    # replacement draws is ((n-r+1)^3 - (n-r)^3) / n^3.
    n = 200
    pop = _population([-(r + 1) for r in range(n)])
    winners = tournament_select(make_rng(31), pop, k=3, count=100_000)
    counts = np.zeros(n)
    index_of = {id(ind): i for i, ind in enumerate(pop)}
    for w in winners:
        counts[index_of[id(w)]] += 1
    frequencies = counts / len(winners)
    analytic = np.array([((n - r + 1) ** 3 - (n - r) ** 3) / n**3 for r in range(1, n + 1)])
    assert np.max(np.abs(frequencies - analytic)) <= 0.01


def test_tournament_frequencies_match_enumeration_with_ties():
    fitness = [-1.0, -1.0, -2.0, -3.0, -3.0, -4.0]
    pop = _population(fitness)
    exact = enumerate_tournament_probs(fitness, k=3)
    winners = tournament_select(make_rng(8), pop, k=3, count=100_000)
    counts = np.zeros(len(pop))
    index_of = {id(ind): i for i, ind in enumerate(pop)}
    for w in winners:
        counts[index_of[id(w)]] += 1
    assert np.max(np.abs(counts / len(winners) - np.array(exact))) <= 0.01


def test_tournament_monotonicity_under_fitness_raises():
    # Raising one individual's fitness never lowers its exact win probability.
    rng = np.random.default_rng(44)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        fitness = list(rng.integers(-5, 0, size=n).astype(float))
        k = int(rng.integers(1, n + 1))
        baseline = enumerate_tournament_probs(fitness, k)
        target = int(rng.integers(0, n))
        raised = list(fitness)
        raised[target] += float(rng.integers(1, 4))
        boosted = enumerate_tournament_probs(raised, k)
        assert boosted[target] >= baseline[target]


def test_blx_identical_parents_reproduce_exactly():
    parent = LatentVector([0.5, -1.25, 3.0])
    child_a, child_b = blx_crossover(make_rng(1), parent, parent, alpha=0.2)
    assert child_a == parent
    assert child_b == parent


def test_blx_zero_alpha_contains_children_in_parent_span():
    rng = make_rng(2)
    p1 = LatentVector(np.zeros(64))
    p2 = LatentVector(np.ones(64))
    for _ in range(200):
        a, b = blx_crossover(rng, p1, p2, alpha=0.0)
        for child in (a, b):
            assert np.all(child.values >= 0.0) and np.all(child.values <= 1.0)


def test_blx_containment_in_extended_interval():
    rng = make_rng(9)
    for _ in range(50):
        p1 = LatentVector(rng.standard_normal(128) * 3)
        p2 = LatentVector(rng.standard_normal(128) * 3)
        width = np.abs(p1.values - p2.values)
        low = np.minimum(p1.values, p2.values) - 0.2 * width
        high = np.maximum(p1.values, p2.values) + 0.2 * width
        for child in blx_crossover(rng, p1, p2, alpha=0.2):
            assert np.all(child.values >= low) and np.all(child.values <= high)


def test_blx_gene_distribution_is_uniform_on_extended_interval():
    # Parents (-2, 3) with alpha 0.2 span [-3, 4]; genes are iid, so one wide
    # crossover gives 1e5 samples of the per-gene law.
    dim = 100_000
    p1 = LatentVector(np.full(dim, -2.0))
    p2 = LatentVector(np.full(dim, 3.0))
    child, _ = blx_crossover(make_rng(12), p1, p2, alpha=0.2)
    assert child.values.min() >= -3.0 and child.values.max() <= 4.0
    result = scipy_stats.kstest(child.values, scipy_stats.uniform(loc=-3.0, scale=7.0).cdf)
    assert result.pvalue > 0.01


def test_blx_is_symmetric_in_parent_order():
    p1 = LatentVector([0.0, 2.0, -1.0, 5.0])
    p2 = LatentVector([1.0, -2.0, -1.0, 4.0])
    assert blx_crossover(make_rng(77), p1, p2, 0.2) == blx_crossover(make_rng(77), p2, p1, 0.2)


def test_blx_rejects_mismatched_parents():
    with pytest.raises(ValueError):
        blx_crossover(make_rng(0), LatentVector([1.0]), LatentVector([1.0, 2.0]), 0.2)
    with pytest.raises(ValueError):
        blx_crossover(make_rng(0), LatentVector([1.0]), LatentVector([1.0]), -0.5)


def test_mutation_rate_zero_is_identity():
    genotype = LatentVector(np.linspace(-3, 3, 50))
    mutated = gaussian_mutate(make_rng(4), genotype, sigma=1.0, per_gene_rate=0.0)
    assert mutated == genotype


def test_mutation_rate_one_changes_distribution():
    # All genes of a zero genotype mutate: outcomes are N(0, sigma^2).
    genotype = LatentVector(np.zeros(100_000))
    mutated = gaussian_mutate(make_rng(21), genotype, sigma=2.0, per_gene_rate=1.0)
    assert abs(mutated.values.mean()) <= 0.05
    assert abs(mutated.values.std() - 2.0) <= 0.05


def test_mutation_flips_expected_gene_count():
    # rate 0.05 over 512 genes: binomial mean 25.6 changed genes.
    rng = make_rng(30)
    genotype = LatentVector(np.zeros(512))
    changed = [
        int(np.sum(gaussian_mutate(rng, genotype, 1.0, 0.05).values != 0.0))
        for _ in range(10_000)
    ]
    assert abs(np.mean(changed) - 25.6) <= 1.0


def test_mutation_preserves_length_and_finiteness():
    rng = make_rng(6)
    genotype = LatentVector(rng.standard_normal(64))
    mutated = gaussian_mutate(rng, genotype, sigma=1.0, per_gene_rate=0.5)
    assert len(mutated) == 64
    assert np.all(np.isfinite(mutated.values))


def test_mutation_parameter_validation():
    genotype = LatentVector([0.0])
    with pytest.raises(ValueError):
        gaussian_mutate(make_rng(0), genotype, sigma=0.0, per_gene_rate=0.1)
    with pytest.raises(ValueError):
        gaussian_mutate(make_rng(0), genotype, sigma=1.0, per_gene_rate=1.0001)


def test_operators_do_not_touch_global_state():
    before = np.random.get_state()[1].copy()
    rng = make_rng(123)
    p = init_individual(rng, 16)
    blx_crossover(rng, p, p, 0.2)
    gaussian_mutate(rng, p, 1.0, 0.05)
    after = np.random.get_state()[1].copy()
    assert np.array_equal(before, after)
