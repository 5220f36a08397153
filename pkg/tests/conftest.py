"""Shared test helpers: instrumented evaluators and small builders."""

from __future__ import annotations

from typing import Sequence

from latent_evolve import BatchEvaluator, Embedding, EvolutionConfig, LatentVector, SyntheticWorld


class CountingEvaluator(BatchEvaluator):
    """Wraps an evaluator, recording batch calls, item counts, and results."""

    def __init__(self, inner: BatchEvaluator):
        self.inner = inner
        self.latent_dim = inner.latent_dim
        self.embedding_dim = inner.embedding_dim
        self.batch_calls = 0
        self.items = 0
        self.log: list[tuple[LatentVector, float]] = []

    @property
    def target_embedding(self) -> Embedding:
        return self.inner.target_embedding

    def evaluate_batch(self, batch: Sequence[LatentVector]):
        self.batch_calls += 1
        self.items += len(batch)
        results = self.inner.evaluate_batch(batch)
        self.log.extend((z, d) for z, (_, d) in zip(batch, results))
        return results

    def describe(self) -> dict:
        return self.inner.describe()


class FailingEvaluator(BatchEvaluator):
    """Delegates until a chosen batch call, then raises."""

    def __init__(self, inner: BatchEvaluator, fail_on_call: int):
        self.inner = inner
        self.latent_dim = inner.latent_dim
        self.embedding_dim = inner.embedding_dim
        self.fail_on_call = fail_on_call
        self.calls = 0

    @property
    def target_embedding(self) -> Embedding:
        return self.inner.target_embedding

    def evaluate_batch(self, batch: Sequence[LatentVector]):
        self.calls += 1
        if self.calls >= self.fail_on_call:
            raise RuntimeError("simulated backend outage")
        return self.inner.evaluate_batch(batch)

    def describe(self) -> dict:
        return self.inner.describe()


def small_world(seed: int = 0) -> SyntheticWorld:
    return SyntheticWorld.from_seed(seed, latent_dim=8, proxy_dim=12, embedding_dim=6)


def small_config(**overrides) -> EvolutionConfig:
    base = dict(
        latent_dim=8,
        embedding_dim=6,
        population_size=20,
        generations=10,
        crossover_prob=0.75,
        mutation_prob=0.05,
        hall_of_fame_size=5,
        master_seed=11,
    )
    base.update(overrides)
    return EvolutionConfig(**base)
