"""Batch evaluators: the shared contract plus a self-contained synthetic world.

An evaluator maps a batch of latent vectors to (embedding, distance) pairs,
where distance is the Euclidean distance between the produced embedding and
the evaluator's target embedding. Batches are order-preserving and each item
is computed independently, so evaluating a batch is exactly equivalent to
evaluating its items one at a time.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Embedding, LatentVector, Rng, make_rng


class EvaluationError(RuntimeError):
    """Raised when an evaluator cannot produce results for a batch."""


def euclidean_distance(a: Embedding, b: Embedding) -> float:
    """Plain Euclidean distance between two embeddings (no normalization)."""
    if len(a) != len(b):
        raise ValueError(f"embeddings differ in length: {len(a)} != {len(b)}")
    return float(np.linalg.norm(a.values - b.values))


def distance_to_fitness(distance: float) -> float:
    """Fitness is the exact negation of a non-negative distance."""
    d = float(distance)
    if not np.isfinite(d) or d < 0.0:
        raise ValueError(f"distance must be a finite non-negative real, got {distance!r}")
    return -d


class BatchEvaluator(ABC):
    """Contract every evaluator backend implements.

    Concrete evaluators expose `latent_dim`, `embedding_dim`, and
    `target_embedding` attributes in addition to the methods below.
    """

    latent_dim: int
    embedding_dim: int

    @property
    @abstractmethod
    def target_embedding(self) -> Embedding:
        """Target the search is steering toward; must be set before evaluating."""

    @abstractmethod
    def evaluate_batch(
        self, batch: Sequence[LatentVector]
    ) -> list[tuple[Embedding, float]]:
        """Evaluate a non-empty batch, item i of the result matching batch[i]."""

    @abstractmethod
    def describe(self) -> dict:
        """JSON-compatible descriptor for run metadata."""

    def _check_batch(self, batch: Sequence[LatentVector]) -> None:
        if len(batch) == 0:
            raise ValueError("batch must be non-empty")
        for i, z in enumerate(batch):
            if len(z) != self.latent_dim:
                raise ValueError(
                    f"latent at index {i} has length {len(z)}, expected {self.latent_dim}"
                )


@dataclass(frozen=True, eq=False)
class SyntheticWorld(BatchEvaluator):
    """Deterministic stand-in for the generator + embedder pair.

    A fixed random linear map followed by tanh plays the generator; a second
    fixed linear map followed by unit normalization plays the embedder. The
    target is the embedding of a planted optimum, so the global minimum
    distance is exactly zero and is known in advance.
    """

    seed: int
    latent_dim: int
    proxy_dim: int
    embedding_dim: int
    generator_matrix: np.ndarray
    embedder_matrix: np.ndarray
    hidden_optimum: LatentVector
    _target: Embedding

    @classmethod
    def from_seed(
        cls, seed: int, latent_dim: int = 32, proxy_dim: int = 64, embedding_dim: int = 16
    ) -> SyntheticWorld:
        """Build a world deterministically from a seed and dimensions.

        Draw order from the seeded generator: generator matrix (row-major),
        embedder matrix (row-major), then the planted optimum.
        """
        for name, dim in (("latent_dim", latent_dim), ("proxy_dim", proxy_dim),
                          ("embedding_dim", embedding_dim)):
            if dim < 1:
                raise ValueError(f"{name} must be >= 1, got {dim}")
        rng = make_rng(seed)
        gen = rng.standard_normal((proxy_dim, latent_dim)) / np.sqrt(latent_dim)
        emb = rng.standard_normal((embedding_dim, proxy_dim)) / np.sqrt(proxy_dim)
        gen.setflags(write=False)
        emb.setflags(write=False)
        optimum = LatentVector(rng.standard_normal(latent_dim))
        world = cls(
            seed=int(seed),
            latent_dim=latent_dim,
            proxy_dim=proxy_dim,
            embedding_dim=embedding_dim,
            generator_matrix=gen,
            embedder_matrix=emb,
            hidden_optimum=optimum,
            _target=None,  # type: ignore[arg-type]
        )
        target = world.embed(world.generate(optimum))
        object.__setattr__(world, "_target", target)
        return world

    @property
    def target_embedding(self) -> Embedding:
        return self._target

    def generate(self, latent: LatentVector) -> np.ndarray:
        """Map a latent to proxy-image space: tanh of a fixed linear map."""
        if len(latent) != self.latent_dim:
            raise ValueError(f"latent has length {len(latent)}, expected {self.latent_dim}")
        return np.tanh(self.generator_matrix @ latent.values)

    def embed(self, proxy: np.ndarray) -> Embedding:
        """Map proxy-image space to the unit sphere (zero maps to zero)."""
        proxy = np.asarray(proxy, dtype=np.float64)
        if proxy.shape != (self.proxy_dim,):
            raise ValueError(f"proxy has shape {proxy.shape}, expected ({self.proxy_dim},)")
        raw = self.embedder_matrix @ proxy
        norm = np.linalg.norm(raw)
        if norm == 0.0:
            return Embedding(np.zeros(self.embedding_dim))
        return Embedding(raw / norm)

    def evaluate_batch(
        self, batch: Sequence[LatentVector]
    ) -> list[tuple[Embedding, float]]:
        self._check_batch(batch)
        results = []
        for z in batch:
            embedding = self.embed(self.generate(z))
            results.append((embedding, euclidean_distance(embedding, self._target)))
        return results

    def describe(self) -> dict:
        return {
            "kind": "synthetic",
            "seed": self.seed,
            "latent_dim": self.latent_dim,
            "proxy_dim": self.proxy_dim,
            "embedding_dim": self.embedding_dim,
        }
