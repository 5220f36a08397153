"""Synthetic world and the shared evaluator contract."""

from __future__ import annotations

import math

import numpy as np
import pytest

from latent_evolve import (
    Embedding,
    LatentVector,
    SyntheticWorld,
    distance_to_fitness,
    euclidean_distance,
    make_rng,
)


@pytest.fixture()
def world():
    return SyntheticWorld.from_seed(0, latent_dim=32, proxy_dim=64, embedding_dim=16)


def test_distance_to_fitness_is_exact_negation():
    assert distance_to_fitness(0.0) == 0.0
    assert distance_to_fitness(0.350) == -0.350
    assert distance_to_fitness(5.0) == -5.0
    with pytest.raises(ValueError):
        distance_to_fitness(-0.001)
    with pytest.raises(ValueError):
        distance_to_fitness(float("nan"))


def test_raw_distance_three_four_five():
    # Two embeddings differing by 3 and 4 in two components: distance 5.
    a = Embedding([0.0, 0.0, 1.0])
    b = Embedding([3.0, 4.0, 1.0])
    assert euclidean_distance(a, b) == 5.0
    with pytest.raises(ValueError):
        euclidean_distance(a, Embedding([1.0]))


def test_world_construction_is_deterministic():
    w1 = SyntheticWorld.from_seed(5, latent_dim=8, proxy_dim=12, embedding_dim=4)
    w2 = SyntheticWorld.from_seed(5, latent_dim=8, proxy_dim=12, embedding_dim=4)
    assert np.array_equal(w1.generator_matrix, w2.generator_matrix)
    assert np.array_equal(w1.embedder_matrix, w2.embedder_matrix)
    assert w1.hidden_optimum == w2.hidden_optimum
    assert w1.target_embedding == w2.target_embedding
    w3 = SyntheticWorld.from_seed(6, latent_dim=8, proxy_dim=12, embedding_dim=4)
    assert not np.array_equal(w1.generator_matrix, w3.generator_matrix)


def test_generate_matches_plain_loop_oracle():
    world = SyntheticWorld.from_seed(3, latent_dim=4, proxy_dim=3, embedding_dim=2)
    z = LatentVector([0.5, -1.0, 2.0, 0.25])
    produced = world.generate(z)
    for i in range(3):
        acc = 0.0
        for j in range(4):
            acc += world.generator_matrix[i, j] * z.values[j]
        assert produced[i] == pytest.approx(math.tanh(acc), rel=1e-12)


def test_embed_matches_plain_loop_oracle():
    world = SyntheticWorld.from_seed(3, latent_dim=4, proxy_dim=3, embedding_dim=2)
    proxy = np.array([0.3, -0.9, 0.4])
    produced = world.embed(proxy)
    raw = []
    for i in range(2):
        acc = 0.0
        for j in range(3):
            acc += world.embedder_matrix[i, j] * proxy[j]
        raw.append(acc)
    norm = math.sqrt(sum(v * v for v in raw))
    for i in range(2):
        assert produced.values[i] == pytest.approx(raw[i] / norm, rel=1e-12)


def test_generate_output_is_bounded(world):
    rng = make_rng(1)
    for _ in range(20):
        proxy = world.generate(LatentVector(rng.standard_normal(32) * 5))
        assert np.all(np.abs(proxy) <= 1.0)


def test_embeddings_are_unit_norm_or_zero(world):
    rng = make_rng(2)
    for _ in range(50):
        emb, _ = world.evaluate_batch([LatentVector(rng.standard_normal(32))])[0]
        assert abs(np.linalg.norm(emb.values) - 1.0) <= 1e-9
    zero = world.embed(np.zeros(world.proxy_dim))
    assert np.all(zero.values == 0.0)


def test_planted_optimum_has_distance_zero(world):
    ((embedding, distance),) = world.evaluate_batch([world.hidden_optimum])
    assert distance <= 1e-9
    assert embedding == world.target_embedding


def test_distances_are_bounded_by_unit_sphere_diameter(world):
    rng = make_rng(4)
    batch = [LatentVector(rng.standard_normal(32) * 4) for _ in range(200)]
    for _, distance in world.evaluate_batch(batch):
        assert 0.0 <= distance <= 2.0


def test_batch_matches_single_evaluation_exactly(world):
    rng = make_rng(5)
    batch = [LatentVector(rng.standard_normal(32)) for _ in range(64)]
    together = world.evaluate_batch(batch)
    for z, (embedding, distance) in zip(batch, together):
        ((solo_embedding, solo_distance),) = world.evaluate_batch([z])
        assert solo_embedding == embedding
        assert solo_distance == distance


def test_batch_is_order_preserving_under_permutation(world):
    rng = make_rng(6)
    batch = [LatentVector(rng.standard_normal(32)) for _ in range(32)]
    baseline = {i: world.evaluate_batch([z])[0][1] for i, z in enumerate(batch)}
    order = rng.permutation(32)
    shuffled = [batch[i] for i in order]
    results = world.evaluate_batch(shuffled)
    for position, original_index in enumerate(order):
        assert results[position][1] == baseline[int(original_index)]


def test_batch_validation(world):
    with pytest.raises(ValueError):
        world.evaluate_batch([])
    bad = [LatentVector(np.zeros(32)), LatentVector(np.zeros(7))]
    with pytest.raises(ValueError, match="index 1"):
        world.evaluate_batch(bad)


def test_world_rejects_degenerate_dimensions():
    with pytest.raises(ValueError):
        SyntheticWorld.from_seed(0, latent_dim=0)


def test_describe_names_the_instance(world):
    descriptor = world.describe()
    assert descriptor["kind"] == "synthetic"
    assert descriptor["seed"] == 0
    assert descriptor["latent_dim"] == 32
