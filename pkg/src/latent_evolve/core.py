"""Core domain types, deterministic RNG helpers, and run configuration."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_MASK64 = (1 << 64) - 1

# All randomness flows through explicitly passed generators; nothing in this
# package touches numpy's (or Python's) global random state.
Rng = np.random.Generator


class ConfigError(ValueError):
    """Raised for an invalid or unparseable run configuration."""


def make_rng(seed: int) -> Rng:
    """Build a deterministic generator (PCG64) from a 64-bit unsigned seed."""
    if not 0 <= int(seed) <= _MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def derive_child_seed(master_seed: int, run_index: int) -> int:
    """Derive an independent per-run seed from a master seed and run index.

    Applies the SplitMix64 finalizer to ``master_seed + run_index`` (mod 2**64).
    The finalizer is a bijection on 64-bit integers, so distinct run indices
    always map to distinct child seeds for a fixed master seed. Pure function:
    no RNG state is consumed.
    """
    if not 0 <= int(master_seed) <= _MASK64:
        raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed!r}")
    if run_index < 0:
        raise ValueError(f"run_index must be non-negative, got {run_index}")
    z = (int(master_seed) + int(run_index)) & _MASK64
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def sample_standard_normal(rng: Rng) -> float:
    """One N(0, 1) draw from `rng` (numpy's ziggurat transform, stable per version)."""
    return float(rng.standard_normal())


class _FiniteVector:
    """1-D array of finite floats, read-only after construction."""

    __slots__ = ("values",)

    def __init__(self, values, dim: int | None = None):
        arr = np.array(values, dtype=np.float64)
        name = type(self).__name__
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError(f"{name} must be a non-empty 1-D sequence of reals")
        if dim is not None and arr.size != dim:
            raise ValueError(f"{name} has length {arr.size}, expected {dim}")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{name} components must all be finite")
        arr.setflags(write=False)
        self.values = arr

    def __len__(self) -> int:
        return int(self.values.size)

    def __iter__(self):
        return iter(self.values)

    def __eq__(self, other) -> bool:
        return type(other) is type(self) and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.values.size})"

    def to_list(self) -> list[float]:
        return [float(v) for v in self.values]


class LatentVector(_FiniteVector):
    """Point in the generator's input space."""


class Embedding(_FiniteVector):
    """Point in the comparison space produced by the embedding model."""


class Individual:
    """Candidate solution: a latent genotype plus its cached evaluation.

    Fitness and distance are two views of one cached value: fitness is the
    exact negation of the distance to the target, and both are either present
    or absent together.
    """

    __slots__ = ("genotype", "_distance")

    def __init__(self, genotype: LatentVector, distance: float | None = None):
        if not isinstance(genotype, LatentVector):
            raise TypeError(f"genotype must be a LatentVector, got {type(genotype).__name__}")
        self.genotype = genotype
        self._distance: float | None = None
        if distance is not None:
            self.set_distance(distance)

    @property
    def distance(self) -> float | None:
        return self._distance

    @property
    def fitness(self) -> float | None:
        return None if self._distance is None else -self._distance

    @property
    def evaluated(self) -> bool:
        return self._distance is not None

    def set_distance(self, distance: float) -> None:
        d = float(distance)
        if not np.isfinite(d) or d < 0.0:
            raise ValueError(f"distance must be a finite non-negative real, got {distance!r}")
        self._distance = d

    def invalidate(self) -> None:
        self._distance = None

    def copy(self) -> Individual:
        """Shallow copy sharing the (immutable) genotype and cached distance."""
        return Individual(self.genotype, self._distance)

    def __repr__(self) -> str:
        tail = "unevaluated" if self._distance is None else f"distance={self._distance:.6g}"
        return f"Individual(dim={len(self.genotype)}, {tail})"


@dataclass(frozen=True)
class EvolutionConfig:
    """All hyperparameters and seeds for one evolutionary run.

    Defaults are the reference operating point for full-scale portrait
    search; tests typically shrink the dimensions and budgets.
    """

    latent_dim: int = 512
    embedding_dim: int = 128
    population_size: int = 200
    generations: int = 500
    crossover_prob: float = 0.75
    mutation_prob: float = 0.001
    blx_alpha: float = 0.2
    tournament_size: int = 3
    mutation_sigma: float = 1.0
    per_gene_mutation_rate: float = 0.05
    hall_of_fame_size: int = 10
    master_seed: int = 0

    def __post_init__(self):
        def _check_positive_int(name: str, value, minimum: int = 1) -> None:
            if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
                raise ConfigError(f"{name} must be an integer >= {minimum}, got {value!r}")

        _check_positive_int("latent_dim", self.latent_dim)
        _check_positive_int("embedding_dim", self.embedding_dim)
        _check_positive_int("population_size", self.population_size)
        # generations=0 is legal and means "initial population only".
        _check_positive_int("generations", self.generations, minimum=0)
        _check_positive_int("tournament_size", self.tournament_size)
        _check_positive_int("hall_of_fame_size", self.hall_of_fame_size)
        if self.tournament_size > self.population_size:
            raise ConfigError(
                f"tournament_size ({self.tournament_size}) must not exceed "
                f"population_size ({self.population_size})"
            )
        for name in ("crossover_prob", "mutation_prob", "per_gene_mutation_rate"):
            p = getattr(self, name)
            if not isinstance(p, (int, float)) or isinstance(p, bool) or not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must be a probability in [0, 1], got {p!r}")
        if not isinstance(self.blx_alpha, (int, float)) or self.blx_alpha < 0.0:
            raise ConfigError(f"blx_alpha must be a non-negative real, got {self.blx_alpha!r}")
        if not isinstance(self.mutation_sigma, (int, float)) or self.mutation_sigma <= 0.0:
            raise ConfigError(f"mutation_sigma must be a positive real, got {self.mutation_sigma!r}")
        if (
            not isinstance(self.master_seed, int)
            or isinstance(self.master_seed, bool)
            or not 0 <= self.master_seed <= _MASK64
        ):
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def config_from_dict(data: dict) -> EvolutionConfig:
    """Build an EvolutionConfig from a flat mapping; unknown keys are an error."""
    if not isinstance(data, dict):
        raise ConfigError(f"configuration must be a JSON object, got {type(data).__name__}")
    known = {f.name for f in dataclasses.fields(EvolutionConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    try:
        return EvolutionConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> EvolutionConfig:
    """Read an EvolutionConfig from a flat JSON document on disk."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)
