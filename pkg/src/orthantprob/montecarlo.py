"""Seeded sampling plumbing shared by the Monte Carlo estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

GENERATOR_NAME = "numpy PCG64 via SeedSequence.spawn"
DEFAULT_SEED = 20240601
DEFAULT_SHARD = 1 << 17


@dataclass(frozen=True)
class McEstimate:
    """Bernoulli frequency with its binomial standard error."""

    estimate: float
    standard_error: float
    n_samples: int
    seed: int
    generator: str = GENERATOR_NAME

    @classmethod
    def from_counts(cls, hits: int, n: int, seed: int) -> McEstimate:
        est = hits / n
        return cls(est, math.sqrt(est * (1.0 - est) / n), n, seed)

    def z_score(self, reference: float) -> float:
        if self.standard_error == 0.0:
            return 0.0 if self.estimate == reference else math.copysign(math.inf, self.estimate - reference)
        return (self.estimate - reference) / self.standard_error

    def within(self, reference: float, k: float = 4.0) -> bool:
        return abs(self.estimate - reference) <= k * self.standard_error


@dataclass(frozen=True)
class MeanEstimate:
    """Sample mean of a bounded statistic with the usual s/sqrt(n) error."""

    estimate: float
    standard_error: float
    n_samples: int
    seed: int
    generator: str = GENERATOR_NAME


def check_seed(seed: int) -> int:
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return int(seed)


def shards(n: int, seed: int, shard_size: int = DEFAULT_SHARD) -> Iterator[tuple[np.random.Generator, int]]:
    """Yield ``(generator, count)`` per shard, in fixed order.

    Each shard owns an independent child stream of ``seed``, so results do
    not depend on how (or whether) shards are run concurrently as long as
    they are merged in this order.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    check_seed(seed)
    n_shards = -(-n // shard_size)
    children = np.random.SeedSequence(seed).spawn(n_shards)
    for idx, child in enumerate(children):
        count = min(shard_size, n - idx * shard_size)
        yield np.random.Generator(np.random.PCG64(child)), count


def spawn_generators(seed: int, count: int) -> list[np.random.Generator]:
    check_seed(seed)
    return [np.random.Generator(np.random.PCG64(c)) for c in np.random.SeedSequence(seed).spawn(count)]
