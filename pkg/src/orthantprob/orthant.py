"""Discrete orthant model: lines are reduced to the sign pattern of their
orthant, and each orthant to the direction of its centroid.

An orthant and its antipode hold the same lines, so patterns are kept in
canonical form with a leading ``+1``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .combinatorics import DyadicProbability
from .montecarlo import DEFAULT_SHARD, McEstimate, shards

MAX_ENUMERATION_DIM = 24


@dataclass(frozen=True)
class SignPattern:
    signs: tuple[int, ...]

    def __post_init__(self):
        if len(self.signs) < 2:
            raise ValueError("sign pattern needs p >= 2")
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")
        if self.signs[0] != 1:
            raise ValueError("pattern is not canonical (first sign must be +1)")

    @property
    def p(self) -> int:
        return len(self.signs)

    @classmethod
    def canonical(cls, signs: Sequence[int]) -> SignPattern:
        """Canonical representative of the orthant pair ``{s, -s}``."""
        signs = tuple(1 if s >= 0 else -1 for s in signs)
        if signs[0] == -1:
            signs = tuple(-s for s in signs)
        return cls(signs)

    @classmethod
    def positive(cls, p: int) -> SignPattern:
        return cls((1,) * p)


def canonical_patterns(p: int) -> Iterator[SignPattern]:
    for tail in itertools.product((1, -1), repeat=p - 1):
        yield SignPattern((1,) + tail)


def sign_difference(a: SignPattern, b: SignPattern) -> int:
    """Folded sign-difference count ``min(h, p - h)`` of two patterns."""
    if a.p != b.p:
        raise ValueError(f"dimension mismatch: {a.p} vs {b.p}")
    h = sum(x != y for x, y in zip(a.signs, b.signs))
    return min(h, a.p - h)


def _check_j(p: int, j: int) -> None:
    if p < 2:
        raise ValueError(f"dimension must be >= 2, got {p}")
    if not 0 <= j <= p // 2:
        raise ValueError(f"j={j} outside 0..{p // 2}")


def centroid_cosine_u(p: int) -> float:
    """Cosine between an axis and the centroid direction (1, ..., 1)/sqrt(p)."""
    if p < 2:
        raise ValueError(f"dimension must be >= 2, got {p}")
    return p ** -0.5


def centroid_cosine_v(p: int, j: int) -> float:
    """Cosine between two orthant centroids whose patterns differ in j signs."""
    _check_j(p, j)
    return 1.0 - 2.0 * j / p


def margin_nonnegative(p: int, j: int) -> bool:
    """Exact sign test for ``cosine_margin(p, j) >= 0``.

    The margin is ``(sqrt(p) - (p - 2j)) / p``.
    """
    _check_j(p, j)
    gap = p - 2 * j
    return gap <= 0 or gap * gap <= p


def cosine_margin(p: int, j: int) -> float:
    """``cos(axis, centroid) - cos(centroid, centroid')``: ``p**-0.5 + 2j/p - 1``.

    Exact ties (``(p - 2j)**2 == p``) return 0.0 rather than a rounding
    residue, so the sign of the result always agrees with
    :func:`margin_nonnegative`. Away from ties the margin is at least about
    ``p**-1.5 / 2`` and float rounding cannot flip it.
    """
    _check_j(p, j)
    gap = p - 2 * j
    if gap * gap == p:
        return 0.0
    return centroid_cosine_u(p) + 2.0 * j / p - 1.0


def brute_force_probability(p: int) -> DyadicProbability:
    """Enumerate every canonical v-orthant against w in (+, ..., +).

    Pattern ``mask`` has coordinate ``i + 1`` negative when bit ``i`` is set,
    so its Hamming distance from the positive orthant is the popcount.
    """
    if not 2 <= p <= MAX_ENUMERATION_DIM:
        raise ValueError(f"enumeration supports 2 <= p <= {MAX_ENUMERATION_DIM}, got {p}")
    favourable = [cosine_margin(p, min(h, p - h)) >= 0.0 for h in range(p + 1)]
    count = 0
    for mask in range(1 << (p - 1)):
        if favourable[mask.bit_count()]:
            count += 1
    return DyadicProbability(count, p - 1)


def _popcount_rows(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words).sum(axis=1, dtype=np.int64)


def _random_tail_bits(rng: np.random.Generator, count: int, bits: int) -> np.ndarray:
    """``count`` rows of ``bits`` fair bits packed into uint64 words."""
    n_words = -(-bits // 64)
    words = rng.integers(0, np.iinfo(np.uint64).max, size=(count, n_words),
                         dtype=np.uint64, endpoint=True)
    spare = n_words * 64 - bits
    if spare:
        words[:, -1] &= np.uint64((1 << (64 - spare)) - 1)
    return words


def mc_orthant_estimate(p: int, n: int, seed: int, shard_size: int = DEFAULT_SHARD) -> McEstimate:
    """Frequency of a nonnegative centroid margin for random orthant pairs.

    Both patterns are drawn uniformly from the canonical classes (leading
    sign pinned to +1, the other ``p - 1`` signs fair bits).
    """
    if p < 2:
        raise ValueError(f"dimension must be >= 2, got {p}")
    favourable = np.array([margin_nonnegative(p, min(h, p - h)) for h in range(p + 1)])
    hits = 0
    for rng, count in shards(n, seed, shard_size):
        w = _random_tail_bits(rng, count, p - 1)
        v = _random_tail_bits(rng, count, p - 1)
        h = _popcount_rows(w ^ v)
        hits += int(favourable[h].sum())
    return McEstimate.from_counts(hits, n, seed)


def j_weights(p: int) -> list[int]:
    """Number of canonical v-classes at each folded distance j from a fixed class.

    ``C(p, j)`` for ``j < p/2`` and ``C(p, p/2)/2`` at the self-paired middle.
    """
    weights = [math.comb(p, j) for j in range(p // 2 + 1)]
    if p % 2 == 0:
        weights[-1] //= 2
    return weights
