"""Exact binomial-tail machinery for the orthant sign-difference probability.

All probabilities are dyadic rationals and are kept as integers over a
power-of-two denominator, so every comparison in this module is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from math import comb, isqrt

# Python ints are arbitrary precision; the alias only documents intent.
BigCount = int

#: Phi(1) - Phi(-1), the limiting probability as the dimension grows.
NORMAL_LIMIT = 0.682689492137086

#: Dimension from which the probability is claimed to exceed 2/3.
PAPER_THRESHOLD = 783


def normal_cdf(x: float) -> float:
    """Standard normal CDF via the error function."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def _check_limit_constant() -> None:
    computed = normal_cdf(1.0) - normal_cdf(-1.0)
    if abs(computed - NORMAL_LIMIT) > 1e-12:
        raise RuntimeError(
            f"normal limit constant drifted: erf gives {computed!r}, "
            f"hard-coded {NORMAL_LIMIT!r}"
        )


_check_limit_constant()


def _require_dimension(p: int) -> None:
    if not isinstance(p, int) or isinstance(p, bool):
        raise TypeError(f"dimension must be an int, got {type(p).__name__}")
    if p < 2:
        raise ValueError(f"dimension must be >= 2, got {p}")


@total_ordering
@dataclass(frozen=True, eq=False)
class DyadicProbability:
    """A probability ``numerator / 2**log2_denominator``.

    Comparisons against other dyadic probabilities, ints and
    :class:`~fractions.Fraction` instances are exact.
    """

    numerator: BigCount
    log2_denominator: int

    def __post_init__(self):
        if self.log2_denominator < 0:
            raise ValueError("log2_denominator must be nonnegative")
        if not 0 <= self.numerator <= (1 << self.log2_denominator):
            raise ValueError("probability numerator outside [0, denominator]")

    @property
    def denominator(self) -> BigCount:
        return 1 << self.log2_denominator

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __float__(self) -> float:
        # int / int true division is correctly rounded in CPython
        return self.numerator / self.denominator

    def complement(self) -> DyadicProbability:
        return DyadicProbability(self.denominator - self.numerator, self.log2_denominator)

    def _cross(self, other) -> tuple[int, int]:
        """Return (a, b) with sign(a - b) == sign(self - other)."""
        if isinstance(other, DyadicProbability):
            k = max(self.log2_denominator, other.log2_denominator)
            return (self.numerator << (k - self.log2_denominator),
                    other.numerator << (k - other.log2_denominator))
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            return (self.numerator * other.denominator,
                    other.numerator * self.denominator)
        return NotImplemented

    def __eq__(self, other):
        pair = self._cross(other)
        if pair is NotImplemented:
            return NotImplemented
        return pair[0] == pair[1]

    def __lt__(self, other):
        pair = self._cross(other)
        if pair is NotImplemented:
            return NotImplemented
        return pair[0] < pair[1]

    def __hash__(self):
        return hash(self.as_fraction())

    def __sub__(self, other) -> Fraction:
        if isinstance(other, DyadicProbability):
            a, b = self._cross(other)
            k = max(self.log2_denominator, other.log2_denominator)
            return Fraction(a - b, 1 << k)
        if isinstance(other, (int, Fraction)):
            return self.as_fraction() - other
        return NotImplemented

    def __str__(self):
        return f"{self.numerator}/2^{self.log2_denominator}"


@dataclass(frozen=True)
class SequenceRow:
    p: int
    p_star: int
    T: int
    R: int
    L: int
    D_scaled: int  # 2**(p-1) * (2P - 1)


def binomial(n: int, k: int) -> BigCount:
    """C(n, k), zero outside ``0 <= k <= n``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if k < 0 or k > n:
        return 0
    return comb(n, k)


def p_star(p: int) -> int:
    """Exact ``ceil((p - sqrt(p)) / 2)`` using integer arithmetic only.

    ``m`` qualifies when ``p - 2m <= sqrt(p)``, i.e. when ``p - 2m <= 0`` or
    ``(p - 2m)**2 <= p``.
    """
    _require_dimension(p)
    # (p - isqrt(p) - 1) / 2 < (p - sqrt(p)) / 2, so this never overshoots
    m = max(0, (p - isqrt(p) - 1) // 2)
    while True:
        gap = p - 2 * m
        if gap <= 0 or gap * gap <= p:
            return m
        m += 1


def _binomial_run(p: int, start: int, stop: int) -> BigCount:
    """Sum of C(p, j) for ``start <= j < stop`` via the multiplicative recurrence."""
    if stop <= start:
        return 0
    term = comb(p, start)
    total = term
    for j in range(start, stop - 1):
        term = term * (p - j) // (j + 1)
        total += term
    return total


# dimension -> probability; filled by both the single-p and the sweep route
_PROBABILITIES: dict[int, DyadicProbability] = {}


def exact_probability(p: int) -> DyadicProbability:
    """Orthant-model probability that the axis beats the random line.

    Sums the binomial coefficients from ``p_star(p)`` up to the middle of
    Pascal's row, halving the central coefficient for even ``p``. The result
    is stored over ``2**p`` so the halved central term stays integral.
    """
    _require_dimension(p)
    cached = _PROBABILITIES.get(p)
    if cached is None:
        cached = _PROBABILITIES.setdefault(p, _direct_probability(p))
    return cached


def _direct_probability(p: int) -> DyadicProbability:
    lo = p_star(p)
    half = p // 2
    if p % 2:
        numerator = 2 * _binomial_run(p, lo, half + 1)
    else:
        numerator = 2 * _binomial_run(p, lo, half)
        if lo <= half:
            numerator += comb(p, half)
    return DyadicProbability(numerator, p)


def _lower_tails(p_min: int, p_max: int):
    """Yield ``(p, sum_{j < p_star(p)} C(p, j))`` for consecutive p.

    Carries ``C(p, m - 1)`` and the tail ``S(p, m)`` forward with
    ``S(p + 1, m) = 2 S(p, m) - C(p, m - 1)``; ``m`` grows by at most one per
    step, so no row is ever rebuilt from scratch.
    """
    p = p_min
    m = p_star(p)
    edge = comb(p, m - 1)
    tail = _binomial_run(p, 0, m)
    while True:
        yield p, tail
        if p == p_max:
            return
        tail = 2 * tail - edge
        edge = edge * (p + 1) // (p + 2 - m)
        p += 1
        new_m = p_star(p)
        if new_m != m:
            edge = edge * (p - m + 1) // m
            tail += edge
            m = new_m


def probability_sweep(p_min: int, p_max: int) -> list[DyadicProbability]:
    """``exact_probability`` for every p in ``p_min..p_max``, computed
    incrementally. The complement of the upper half-row sum is the lower
    tail below ``p_star``, whose half-row total is ``2**(p-1)``.
    """
    _check_range(p_min, p_max)
    out = []
    for p, tail in _lower_tails(p_min, p_max):
        cached = _PROBABILITIES.get(p)
        if cached is None:
            cached = _PROBABILITIES.setdefault(p, DyadicProbability((1 << p) - 2 * tail, p))
        out.append(cached)
    return out


def d_scaled(p: int) -> int:
    """``2**(p-1) * (2P - 1)``; integral because P is stored over ``2**p``."""
    return exact_probability(p).numerator - (1 << (p - 1))


def sequence_row(p: int) -> SequenceRow:
    ps = p_star(p)
    t = p // 2
    r = t - ps + 1
    return SequenceRow(p=p, p_star=ps, T=t, R=r, L=t - r, D_scaled=d_scaled(p))


def sequence_table(p_min: int, p_max: int) -> list[SequenceRow]:
    _check_range(p_min, p_max)
    probability_sweep(p_min, p_max)
    return [sequence_row(p) for p in range(p_min, p_max + 1)]


def _check_range(p_min: int, p_max: int, strict: bool = False) -> None:
    _require_dimension(p_min)
    if p_max < p_min or (strict and p_max == p_min):
        raise ValueError(f"invalid dimension range {p_min}..{p_max}")


# --------------------------------------------------------------------------
# Lemma-style sequence properties


LEMMA_PROPERTIES = ("1", "2", "3", "4", "5", "6", "7", "8", "9")

D2_ANOMALY = (
    "D(2): the proof of the >= 1/2 bound starts from D(2) = 1, but exact "
    "evaluation gives P(2) = 1/2, so 2P(2) - 1 = 0 (D_scaled(2) = 0)"
)


@dataclass
class PropertyReport:
    p_min: int
    p_max: int
    violations: dict[str, list[int]]
    checked: dict[str, int]
    # Lemma 2 read on D_scaled; list holds class indices l that fail
    lemma2_violations: list[int]
    lemma2_checked: int
    # informational: the same comparison on the unscaled advantage 2P - 1
    lemma2_unscaled_violations: list[int]
    class_minimum_decreases: list[int]
    complete_classes: int
    anomalies: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.lemma2_violations and not any(self.violations.values())


def check_lemma_properties(p_min: int, p_max: int) -> PropertyReport:
    """Evaluate the eight structural properties of T, R, L and the scaled-D
    monotonicity claims over ``p_min..p_max``.

    Properties that look ahead (``p+1`` or ``p+2``) are only checked where
    the look-ahead stays inside the range.
    """
    _check_range(p_min, p_max, strict=True)
    rows = {r.p: r for r in sequence_table(p_min, p_max)}
    ps = range(p_min, p_max + 1)
    viol = {name: [] for name in LEMMA_PROPERTIES}
    checked = dict.fromkeys(LEMMA_PROPERTIES, 0)

    def record(name, p, ok):
        checked[name] += 1
        if not ok:
            viol[name].append(p)

    for p in ps:
        r = rows[p]
        nxt = rows.get(p + 1)
        nxt2 = rows.get(p + 2)
        if p % 2 == 0:
            record("1", p, 2 * r.T == p)
            if nxt:
                record("2", p, nxt.T == r.T)
        if nxt2:
            record("3", p, nxt2.T == r.T + 1)
            record("6", p, nxt2.R in (r.R, r.R + 1))
            record("7", p, nxt2.L in (r.L, r.L + 1))
        if nxt:
            record("4", p, nxt.L in (r.L, r.L + 1))
            record("5", p, nxt.R in (r.R - 1, r.R, r.R + 1))

    classes: dict[int, list[int]] = {}
    for p in ps:
        classes.setdefault(rows[p].L, []).append(p)

    def level(p):
        return p_star(p) - 1

    complete = {}
    for l, members in classes.items():
        below_open = members[0] > 2 and level(members[0] - 1) == l
        above_open = level(members[-1] + 1) == l
        if not (below_open or above_open):
            complete[l] = members

    for l, members in complete.items():
        record("8", members[0], 2 <= len(members) <= 3)

    # (9): 2^p D(p) < 2^p' D(p') for p < p' in one class; 2^p D(p) = 2 D_scaled(p)
    for members in classes.values():
        for a_idx, a in enumerate(members):
            for b in members[a_idx + 1:]:
                record("9", a, rows[a].D_scaled < rows[b].D_scaled)

    lemma2, lemma2_unscaled = [], []
    lemma2_checked = 0
    for l, members in sorted(complete.items()):
        if l == 0:
            continue
        lo = members[0]
        if lo - 2 < p_min:
            continue
        lemma2_checked += 1
        cur, prev = rows[lo].D_scaled, rows[lo - 2].D_scaled
        if not cur > prev:
            lemma2.append(l)
        # D(lo) > D(lo-2)  <=>  D_scaled(lo) > 4 D_scaled(lo-2)
        if not cur > 4 * prev:
            lemma2_unscaled.append(l)

    # min over each complete class of the unscaled advantage, compared exactly
    minima = []
    for l, members in sorted(complete.items()):
        minima.append((l, min(Fraction(rows[p].D_scaled, 1 << (p - 1)) for p in members)))
    decreases = [l for (_, a), (l, b) in zip(minima, minima[1:]) if not b > a]

    anomalies = [D2_ANOMALY] if p_min <= 2 <= p_max else []
    return PropertyReport(
        p_min=p_min,
        p_max=p_max,
        violations=viol,
        checked=checked,
        lemma2_violations=lemma2,
        lemma2_checked=lemma2_checked,
        lemma2_unscaled_violations=lemma2_unscaled,
        class_minimum_decreases=decreases,
        complete_classes=len(complete),
        anomalies=anomalies,
    )


@dataclass(frozen=True)
class RecurrenceCheck:
    p: int
    side_condition: bool  # R(p+2) == R(p)
    lhs: int  # D_scaled(p+2)
    rhs: int  # 4 D_scaled(p) - 2 (C(p, p*) - C(p, p*-1))

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs


def check_recurrence(p: int) -> RecurrenceCheck:
    """Test ``D(p+2) = 4 D(p) - 2 (C(p, p*) - C(p, p*-1))`` on scaled values."""
    _require_dimension(p)
    here, ahead = sequence_row(p), sequence_row(p + 2)
    ps = here.p_star
    rhs = 4 * here.D_scaled - 2 * (binomial(p, ps) - binomial(p, ps - 1))
    return RecurrenceCheck(p=p, side_condition=ahead.R == here.R, lhs=ahead.D_scaled, rhs=rhs)


def recurrence_scan(p_min: int, p_max: int) -> list[RecurrenceCheck]:
    """Recurrence checks for every p with ``p + 2 <= p_max``."""
    _check_range(p_min, p_max)
    return [check_recurrence(p) for p in range(p_min, p_max - 1)]


# --------------------------------------------------------------------------
# Limits, thresholds and aggregates


def limit_gap(p: int) -> float:
    return float(exact_probability(p)) - NORMAL_LIMIT


def max_abs_limit_gap(p_lo: int, p_hi: int) -> float:
    probability_sweep(p_lo, p_hi)
    return max(abs(limit_gap(p)) for p in range(p_lo, p_hi + 1))


@dataclass(frozen=True)
class ThresholdReport:
    p_max: int
    p0: int
    last_at_or_below: int | None
    paper_p0: int = PAPER_THRESHOLD

    @property
    def matches_paper(self) -> bool:
        return self.p0 == self.paper_p0


TWO_THIRDS = Fraction(2, 3)


def threshold_scan(p_max: int) -> ThresholdReport:
    """Smallest p0 with P(p) > 2/3 for every p in ``p0..p_max``."""
    if p_max < 1000:
        raise ValueError("threshold_scan needs p_max >= 1000")
    last = None
    for p, prob in enumerate(probability_sweep(2, p_max), start=2):
        if prob <= TWO_THIRDS:
            last = p
    return ThresholdReport(p_max=p_max, p0=2 if last is None else last + 1, last_at_or_below=last)


@dataclass(frozen=True)
class AggregateReport:
    """Binomial aggregation of the single-pair probability over p lines."""

    p: int
    probability: DyadicProbability
    all_axis: DyadicProbability  # P[U = p] = P**p
    none_axis: DyadicProbability  # P[U = 0] = (1 - P)**p
    ratio: Fraction | None  # None when P[U = 0] == 0
    ratio_infinite: bool
    ratio_vs_2p: int | None  # sign of ratio - 2**p
    log2_ratio: float


def uk_aggregate(p: int) -> AggregateReport:
    prob = exact_probability(p)
    k = prob.log2_denominator
    num, rest = prob.numerator, prob.denominator - prob.numerator
    all_axis = DyadicProbability(num ** p, k * p)
    none_axis = DyadicProbability(rest ** p, k * p)
    if rest == 0:
        return AggregateReport(p, prob, all_axis, none_axis, None, True, None, math.inf)
    ratio = Fraction(num ** p, rest ** p)
    cmp = (ratio > (1 << p)) - (ratio < (1 << p))
    log2_ratio = p * (math.log2(num) - math.log2(rest)) if num else -math.inf
    return AggregateReport(p, prob, all_axis, none_axis, ratio, False, cmp, log2_ratio)


def figure3_series(p_min: int = 2, p_max: int = 993) -> list[tuple[int, float]]:
    return [(p, float(prob)) for p, prob in enumerate(probability_sweep(p_min, p_max), start=p_min)]
