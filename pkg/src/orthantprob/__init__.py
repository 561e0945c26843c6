"""Exact and simulated checks of the probability that an orthogonal axis is
angularly closer to a random line than another random line is."""

__version__ = "0.1.0"

from .combinatorics import (  # noqa: E402
    NORMAL_LIMIT,
    DyadicProbability,
    SequenceRow,
    binomial,
    check_lemma_properties,
    check_recurrence,
    exact_probability,
    figure3_series,
    limit_gap,
    p_star,
    probability_sweep,
    sequence_row,
    threshold_scan,
    uk_aggregate,
)
from .montecarlo import McEstimate  # noqa: E402
