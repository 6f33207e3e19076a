"""Cooperative MCS sensing: per-SU classification and plurality-vote fusion."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyVoteSet
from .pu_link import OUTAGE


@dataclass(frozen=True)
class SensingModel:
    """Per-SU classifier: correct with probability p_correct, else it confuses
    the true MCS with a uniformly chosen adjacent ladder index."""

    p_correct: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.p_correct <= 1.0:
            raise ValueError("p_correct must be in (0, 1]")


def su_classify(true_mcs: int, n_mcs: int, model: SensingModel, rng) -> int:
    """One SU's MCS estimate. Outage is always sensed correctly."""
    if true_mcs == OUTAGE:
        return OUTAGE
    if model.p_correct >= 1.0 or rng.uniform() < model.p_correct:
        return true_mcs
    neighbors = [j for j in (true_mcs - 1, true_mcs + 1) if 1 <= j <= n_mcs]
    return neighbors[rng.integers(len(neighbors))]


def fuse_plurality(votes: Sequence[int]) -> int:
    """Most frequent vote; ties break toward the lower (more robust) index."""
    if not votes:
        raise EmptyVoteSet("no votes to fuse")
    counts = Counter(votes)
    return min(counts, key=lambda j: (-counts[j], j))
