"""Consumer decision formulas.

Item and list utilities, stabilized softmax selection probabilities,
categorical item choice, the recency-weighted recommender score update,
and the two recommender-selection rules (threshold switching and
upper-confidence-bound with a decaying exploration bonus).

All functions are pure; randomness enters only through an explicit
generator argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .model import FeatureVector, PreferenceVector, ValidationError


def _flags_of(features) -> Sequence[int]:
    if isinstance(features, FeatureVector):
        return features.flags
    return tuple(features)


def _weights_of(preferences) -> Sequence[float]:
    if isinstance(preferences, PreferenceVector):
        return preferences.weights
    return tuple(preferences)


def item_utility(features, preferences) -> float:
    """Preference mass covered by the item's flags, scaled by 1/dimension.

    Accumulates in ascending genre order; the day kernels evaluate the
    same sequence.
    """
    flags = _flags_of(features)
    weights = _weights_of(preferences)
    if len(flags) != len(weights):
        raise ValidationError(f"dimension mismatch: {len(flags)} flags vs {len(weights)} weights")
    s = 0.0
    for g, f in enumerate(flags):
        if f:
            s += weights[g]
    return s / len(flags)


def list_utility(feature_list: Sequence, preferences) -> float:
    """Arithmetic mean of item utilities over a nonempty list."""
    if not feature_list:
        raise ValidationError("list utility of an empty list is undefined")
    total = 0.0
    for features in feature_list:
        total += item_utility(features, preferences)
    return total / len(feature_list)


def selection_probabilities(utilities: Sequence[float]) -> list[float]:
    """Softmax with max-subtraction for numerical stability."""
    if len(utilities) == 0:
        raise ValidationError("cannot form selection probabilities over an empty list")
    for i, u in enumerate(utilities):
        if not math.isfinite(u):
            raise ValidationError(f"utility at index {i} is not finite: {u!r}")
    m = utilities[0]
    for u in utilities:
        if u > m:
            m = u
    exps = [math.exp(u - m) for u in utilities]
    total = 0.0
    for e in exps:
        total += e
    return [e / total for e in exps]


@dataclass(frozen=True)
class ListUtilityReport:
    """Per-item utilities, their mean, and the induced click probabilities."""

    per_item: list[float]
    list_utility: float
    probabilities: list[float]


def list_utility_report(feature_list: Sequence, preferences) -> ListUtilityReport:
    if not feature_list:
        raise ValidationError("cannot report on an empty list")
    per_item = [item_utility(f, preferences) for f in feature_list]
    total = 0.0
    for u in per_item:
        total += u
    return ListUtilityReport(
        per_item=per_item,
        list_utility=total / len(per_item),
        probabilities=selection_probabilities(per_item),
    )


def select_item(probabilities: Sequence[float], rng: np.random.Generator) -> int:
    """Categorical draw over a probability vector; always chooses one index."""
    if len(probabilities) == 0:
        raise ValidationError("cannot select from an empty probability vector")
    r = rng.random()
    acc = 0.0
    last = len(probabilities) - 1
    for i, p in enumerate(probabilities):
        acc += p
        if r < acc:
            return i
    return last


def update_recommender_score(score: float, list_utility_value: float, recency_bias: float) -> float:
    """Recency-weighted running score: (score * b + u) / (1 + b)."""
    if recency_bias < 0:
        raise ValidationError(f"recency bias must be >= 0, got {recency_bias!r}")
    return (score * recency_bias + list_utility_value) / (1.0 + recency_bias)


def threshold_decide(
    current_score: float,
    threshold: float,
    current: int,
    others: Sequence[int],
    last_used: Mapping[int, int] | None = None,
) -> int:
    """Switch away from the current recommender when its score sinks below
    the threshold and an alternative exists.

    With several alternatives the least recently used wins (``last_used``
    maps recommender id to the cycle it last served this consumer; missing
    means never), ties broken by ascending id.
    """
    if current_score >= threshold or not others:
        return current
    if last_used is None:
        return min(others)
    return min(others, key=lambda k: (last_used.get(k, 0), k))


def ucb_score(score: float, day: int, times_selected: int) -> float:
    """Score plus a decaying exploration bonus; unvisited arms dominate."""
    if day < 1:
        raise ValidationError(f"day index must be >= 1, got {day}")
    if times_selected < 0:
        raise ValidationError(f"selection count must be >= 0, got {times_selected}")
    if times_selected == 0:
        return math.inf
    return score + math.sqrt(2.0 * math.log(day) / times_selected) / (1.0 + day)


def ucb_decide(scores: Mapping[int, float]) -> int:
    """Recommender with the greatest score; ties broken by ascending id."""
    if not scores:
        raise ValidationError("cannot decide over an empty score map")
    best = None
    best_score = -math.inf
    for k in sorted(scores):
        s = scores[k]
        if s > best_score:
            best = k
            best_score = s
    return best
