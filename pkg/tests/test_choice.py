import math

import numpy as np
import pytest

from ecosim.choice import (
    item_utility,
    list_utility,
    list_utility_report,
    select_item,
    selection_probabilities,
    threshold_decide,
    ucb_decide,
    ucb_score,
    update_recommender_score,
)
from ecosim.model import FeatureVector, PreferenceVector, ValidationError, substream


def one_hot(i, n):
    return PreferenceVector(tuple(1.0 if g == i else 0.0 for g in range(n)))


class TestItemUtility:
    def test_one_hot_single_flag(self):
        f = FeatureVector(tuple(1 if g == 18 else 0 for g in range(19)))
        assert item_utility(f, one_hot(18, 19)) == pytest.approx(1 / 19, abs=1e-15)

    def test_orthogonal_is_zero(self):
        f = FeatureVector((1, 1, 0, 0))
        p = PreferenceVector((0.0, 0.0, 0.5, 0.5))
        assert item_utility(f, p) == 0.0

    def test_uniform_preference(self):
        # uniform weights, g flags: utility g / F^2
        F = 19
        p = PreferenceVector(tuple(1 / F for _ in range(F)))
        f = FeatureVector(tuple(1 if g < 3 else 0 for g in range(F)))
        assert item_utility(f, p) == pytest.approx(3 / (F * F), rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError, match="mismatch"):
            item_utility(FeatureVector((1, 0)), one_hot(0, 3))


class TestListUtility:
    def test_constant_list(self):
        f = FeatureVector((1, 0))
        p = PreferenceVector((0.6, 0.4))
        u = item_utility(f, p)
        assert list_utility([f] * 5, p) == pytest.approx(u, abs=1e-15)

    def test_hand_mean(self):
        # utilities [1/19, 0, 0, 0, 0] -> 1/95
        F = 19
        p = one_hot(18, F)
        hit = FeatureVector(tuple(1 if g == 18 else 0 for g in range(F)))
        miss = FeatureVector(tuple(1 if g == 0 else 0 for g in range(F)))
        got = list_utility([hit, miss, miss, miss, miss], p)
        assert got == pytest.approx(1 / 95, rel=1e-12)

    def test_all_zero(self):
        p = one_hot(0, 4)
        miss = FeatureVector((0, 1, 0, 0))
        assert list_utility([miss] * 3, p) == 0.0

    def test_empty_list_rejected(self):
        with pytest.raises(ValidationError, match="empty"):
            list_utility([], one_hot(0, 2))


class TestSelectionProbabilities:
    def test_equal_utilities(self):
        assert selection_probabilities([0.3] * 5) == pytest.approx([0.2] * 5, abs=1e-12)

    def test_two_point_hand_value(self):
        got = selection_probabilities([1.0, 0.0])
        assert got[0] == pytest.approx(0.7311, abs=1e-4)
        assert got[1] == pytest.approx(0.2689, abs=1e-4)

    def test_singleton(self):
        assert selection_probabilities([0.123]) == [1.0]

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError, match="index 1"):
            selection_probabilities([0.0, math.nan])

    def test_sums_to_one_on_random_vectors(self):
        rng = np.random.default_rng(11)
        for _ in range(10_000):
            us = (rng.random(rng.integers(1, 12)) * 20 - 10).tolist()
            assert abs(sum(selection_probabilities(us)) - 1.0) <= 1e-9

    def test_shift_invariance(self):
        rng = np.random.default_rng(13)
        for _ in range(2_000):
            us = (rng.random(6) * 4 - 2).tolist()
            c = float(rng.random() * 100 - 50)
            a = selection_probabilities(us)
            b = selection_probabilities([u + c for u in us])
            assert all(abs(x - y) <= 1e-12 for x, y in zip(a, b))


class TestSelectItem:
    def test_forced(self):
        assert select_item([1.0], substream(0, 9)) == 0

    def test_degenerate(self):
        assert select_item([0.0, 1.0, 0.0], substream(0, 9)) == 1

    def test_empirical_frequency(self):
        rng = substream(123, 9)
        n = 100_000
        hits = sum(1 for _ in range(n) if select_item([0.5, 0.5], rng) == 0)
        assert abs(hits / n - 0.5) <= 0.01


class TestScoreUpdate:
    def test_memoryless_limit(self):
        assert update_recommender_score(0.9, 0.2, 0.0) == 0.2

    def test_hand_value(self):
        assert update_recommender_score(0.4, 0.2, 1.0) == pytest.approx(0.3, abs=1e-15)

    def test_fixed_point(self):
        assert update_recommender_score(0.25, 0.25, 3.7) == pytest.approx(0.25, abs=1e-15)

    def test_convex_combination_bound(self):
        rng = np.random.default_rng(21)
        for _ in range(10_000):
            score, u = (rng.random(2) * 2 - 0.5).tolist()
            beta = float(rng.random() * 50)
            out = update_recommender_score(score, u, beta)
            lo, hi = min(score, u), max(score, u)
            assert lo - 1e-12 <= out <= hi + 1e-12


class TestThresholdDecide:
    def test_below_threshold_switches(self):
        assert threshold_decide(0.035, 0.04, current=1, others=[2]) == 2

    def test_above_threshold_stays(self):
        assert threshold_decide(0.05, 0.04, current=1, others=[2]) == 1

    def test_no_alternative_stays(self):
        assert threshold_decide(0.01, 0.04, current=1, others=[]) == 1

    def test_least_recently_used_alternative(self):
        got = threshold_decide(0.0, 0.04, current=1, others=[2, 3], last_used={1: 5, 2: 4, 3: 2})
        assert got == 3

    def test_lru_tie_breaks_by_id(self):
        got = threshold_decide(0.0, 0.04, current=1, others=[3, 2], last_used={2: 4, 3: 4})
        assert got == 2


class TestUcb:
    def test_log_one_gives_zero_bonus(self):
        assert ucb_score(0.05, day=1, times_selected=1) == 0.05

    def test_hand_value(self):
        got = ucb_score(0.05, day=30, times_selected=10)
        assert got == pytest.approx(0.07661, abs=1e-4)

    def test_unvisited_is_infinite(self):
        assert ucb_score(0.0, day=10, times_selected=0) == math.inf

    def test_day_below_one_rejected(self):
        with pytest.raises(ValidationError, match="day"):
            ucb_score(0.0, day=0, times_selected=1)

    def test_argmax(self):
        assert ucb_decide({1: 0.07, 2: 0.05}) == 1

    def test_tie_breaks_ascending(self):
        assert ucb_decide({2: 0.05, 1: 0.05}) == 1

    def test_unvisited_dominates(self):
        assert ucb_decide({1: 0.05, 2: math.inf}) == 2

    def test_argmax_invariant_under_common_shift(self):
        rng = np.random.default_rng(31)
        for _ in range(2_000):
            scores = {k: float(rng.random()) for k in range(1, 5)}
            c = float(rng.random() * 10 - 5)
            shifted = {k: v + c for k, v in scores.items()}
            assert ucb_decide(scores) == ucb_decide(shifted)


class TestReport:
    def test_report_matches_independent_recomputation(self):
        rng = np.random.default_rng(41)
        for _ in range(300):
            F = int(rng.integers(2, 8))
            raw = rng.random(F) + 1e-9
            p = PreferenceVector(tuple(raw / raw.sum()))
            feats = [
                FeatureVector(tuple(int(b) for b in rng.integers(0, 2, F)))
                for _ in range(int(rng.integers(1, 6)))
            ]
            report = list_utility_report(feats, p)
            assert abs(sum(report.probabilities) - 1.0) <= 1e-9
            for f, u in zip(feats, report.per_item):
                s = 0.0
                for g, flag in enumerate(f.flags):
                    if flag:
                        s += p.weights[g]
                assert u == s / F
