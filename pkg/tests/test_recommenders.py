import numpy as np
import pytest

from ecosim.model import FeatureVector, Item, ValidationError, substream
from ecosim.recommenders import ItemTable, RecommenderState, build_popularity_index


def make_table(specs):
    """specs: list of (item_id, flags tuple, popularity). One provider."""
    items = [
        Item(item_id=iid, provider_id=1, features=FeatureVector(flags), popularity=pop)
        for iid, flags, pop in specs
    ]
    n_genres = len(specs[0][1])
    return ItemTable.from_items(items, n_genres, {1: 0})


def fresh_state(specs, n_consumers=3, explore=0.2, smoothing=1.0, restrict=None):
    table = make_table(specs)
    return RecommenderState.build(
        1,
        table,
        n_consumers,
        exploration_probability=explore,
        smoothing=smoothing,
        restrict_to_genre=restrict,
    )


BASIC = [
    (1, (1, 0, 0), 50),
    (2, (1, 1, 0), 40),
    (3, (0, 1, 0), 30),
    (4, (0, 0, 1), 20),
    (5, (1, 0, 1), 10),
    (6, (0, 1, 1), 5),
]


class TestItemTableRoundTrip:
    def test_table_is_loss_free(self):
        table = make_table(BASIC)
        by_id = {iid: (flags, pop) for iid, flags, pop in BASIC}
        assert len(table) == len(BASIC)
        for row in range(len(table)):
            iid = int(table.item_ids[row])
            flags, pop = by_id[iid]
            rebuilt = tuple(1 if g in table.flags_list[row] else 0 for g in range(table.n_genres))
            assert rebuilt == flags
            assert int(table.popularity[row]) == pop
            mask = int(table.masks[row])
            assert tuple(g for g in range(table.n_genres) if mask >> g & 1) == table.flags_list[row]

    def test_csr_matches_flag_lists(self):
        table = make_table(BASIC)
        for row in range(len(table)):
            lo, hi = int(table.flag_ptr[row]), int(table.flag_ptr[row + 1])
            assert tuple(int(g) for g in table.flag_idx[lo:hi]) == table.flags_list[row]


class TestObserveClick:
    def test_single_flag_increment(self):
        state = fresh_state(BASIC)
        state.observe_click(0, 1)
        assert state.click_model.counts[0].tolist() == [1, 0, 0]

    def test_multi_flag_increment(self):
        state = fresh_state(BASIC)
        state.observe_click(0, 2)
        assert state.click_model.counts[0].tolist() == [1, 1, 0]

    def test_additivity(self):
        state = fresh_state(BASIC)
        state.observe_click(0, 2)
        state.observe_click(0, 2)
        assert state.click_model.counts[0].tolist() == [2, 2, 0]

    def test_unknown_item(self):
        state = fresh_state(BASIC)
        with pytest.raises(ValidationError, match="unknown item"):
            state.observe_click(0, 99)

    def test_order_insensitive_totals(self):
        a = fresh_state(BASIC)
        b = fresh_state(BASIC)
        clicks = [1, 2, 4, 2, 6, 1]
        for c in clicks:
            a.observe_click(1, c)
        for c in reversed(clicks):
            b.observe_click(1, c)
        assert a.click_model.counts[1].tolist() == b.click_model.counts[1].tolist()

    def test_outside_view_rejected(self):
        state = fresh_state(BASIC, restrict=2)
        with pytest.raises(ValidationError, match="catalog view"):
            state.observe_click(0, 1)


class TestPredictDistribution:
    def test_cold_start_uniform(self):
        state = fresh_state(BASIC)
        dist = state.predict_genre_distribution(0)
        assert dist == pytest.approx([1 / 3] * 3, abs=1e-12)

    def test_laplace_arithmetic(self):
        # three clicks on one genre, 19 genres, smoothing 1: (3+1)/(3+19)
        specs = [(1, tuple(1 if g == 5 else 0 for g in range(19)), 10)] + [
            (i, tuple(1 if g == 0 else 0 for g in range(19)), 5) for i in range(2, 8)
        ]
        state = fresh_state(specs, n_consumers=1)
        for _ in range(3):
            state.observe_click(0, 1)
        dist = state.predict_genre_distribution(0)
        assert dist[5] == pytest.approx(4 / 22, rel=1e-12)
        assert dist[0] == pytest.approx(1 / 22, rel=1e-12)

    def test_strictly_positive_and_normalized(self):
        state = fresh_state(BASIC)
        rng = substream(1, 1)
        for _ in range(40):
            state.observe_click(2, int(rng.integers(1, 7)))
        dist = state.predict_genre_distribution(2)
        assert dist.min() > 0
        assert abs(dist.sum() - 1.0) <= 1e-9

    def test_formula_equality_against_recomputation(self):
        state = fresh_state(BASIC, smoothing=2.5)
        rng = substream(2, 1)
        for _ in range(25):
            state.observe_click(0, int(rng.integers(1, 7)))
        counts = state.click_model.counts[0].astype(float)
        expected = (counts + 2.5) / (counts + 2.5).sum()
        assert state.predict_genre_distribution(0) == pytest.approx(expected.tolist(), abs=0)


class TestPopularityIndex:
    def test_descending_popularity(self):
        table = make_table(BASIC)
        index = build_popularity_index(table, np.arange(6, dtype=np.int32))
        # genre 0 members: items 1 (pop 50), 2 (40), 5 (10)
        assert [table.item_ids[i] for i in index[0]] == [1, 2, 5]

    def test_tie_breaks_by_ascending_id(self):
        specs = [(7, (1, 0), 10), (2, (1, 0), 10), (5, (1, 0), 10)]
        table = make_table(specs)
        index = build_popularity_index(table, np.arange(3, dtype=np.int32))
        assert [int(table.item_ids[i]) for i in index[0]] == [2, 5, 7]

    def test_all_zero_item_in_no_list(self):
        specs = [(1, (0, 0), 99), (2, (1, 0), 5), (3, (0, 1), 5)]
        table = make_table(specs)
        index = build_popularity_index(table, np.arange(3, dtype=np.int32))
        member_rows = {i for lst in index for i in lst}
        assert table.id_to_index[1] not in member_rows


class TestRecommend:
    def test_list_size_and_distinctness(self):
        state = fresh_state(BASIC, explore=0.2)
        rng = substream(3, 1)
        for _ in range(50):
            out = state.recommend(0, 5, rng)
            assert len(out) == 5 and len(set(out)) == 5

    def test_restricted_view_only_niche_items(self):
        state = fresh_state(BASIC, explore=0.2, restrict=2)
        rng = substream(4, 1)
        table = state.table
        for _ in range(50):
            out = state.recommend(1, 2, rng)
            for iid in out:
                assert 2 in table.flags_list[table.id_to_index[iid]]

    def test_view_too_small(self):
        state = fresh_state(BASIC, restrict=2)
        with pytest.raises(ValidationError, match="catalog view"):
            state.recommend(0, 4, substream(5, 1))

    def test_exploit_returns_top_popularity(self):
        # no exploration, vanishing smoothing, heavy single-genre history:
        # the list is the genre's popularity order
        state = fresh_state(BASIC, explore=0.0, smoothing=1e-9)
        for _ in range(10):
            state.observe_click(0, 3)  # genre 1 clicks
        rng = substream(6, 1)
        out = state.recommend(0, 3, rng)
        # genre 1 members by popularity: 2 (40), 3 (30), 6 (5)
        assert out == [2, 3, 6]

    def test_excluded_items_never_returned(self):
        state = fresh_state(BASIC, explore=0.5)
        rng = substream(7, 1)
        for _ in range(40):
            out = state.recommend(0, 3, rng, excluded=[1, 2])
            assert not {1, 2} & set(out)

    def test_zero_exploration_deterministic_given_stream(self):
        a = fresh_state(BASIC, explore=0.0)
        b = fresh_state(BASIC, explore=0.0)
        out_a = [a.recommend(0, 3, substream(8, 1)) for _ in range(5)]
        out_b = [b.recommend(0, 3, substream(8, 1)) for _ in range(5)]
        assert out_a == out_b

    def test_cold_start_exploration_uniform_over_view(self):
        state = fresh_state(BASIC, explore=1.0)
        rng = substream(9, 1)
        seen = set()
        for _ in range(300):
            seen.update(state.recommend(2, 2, rng))
        assert seen == {1, 2, 3, 4, 5, 6}

    def test_exploration_restricted_to_clicked_genres(self):
        state = fresh_state(BASIC, explore=1.0)
        state.observe_click(0, 4)  # genre 2 only
        rng = substream(10, 1)
        # candidates sharing a genre with clicks: items 4, 5, 6
        for _ in range(100):
            out = state.recommend(0, 2, rng)
            assert set(out) <= {4, 5, 6}
