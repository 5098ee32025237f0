"""Content-based recommenders over a shared catalog.

Each recommender keeps an independent per-consumer genre click model
(multinomial counts with Laplace smoothing), a per-genre popularity index
over its catalog view, and fills each list slot either by exploration
(uniform over view items sharing a genre with the consumer's clicked
genres) or by exploitation (sample a genre from the smoothed click
distribution, emit its most popular remaining item).

The draw ritual here is the contract the compiled day kernel reproduces
step for step: one uniform per slot for the explore/exploit decision, one
uniform per exploration pick, one uniform per genre sample. Floating-point
expressions are written so the compiled kernel can evaluate the same
operation sequence and produce bit-identical runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .model import Item, ValidationError

# a genre draw that keeps hitting out-of-stock genres falls back to a
# uniform pick over the remaining view after this many attempts
GENRE_RESAMPLE_CAP = 1024

# genre bitmasks are stored in uint64
MAX_GENRES = 64


@dataclass
class ItemTable:
    """Static, index-oriented view of the active catalog.

    Items are ordered by ascending external id; internal indices are the
    positions in that order. ``flag_ptr``/``flag_idx`` form a CSR layout of
    each item's set genre flags for the compiled kernel, ``flags_list``
    the same content as Python tuples.
    """

    item_ids: np.ndarray
    masks: np.ndarray
    flag_ptr: np.ndarray
    flag_idx: np.ndarray
    flags_list: list[tuple[int, ...]]
    providers: np.ndarray
    popularity: np.ndarray
    n_genres: int
    id_to_index: dict[int, int]

    def __len__(self) -> int:
        return int(self.item_ids.shape[0])

    @classmethod
    def from_items(cls, items: Iterable[Item], n_genres: int, provider_index: dict[int, int]) -> "ItemTable":
        if n_genres > MAX_GENRES:
            raise ValidationError(f"at most {MAX_GENRES} genres supported, got {n_genres}")
        ordered = sorted(items, key=lambda it: it.item_id)
        if not ordered:
            raise ValidationError("cannot build an item table from an empty catalog")
        ids = np.asarray([it.item_id for it in ordered], dtype=np.int64)
        masks = np.zeros(len(ordered), dtype=np.uint64)
        flags_list: list[tuple[int, ...]] = []
        ptr = [0]
        idx: list[int] = []
        for row, it in enumerate(ordered):
            fl = it.features.indices()
            flags_list.append(fl)
            m = 0
            for g in fl:
                m |= 1 << g
                idx.append(g)
            masks[row] = m
            ptr.append(len(idx))
        return cls(
            item_ids=ids,
            masks=masks,
            flag_ptr=np.asarray(ptr, dtype=np.int32),
            flag_idx=np.asarray(idx, dtype=np.int32),
            flags_list=flags_list,
            providers=np.asarray([provider_index[it.provider_id] for it in ordered], dtype=np.int32),
            popularity=np.asarray([it.popularity for it in ordered], dtype=np.int64),
            n_genres=n_genres,
            id_to_index={it.item_id: row for row, it in enumerate(ordered)},
        )


def build_popularity_index(table: ItemTable, view: np.ndarray) -> list[list[int]]:
    """Per-genre view items sorted by descending popularity, ties by ascending id."""
    pop = table.popularity
    index: list[list[int]] = []
    for g in range(table.n_genres):
        members = [int(i) for i in view.tolist() if table.flags_list[i] and g in table.flags_list[i]]
        members.sort(key=lambda i: (-int(pop[i]), i))
        index.append(members)
    return index


class GenreClickModel:
    """Per-consumer multinomial genre counts with Laplace smoothing.

    ``counts[c, g]`` is the number of clicks consumer c made on items
    flagged with genre g at this recommender; ``cumulative`` holds the
    running row prefix sums the samplers consume.
    """

    def __init__(self, counts: np.ndarray, cumulative: np.ndarray, smoothing: float = 1.0):
        if smoothing <= 0:
            raise ValidationError(f"smoothing must be positive, got {smoothing!r}")
        self.counts = counts
        self.cumulative = cumulative
        self.smoothing = float(smoothing)

    @classmethod
    def zeros(cls, n_consumers: int, n_genres: int, smoothing: float = 1.0) -> "GenreClickModel":
        return cls(
            counts=np.zeros((n_consumers, n_genres), dtype=np.int64),
            cumulative=np.zeros((n_consumers, n_genres), dtype=np.int64),
            smoothing=smoothing,
        )

    @property
    def n_genres(self) -> int:
        return int(self.counts.shape[1])

    def observe(self, consumer_index: int, flag_indices: Sequence[int]) -> None:
        row = self.counts[consumer_index]
        for g in flag_indices:
            row[g] += 1
        np.cumsum(row, out=self.cumulative[consumer_index])

    def distribution(self, consumer_index: int) -> np.ndarray:
        """Smoothed click distribution over genres; always strictly positive."""
        row = self.counts[consumer_index].astype(np.float64) + self.smoothing
        return row / row.sum()


class RecommenderState:
    """One recommender: catalog view, click model, popularity index, fees."""

    def __init__(
        self,
        recommender_id: int,
        table: ItemTable,
        view: np.ndarray,
        click_model: GenreClickModel,
        clicked_mask: np.ndarray,
        exploration_probability: float,
    ):
        if not 0.0 <= exploration_probability <= 1.0:
            raise ValidationError(f"exploration probability must lie in [0,1], got {exploration_probability!r}")
        self.recommender_id = recommender_id
        self.table = table
        self.view = np.ascontiguousarray(np.sort(np.asarray(view, dtype=np.int32)))
        self.click_model = click_model
        self.clicked_mask = clicked_mask
        self.exploration_probability = float(exploration_probability)
        self.fee_income = 0.0
        self.popularity_index = build_popularity_index(table, self.view)
        self._arange1 = np.arange(1, table.n_genres + 1, dtype=np.float64)
        self._candidate_cache: dict[int, tuple[int, np.ndarray]] = {}

    @classmethod
    def build(
        cls,
        recommender_id: int,
        table: ItemTable,
        n_consumers: int,
        *,
        exploration_probability: float = 0.2,
        smoothing: float = 1.0,
        restrict_to_genre: int | None = None,
    ) -> "RecommenderState":
        """Standalone construction with freshly allocated model arrays."""
        if restrict_to_genre is None:
            view = np.arange(len(table), dtype=np.int32)
        else:
            bit = np.uint64(1 << restrict_to_genre)
            view = np.nonzero((table.masks & bit) != 0)[0].astype(np.int32)
        model = GenreClickModel.zeros(n_consumers, table.n_genres, smoothing)
        clicked = np.zeros(n_consumers, dtype=np.uint64)
        return cls(recommender_id, table, view, model, clicked, exploration_probability)

    # -- click model ------------------------------------------------------

    def observe_click(self, consumer_index: int, item_id: int) -> None:
        """Record a click on an item this recommender presented."""
        try:
            idx = self.table.id_to_index[item_id]
        except KeyError:
            raise ValidationError(f"unknown item id {item_id}") from None
        pos = int(np.searchsorted(self.view, idx))
        if pos >= self.view.shape[0] or int(self.view[pos]) != idx:
            raise ValidationError(f"item {item_id} is outside this recommender's catalog view")
        self._observe_click_index(consumer_index, idx)

    def _observe_click_index(self, consumer_index: int, item_index: int) -> None:
        self.click_model.observe(consumer_index, self.table.flags_list[item_index])
        self.clicked_mask[consumer_index] |= self.table.masks[item_index]

    def predict_genre_distribution(self, consumer_index: int) -> np.ndarray:
        return self.click_model.distribution(consumer_index)

    # -- recommendation ---------------------------------------------------

    def recommend(
        self,
        consumer_index: int,
        list_size: int,
        rng: np.random.Generator,
        excluded: Iterable[int] = (),
    ) -> list[int]:
        """Return ``list_size`` distinct item ids from this catalog view."""
        excluded_idx = set()
        for iid in excluded:
            idx = self.table.id_to_index.get(iid)
            if idx is not None:
                excluded_idx.add(idx)
        internal = self._recommend(consumer_index, list_size, rng, excluded_idx)
        return [int(self.table.item_ids[i]) for i in internal]

    def _recommend(
        self,
        consumer_index: int,
        list_size: int,
        rng: np.random.Generator,
        excluded: set[int] | frozenset[int] = frozenset(),
    ) -> list[int]:
        """Internal-index recommendation; the kernel-parity draw ritual."""
        view = self.view
        n_view = int(view.shape[0])
        available = n_view
        if excluded:
            for x in excluded:
                pos = int(np.searchsorted(view, x))
                if pos < n_view and int(view[pos]) == x:
                    available -= 1
        if available < list_size:
            raise ValidationError(
                f"recommender {self.recommender_id}: catalog view has {available} available items, "
                f"need {list_size}"
            )
        cm = int(self.clicked_mask[consumer_index])
        cum_row = self.click_model.cumulative[consumer_index]
        alpha = self.click_model.smoothing
        cums = cum_row.astype(np.float64) + alpha * self._arange1
        total = float(cums[-1])
        n_genres = self.table.n_genres

        chosen: list[int] = []
        chosen_set: set[int] = set(excluded)
        for _ in range(list_size):
            if rng.random() < self.exploration_probability:
                picked = self._explore_pick(consumer_index, cm, chosen_set, rng)
            else:
                picked = self._exploit_pick(cums, total, n_genres, chosen_set, rng)
            chosen.append(picked)
            chosen_set.add(picked)
        return chosen

    def _candidates(self, consumer_index: int, cm: int) -> np.ndarray:
        """View items sharing at least one genre with the clicked genres."""
        if cm == 0:
            return self.view
        cached = self._candidate_cache.get(consumer_index)
        if cached is not None and cached[0] == cm:
            return cached[1]
        cand = self.view[(self.table.masks[self.view] & np.uint64(cm)) != 0]
        self._candidate_cache[consumer_index] = (cm, cand)
        return cand

    def _uniform_from(self, cand: np.ndarray, removed_set: set[int], u: float) -> int:
        """The floor(u * n)-th member of cand (ascending) outside removed_set."""
        n_cand = int(cand.shape[0])
        removed_pos: list[int] = []
        for x in removed_set:
            pos = int(np.searchsorted(cand, x))
            if pos < n_cand and int(cand[pos]) == x:
                removed_pos.append(pos)
        n_rem = n_cand - len(removed_pos)
        if n_rem <= 0:
            return -1
        k = int(u * n_rem)
        if k >= n_rem:
            k = n_rem - 1
        for pos in sorted(removed_pos):
            if pos <= k:
                k += 1
        return int(cand[k])

    def _explore_pick(self, consumer_index: int, cm: int, chosen_set: set[int], rng) -> int:
        u = rng.random()
        picked = self._uniform_from(self._candidates(consumer_index, cm), chosen_set, u)
        if picked < 0:
            # every familiar-genre candidate is already listed: widen to the view
            picked = self._uniform_from(self.view, chosen_set, u)
        return picked

    def _exploit_pick(self, cums: np.ndarray, total: float, n_genres: int, chosen_set: set[int], rng) -> int:
        for _ in range(GENRE_RESAMPLE_CAP):
            r = rng.random() * total
            g = int(np.searchsorted(cums, r, side="right"))
            if g >= n_genres:
                g = n_genres - 1
            for idx in self.popularity_index[g]:
                if idx not in chosen_set:
                    return idx
        picked = self._uniform_from(self.view, chosen_set, rng.random())
        if picked < 0:
            raise ValidationError("catalog view exhausted during exploitation")
        return picked
