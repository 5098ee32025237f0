"""The simulation loop.

A run advances day by day: every consumer receives one list from their
current recommender, clicks exactly one item, and updates their running
score for that recommender. Days group into cycles; at each cycle end the
configured selection rule may move consumers between recommenders.
Provider display/click counters accrue continuously and provider
utilities are recomputed from the cumulative counters at every cycle end.

The per-day inner loop is delegated to a kernel (compiled or pure
Python); everything here is kernel-agnostic bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import choice, kernels
from .model import (
    CONSUMER_STREAM,
    MAINSTREAM,
    MAINSTREAM_RECOMMENDER_ID,
    NICHE,
    NICHE_RECOMMENDER_ID,
    RECOMMENDER_STREAM,
    Consumer,
    FeeSchedule,
    Population,
    Provider,
    SimConfig,
    ValidationError,
    validate_config,
)
from .recommenders import GenreClickModel, ItemTable, RecommenderState


class ConfigError(ValueError):
    """Configuration failed validation; the message lists every violation."""


def accrue_provider_utility(provider: Provider, fees: FeeSchedule) -> dict[int, float]:
    """Recompute per-recommender provider utility from cumulative counters."""
    margins_d = fees.display_utility - fees.display_fee
    margins_c = fees.click_utility - fees.click_fee
    out: dict[int, float] = {}
    for k in set(provider.display_counts) | set(provider.click_counts):
        out[k] = margins_d * provider.display_counts.get(k, 0) + margins_c * provider.click_counts.get(k, 0)
    return out


def accrue_recommender_utility(recommender_id: int, providers: Sequence[Provider], fees: FeeSchedule) -> float:
    """Total fee income a recommender has assessed on providers."""
    total = 0.0
    for p in providers:
        total += fees.display_fee * p.display_counts.get(recommender_id, 0)
        total += fees.click_fee * p.click_counts.get(recommender_id, 0)
    return total


@dataclass
class SwitchEvent:
    cycle: int
    consumer_id: int
    from_recommender: int
    to_recommender: int


@dataclass
class DayRecord:
    """One day's outcomes: per-consumer service and per-provider deltas."""

    day: int
    per_consumer: list[tuple[int, int, list[int], int, float]]
    per_provider_delta: dict[tuple[int, int], tuple[int, int]]


class _DayRecords(Sequence):
    """Lazy sequence materializing DayRecord objects from the run arrays."""

    def __init__(self, result: "RunResult"):
        self._r = result

    def __len__(self) -> int:
        return self._r.out_util.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        r = self._r
        n_days = len(self)
        if i < 0:
            i += n_days
        if not 0 <= i < n_days:
            raise IndexError(i)
        item_ids = r.item_ids
        per_consumer = []
        deltas: dict[tuple[int, int], list[int]] = {}
        for j, cid in enumerate(r.consumer_ids):
            rid = int(r.recommender_ids[r.out_rec[i, j]])
            items = [int(item_ids[x]) for x in r.out_items[i, j]]
            clicked = int(item_ids[r.out_click[i, j]])
            per_consumer.append((int(cid), rid, items, clicked, float(r.out_util[i, j])))
            for x in r.out_items[i, j]:
                key = (int(r.provider_ids[r.provider_of[x]]), rid)
                deltas.setdefault(key, [0, 0])[0] += 1
            ckey = (int(r.provider_ids[r.provider_of[r.out_click[i, j]]]), rid)
            deltas.setdefault(ckey, [0, 0])[1] += 1
        return DayRecord(
            day=i + 1,
            per_consumer=per_consumer,
            per_provider_delta={k: (v[0], v[1]) for k, v in deltas.items()},
        )


@dataclass
class RunResult:
    """Everything a completed run produced."""

    config: SimConfig
    label: str
    recommender_ids: list[int]
    kernel_name: str
    consumer_ids: list[int]
    consumer_classes: list[str]
    provider_ids: list[int]
    niche_provider_id: int
    item_ids: np.ndarray
    provider_of: np.ndarray
    # day-indexed arrays (internal indices)
    out_rec: np.ndarray
    out_items: np.ndarray
    out_click: np.ndarray
    out_util: np.ndarray
    # cycle-indexed series
    provider_cycle_displays: np.ndarray
    provider_cycle_clicks: np.ndarray
    provider_cycle_utility: np.ndarray
    fee_income_cycle: np.ndarray
    # per-class consumer series
    class_daily_mean: np.ndarray
    switch_events: list[SwitchEvent]
    final_consumers: list[Consumer]
    final_providers: list[Provider]
    final_recommenders: list[RecommenderState]

    @property
    def day_records(self) -> Sequence[DayRecord]:
        return _DayRecords(self)

    @property
    def total_days(self) -> int:
        return int(self.out_util.shape[0])

    def cumulative_class_utility(self) -> np.ndarray:
        """Running sum over days of the per-class mean list utility."""
        return np.cumsum(self.class_daily_mean, axis=0)

    def last_day_class_means(self) -> dict[str, float]:
        classes = np.asarray(self.consumer_classes)
        last = self.out_util[-1]
        return {
            NICHE: float(last[classes == NICHE].mean()),
            MAINSTREAM: float(last[classes == MAINSTREAM].mean()),
        }

    def provider_totals(self) -> dict[int, float]:
        """Final provider utility summed over recommenders."""
        final = self.provider_cycle_utility[-1].sum(axis=1)
        return {int(pid): float(final[i]) for i, pid in enumerate(self.provider_ids)}

    def last_day_provider_class_means(self) -> dict[str, float]:
        """Mean utility earned during the final day, by provider class."""
        fees = self.config.fee_schedule
        n_prov = len(self.provider_ids)
        n_recs = len(self.recommender_ids)
        d = np.zeros((n_prov, n_recs), dtype=np.int64)
        c = np.zeros((n_prov, n_recs), dtype=np.int64)
        items = self.out_items[-1]
        recs = self.out_rec[-1]
        clicked = self.out_click[-1]
        for j in range(items.shape[0]):
            k = recs[j]
            for x in items[j]:
                d[self.provider_of[x], k] += 1
            c[self.provider_of[clicked[j]], k] += 1
        util = (fees.display_utility - fees.display_fee) * d + (fees.click_utility - fees.click_fee) * c
        per_provider = util.sum(axis=1)
        niche_i = self.provider_ids.index(self.niche_provider_id)
        mains = [v for i, v in enumerate(per_provider) if i != niche_i]
        return {
            NICHE: float(per_provider[niche_i]),
            MAINSTREAM: float(np.mean(mains)) if mains else 0.0,
        }


class SimState:
    """Array-oriented run state shared by the day kernels."""

    def __init__(self, config: SimConfig, population: Population, recommender_ids: list[int]):
        self.config = config
        self.list_size = config.list_size
        self.beta = float(config.recency_bias)
        self.n_genres = len(population.genre_labels)

        consumers = sorted(population.consumers, key=lambda c: c.consumer_id)
        self.consumers = consumers
        self.n_consumers = len(consumers)
        if self.n_consumers == 0:
            raise ValidationError("population has no consumers")
        self.consumer_ids = [c.consumer_id for c in consumers]
        self.consumer_classes = [c.consumer_class for c in consumers]

        providers = sorted(population.providers, key=lambda p: p.provider_id)
        self.providers = providers
        self.provider_ids = [p.provider_id for p in providers]
        self.niche_provider_id = population.niche_provider_id
        provider_index = {pid: i for i, pid in enumerate(self.provider_ids)}

        self.table = ItemTable.from_items(population.catalog.values(), self.n_genres, provider_index)
        self.provider_of = self.table.providers.tolist()

        self.recommender_ids = list(recommender_ids)
        n_recs = len(self.recommender_ids)
        self.n_recs = n_recs
        n_cons = self.n_consumers

        self.prefs = np.asarray([c.preferences.weights for c in consumers], dtype=np.float64)
        self.prefs_rows = [list(map(float, row)) for row in self.prefs]

        self.counts = np.zeros((n_recs, n_cons, self.n_genres), dtype=np.int64)
        self.cumulative = np.zeros_like(self.counts)
        self.clicked_mask = np.zeros((n_recs, n_cons), dtype=np.uint64)
        self.scores = np.zeros((n_cons, n_recs), dtype=np.float64)
        self.sel_counts = np.zeros((n_cons, n_recs), dtype=np.int64)
        self.last_used = np.zeros((n_cons, n_recs), dtype=np.int64)
        self.displays = np.zeros((len(providers), n_recs), dtype=np.int64)
        self.clicks = np.zeros((len(providers), n_recs), dtype=np.int64)

        self.recommenders: list[RecommenderState] = []
        view_segments: list[np.ndarray] = []
        for ki, rid in enumerate(self.recommender_ids):
            if rid == NICHE_RECOMMENDER_ID:
                bit = np.uint64(1 << population.niche_genre_index)
                view = np.nonzero((self.table.masks & bit) != 0)[0].astype(np.int32)
            else:
                view = np.arange(len(self.table), dtype=np.int32)
            if view.shape[0] < config.list_size:
                raise ValidationError(
                    f"recommender {rid}: catalog view has {view.shape[0]} items, "
                    f"smaller than list size {config.list_size}"
                )
            model = GenreClickModel(self.counts[ki], self.cumulative[ki], smoothing=1.0)
            state = RecommenderState(
                recommender_id=rid,
                table=self.table,
                view=view,
                click_model=model,
                clicked_mask=self.clicked_mask[ki],
                exploration_probability=config.exploration_probability,
            )
            self.recommenders.append(state)
            view_segments.append(state.view)

        # CSR layouts for the compiled kernel
        self.view_ptr = np.zeros(n_recs + 1, dtype=np.int32)
        for ki, seg in enumerate(view_segments):
            self.view_ptr[ki + 1] = self.view_ptr[ki] + seg.shape[0]
        self.view_items = (
            np.concatenate(view_segments).astype(np.int32)
            if view_segments
            else np.zeros(0, dtype=np.int32)
        )
        pop_ptr = [0]
        pop_items: list[int] = []
        for state in self.recommenders:
            for g in range(self.n_genres):
                pop_items.extend(state.popularity_index[g])
                pop_ptr.append(len(pop_items))
        self.pop_ptr = np.asarray(pop_ptr, dtype=np.int32)
        self.pop_items = np.asarray(pop_items, dtype=np.int32)

        self.explore_prob = float(config.exploration_probability)
        self.alpha = 1.0

        # all consumers start on the first recommender (the mainstream one)
        self.current_rec = np.zeros(n_cons, dtype=np.int32)

        total_days = config.days_per_cycle * config.cycles
        self.out_rec = np.zeros((total_days, n_cons), dtype=np.int32)
        self.out_items = np.zeros((total_days, n_cons, config.list_size), dtype=np.int32)
        self.out_click = np.zeros((total_days, n_cons), dtype=np.int32)
        self.out_util = np.zeros((total_days, n_cons), dtype=np.float64)

        seed = config.seed
        self.rec_bitgens = [
            np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(RECOMMENDER_STREAM, rid)))
            for rid in self.recommender_ids
        ]
        self.cons_bitgens = [
            np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(CONSUMER_STREAM, cid)))
            for cid in self.consumer_ids
        ]
        self.rec_gens = [np.random.Generator(bg) for bg in self.rec_bitgens]
        self.cons_gens = [np.random.Generator(bg) for bg in self.cons_bitgens]


def default_recommender_ids(config: SimConfig) -> list[int]:
    if config.selection_model == "none":
        return [MAINSTREAM_RECOMMENDER_ID]
    return [MAINSTREAM_RECOMMENDER_ID, NICHE_RECOMMENDER_ID]


def run_experiment(
    config: SimConfig,
    population: Population,
    recommender_ids: list[int] | None = None,
    label: str = "",
    kernel: str | None = None,
) -> RunResult:
    """Run the full day/cycle loop and return a deterministic result."""
    violations = validate_config(config)
    if violations:
        raise ConfigError("invalid config: " + "; ".join(violations))
    if recommender_ids is None:
        recommender_ids = default_recommender_ids(config)
    if sorted(recommender_ids) != recommender_ids or len(set(recommender_ids)) != len(recommender_ids):
        raise ValidationError("recommender ids must be distinct and ascending")

    state = SimState(config, population, recommender_ids)
    kern = kernels.get_kernel(kernel)
    fees = config.fee_schedule
    n_recs = state.n_recs
    n_cons = state.n_consumers
    D = config.days_per_cycle
    C = config.cycles
    arange_cons = np.arange(n_cons)

    prov_cycle_d = np.zeros((C, len(state.providers), n_recs), dtype=np.int64)
    prov_cycle_c = np.zeros_like(prov_cycle_d)
    prov_cycle_u = np.zeros((C, len(state.providers), n_recs), dtype=np.float64)
    fee_cycle = np.zeros((C, n_recs), dtype=np.float64)
    switch_events: list[SwitchEvent] = []

    for cycle in range(1, C + 1):
        cur = state.current_rec
        np.add.at(state.sel_counts, (arange_cons, cur), 1)
        state.last_used[arange_cons, cur] = cycle

        kern.run_days(state, (cycle - 1) * D, cycle * D)

        prov_cycle_d[cycle - 1] = state.displays
        prov_cycle_c[cycle - 1] = state.clicks
        prov_cycle_u[cycle - 1] = (fees.display_utility - fees.display_fee) * state.displays + (
            fees.click_utility - fees.click_fee
        ) * state.clicks
        fee_cycle[cycle - 1] = fees.display_fee * state.displays.sum(axis=0) + fees.click_fee * state.clicks.sum(
            axis=0
        )

        if config.selection_model != "none" and n_recs > 1:
            t = cycle * D
            for j in range(n_cons):
                k = int(state.current_rec[j])
                if config.selection_model == "threshold":
                    others = [
                        state.recommender_ids[x] for x in range(n_recs) if x != k
                    ]
                    last_used = {
                        state.recommender_ids[x]: int(state.last_used[j, x]) for x in range(n_recs)
                    }
                    nxt_id = choice.threshold_decide(
                        float(state.scores[j, k]),
                        config.switching_threshold,
                        state.recommender_ids[k],
                        others,
                        last_used,
                    )
                else:
                    ucb = {
                        state.recommender_ids[x]: choice.ucb_score(
                            float(state.scores[j, x]), t, int(state.sel_counts[j, x])
                        )
                        for x in range(n_recs)
                    }
                    nxt_id = choice.ucb_decide(ucb)
                nxt = state.recommender_ids.index(nxt_id)
                if nxt != k:
                    switch_events.append(
                        SwitchEvent(cycle, state.consumer_ids[j], state.recommender_ids[k], nxt_id)
                    )
                    state.current_rec[j] = nxt

    # materialize final object states
    final_consumers = []
    for j, c in enumerate(state.consumers):
        final_consumers.append(
            Consumer(
                consumer_id=c.consumer_id,
                preferences=c.preferences,
                consumer_class=c.consumer_class,
                current_recommender=state.recommender_ids[int(state.current_rec[j])],
                scores={rid: float(state.scores[j, x]) for x, rid in enumerate(state.recommender_ids)},
                selection_counts={
                    rid: int(state.sel_counts[j, x]) for x, rid in enumerate(state.recommender_ids)
                },
                click_history=[int(state.table.item_ids[i]) for i in state.out_click[:, j]],
            )
        )
    final_providers = []
    for i, p in enumerate(state.providers):
        prov = Provider(
            provider_id=p.provider_id,
            item_ids=set(p.item_ids),
            display_counts={rid: int(state.displays[i, x]) for x, rid in enumerate(state.recommender_ids)},
            click_counts={rid: int(state.clicks[i, x]) for x, rid in enumerate(state.recommender_ids)},
        )
        prov.utility = accrue_provider_utility(prov, fees)
        prov.check_counters()
        final_providers.append(prov)
    for x, rec in enumerate(state.recommenders):
        rec.fee_income = accrue_recommender_utility(rec.recommender_id, final_providers, fees)

    classes = np.asarray(state.consumer_classes)
    class_daily = np.zeros((state.out_util.shape[0], 2), dtype=np.float64)
    niche_mask = classes == NICHE
    main_mask = ~niche_mask
    if niche_mask.any():
        class_daily[:, 0] = state.out_util[:, niche_mask].mean(axis=1)
    if main_mask.any():
        class_daily[:, 1] = state.out_util[:, main_mask].mean(axis=1)

    return RunResult(
        config=config,
        label=label,
        recommender_ids=list(state.recommender_ids),
        kernel_name=kern.KERNEL_NAME,
        consumer_ids=list(state.consumer_ids),
        consumer_classes=list(state.consumer_classes),
        provider_ids=list(state.provider_ids),
        niche_provider_id=state.niche_provider_id,
        item_ids=state.table.item_ids,
        provider_of=state.table.providers,
        out_rec=state.out_rec,
        out_items=state.out_items,
        out_click=state.out_click,
        out_util=state.out_util,
        provider_cycle_displays=prov_cycle_d,
        provider_cycle_clicks=prov_cycle_c,
        provider_cycle_utility=prov_cycle_u,
        fee_income_cycle=fee_cycle,
        class_daily_mean=class_daily,
        switch_events=switch_events,
        final_consumers=final_consumers,
        final_providers=final_providers,
        final_recommenders=state.recommenders,
    )
