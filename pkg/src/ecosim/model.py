"""Shared domain types for the ecosystem simulator.

Everything the rest of the package passes around is defined here: feature
and preference vectors, catalog items, consumers, providers, the fee
schedule, and the run configuration with its JSON round-trip and
validation.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Sequence

import numpy as np

NICHE = "niche"
MAINSTREAM = "mainstream"
CONSUMER_CLASSES = (NICHE, MAINSTREAM)

SELECTION_MODELS = ("none", "threshold", "ucb")

MAINSTREAM_RECOMMENDER_ID = 1
NICHE_RECOMMENDER_ID = 2

# Named substream domains. One master seed fans out into independent
# streams so that, e.g., adding a consumer does not disturb the draws of
# any other consumer or of the provider assignment.
POPULATION_STREAM = 0
RECOMMENDER_STREAM = 1
CONSUMER_STREAM = 2


def substream(seed: int, domain: int, index: int = 0) -> np.random.Generator:
    """Reproducible child stream of the master seed, keyed by (domain, index)."""
    ss = np.random.SeedSequence(seed, spawn_key=(domain, index))
    return np.random.Generator(np.random.PCG64(ss))


class ValidationError(ValueError):
    """Raised when a domain value violates one of its invariants."""


@dataclass(frozen=True)
class FeatureVector:
    """Fixed-length binary genre indicators for one item."""

    flags: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "flags", tuple(int(v) for v in self.flags))
        for i, v in enumerate(self.flags):
            if v not in (0, 1):
                raise ValidationError(f"feature flag at index {i} must be 0 or 1, got {v!r}")

    @property
    def dimension(self) -> int:
        return len(self.flags)

    def indices(self) -> tuple[int, ...]:
        """Ascending indices of the set flags."""
        return tuple(i for i, v in enumerate(self.flags) if v)


@dataclass(frozen=True)
class PreferenceVector:
    """Nonnegative genre weights summing to one."""

    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        total = 0.0
        for i, w in enumerate(self.weights):
            if not math.isfinite(w) or w < 0.0:
                raise ValidationError(f"preference weight at index {i} must be finite and >= 0, got {w!r}")
            total += w
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"preference weights must sum to 1 within 1e-9, got {total!r}")

    @property
    def dimension(self) -> int:
        return len(self.weights)


def normalize_preference(raw_weights: Sequence[float]) -> PreferenceVector:
    """Scale nonnegative raw weights so they sum to one.

    Rejects empty, negative, non-finite, and all-zero input; the error
    names the first offending index.
    """
    weights = [float(w) for w in raw_weights]
    if not weights:
        raise ValidationError("cannot normalize an empty weight vector")
    for i, w in enumerate(weights):
        if not math.isfinite(w):
            raise ValidationError(f"weight at index {i} is not finite: {w!r}")
        if w < 0.0:
            raise ValidationError(f"weight at index {i} is negative: {w!r}")
    total = 0.0
    for w in weights:
        total += w
    if total == 0.0:
        raise ValidationError("all weights are zero; nothing to normalize")
    return PreferenceVector(tuple(w / total for w in weights))


@dataclass(frozen=True)
class Item:
    """A recommendable catalog item owned by a single provider."""

    item_id: int
    provider_id: int
    features: FeatureVector
    popularity: int = 0

    def __post_init__(self):
        if self.popularity < 0:
            raise ValidationError(f"item {self.item_id}: popularity must be >= 0")


@dataclass
class Consumer:
    """A consumer with genre preferences and per-recommender bookkeeping.

    ``scores`` holds the running utility score per recommender,
    ``selection_counts`` the number of cycles each recommender has been
    the consumer's choice, and ``click_history`` the clicked item ids in
    day order.
    """

    consumer_id: int
    preferences: PreferenceVector
    consumer_class: str
    current_recommender: int = MAINSTREAM_RECOMMENDER_ID
    scores: dict[int, float] = field(default_factory=dict)
    selection_counts: dict[int, int] = field(default_factory=dict)
    click_history: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.consumer_class not in CONSUMER_CLASSES:
            raise ValidationError(
                f"consumer {self.consumer_id}: class must be one of {CONSUMER_CLASSES}, got {self.consumer_class!r}"
            )


@dataclass
class Provider:
    """An item provider with per-recommender display/click counters."""

    provider_id: int
    item_ids: set[int]
    display_counts: dict[int, int] = field(default_factory=dict)
    click_counts: dict[int, int] = field(default_factory=dict)
    utility: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.item_ids:
            raise ValidationError(f"provider {self.provider_id}: item set must be nonempty")

    def check_counters(self) -> None:
        for k, nd in self.display_counts.items():
            nc = self.click_counts.get(k, 0)
            if nc > nd:
                raise ValidationError(
                    f"provider {self.provider_id}: clicks ({nc}) exceed displays ({nd}) for recommender {k}"
                )


@dataclass(frozen=True)
class FeeSchedule:
    """Per-event provider fees and provider-side utilities.

    ``display_fee``/``click_fee`` are charged to the provider by the
    recommender per list appearance / per click; ``display_utility`` /
    ``click_utility`` are the value the provider gains from the same
    events.
    """

    display_fee: float = 0.01
    click_fee: float = 0.1
    display_utility: float = 0.1
    click_utility: float = 0.4

    def violations(self) -> list[str]:
        out = []
        for name in ("display_fee", "click_fee", "display_utility", "click_utility"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                out.append(f"fee_schedule.{name} must be finite and >= 0 (got {v!r})")
        return out


@dataclass(frozen=True)
class SimConfig:
    """Complete, serializable description of one simulation run."""

    days_per_cycle: int = 30
    cycles: int = 60
    list_size: int = 5
    fee_schedule: FeeSchedule = field(default_factory=FeeSchedule)
    switching_threshold: float = 0.04
    recency_bias: float = 1.0
    exploration_probability: float = 0.2
    niche_genre: str = "Western"
    niche_boost_factor: float = 4.0
    mainstream_shrink_factor: float = 0.25
    consumer_sample_size: int = 600
    niche_fraction: float = 0.1
    provider_count: int = 10
    items_per_mainstream_provider: int = 100
    selection_model: str = "none"
    seed: int = 1

    def to_json(self, **dumps_kwargs) -> str:
        return json.dumps(asdict(self), **dumps_kwargs)

    @classmethod
    def from_json(cls, text: str) -> "SimConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        if not isinstance(data, dict):
            raise ValidationError(f"config document must be a JSON object, got {type(data).__name__}")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        values = dict(data)
        if "fee_schedule" in values:
            fs = values["fee_schedule"]
            if not isinstance(fs, dict):
                raise ValidationError("fee_schedule must be a JSON object")
            fs_known = {f.name for f in fields(FeeSchedule)}
            fs_unknown = set(fs) - fs_known
            if fs_unknown:
                raise ValidationError(f"unknown fee_schedule fields: {sorted(fs_unknown)}")
            values["fee_schedule"] = FeeSchedule(**fs)
        return cls(**values)

    def replace(self, **overrides) -> "SimConfig":
        data = asdict(self)
        data["fee_schedule"] = self.fee_schedule
        if "fee_schedule" in overrides and isinstance(overrides["fee_schedule"], dict):
            overrides = dict(overrides)
            overrides["fee_schedule"] = FeeSchedule(**overrides["fee_schedule"])
        data.update(overrides)
        return SimConfig(**data)


def validate_config(config: SimConfig) -> list[str]:
    """Return every violated configuration invariant (empty list = ok)."""
    v: list[str] = []

    def positive_int(name):
        val = getattr(config, name)
        if not isinstance(val, int) or isinstance(val, bool) or val < 1:
            v.append(f"{name} ≥ 1 (got {val!r})")

    for name in (
        "days_per_cycle",
        "cycles",
        "list_size",
        "consumer_sample_size",
        "provider_count",
        "items_per_mainstream_provider",
    ):
        positive_int(name)

    v.extend(config.fee_schedule.violations())

    if not (isinstance(config.switching_threshold, (int, float)) and math.isfinite(config.switching_threshold)):
        v.append(f"switching_threshold must be finite (got {config.switching_threshold!r})")
    if not (
        isinstance(config.recency_bias, (int, float))
        and math.isfinite(config.recency_bias)
        and config.recency_bias >= 0
    ):
        v.append(f"recency_bias must be finite and ≥ 0 (got {config.recency_bias!r})")
    ep = config.exploration_probability
    if not (isinstance(ep, (int, float)) and math.isfinite(ep) and 0.0 <= ep <= 1.0):
        v.append(f"exploration_probability must lie in [0,1] (got {ep!r})")
    if not (isinstance(config.niche_genre, str) and config.niche_genre):
        v.append(f"niche_genre must be a nonempty genre label (got {config.niche_genre!r})")
    for name in ("niche_boost_factor", "mainstream_shrink_factor"):
        val = getattr(config, name)
        if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
            v.append(f"{name} must be a positive real (got {val!r})")
    nf = config.niche_fraction
    if not (isinstance(nf, (int, float)) and math.isfinite(nf) and 0.0 < nf < 1.0):
        v.append(f"niche_fraction must lie in (0,1) (got {nf!r})")
    if config.selection_model not in SELECTION_MODELS:
        v.append(f"selection_model must be one of {SELECTION_MODELS} (got {config.selection_model!r})")
    if not isinstance(config.seed, int) or isinstance(config.seed, bool) or config.seed < 0:
        v.append(f"seed must be a nonnegative integer (got {config.seed!r})")
    return v


@dataclass
class Population:
    """The simulated universe: catalog, consumers, providers, genre labels."""

    catalog: dict[int, Item]
    consumers: list[Consumer]
    providers: list[Provider]
    genre_labels: list[str]
    niche_genre_index: int
    niche_provider_id: int

    def check(self, expected_niche_count: int | None = None) -> None:
        """Raise if any structural invariant is violated."""
        owner: dict[int, int] = {}
        for p in self.providers:
            for iid in p.item_ids:
                if iid in owner:
                    raise ValidationError(f"item {iid} appears in providers {owner[iid]} and {p.provider_id}")
                owner[iid] = p.provider_id
                if iid not in self.catalog:
                    raise ValidationError(f"provider {p.provider_id} holds item {iid} missing from the catalog")
        for iid, item in self.catalog.items():
            if owner.get(iid) != item.provider_id:
                raise ValidationError(f"catalog item {iid} is not held by its provider {item.provider_id}")
        if expected_niche_count is not None:
            n_niche = sum(1 for c in self.consumers if c.consumer_class == NICHE)
            if n_niche != expected_niche_count:
                raise ValidationError(f"expected {expected_niche_count} niche consumers, found {n_niche}")
        for item in self.catalog.values():
            if item.features.dimension != len(self.genre_labels):
                raise ValidationError(f"item {item.item_id}: feature dimension != genre label count")
