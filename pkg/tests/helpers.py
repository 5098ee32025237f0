"""Shared test helpers: dataset discovery, toy universes, acceptance report."""

from __future__ import annotations

import os
from pathlib import Path

from ecosim.model import (
    MAINSTREAM,
    NICHE,
    Consumer,
    FeatureVector,
    Item,
    Population,
    PreferenceVector,
    Provider,
    SimConfig,
)

# one pass/fail line per acceptance criterion, printed at session end
ACCEPTANCE_REPORT: list[str] = []


def find_real_dataset() -> Path | None:
    candidates = []
    env = os.environ.get("ECOSIM_DATA")
    if env:
        candidates.append(Path(env))
    candidates.append(Path(__file__).resolve().parent.parent / "ml-100k")
    for root in candidates:
        if all((root / name).is_file() for name in ("u.item", "u.genre", "u.data")):
            return root
    return None


REAL_DATA_DIR = find_real_dataset()


def make_toy_population() -> Population:
    """Two genres, six items, four consumers, two providers.

    Genre 1 is the niche genre; provider 2 holds the three items flagged
    with it.
    """
    flags = [
        (1, 0),
        (1, 0),
        (1, 0),
        (0, 1),
        (0, 1),
        (1, 1),
    ]
    pops = [30, 20, 10, 8, 4, 2]
    providers = [
        Provider(provider_id=1, item_ids={1, 2, 3}),
        Provider(provider_id=2, item_ids={4, 5, 6}),
    ]
    catalog = {}
    for i, (fl, pop) in enumerate(zip(flags, pops), start=1):
        pid = 1 if i <= 3 else 2
        catalog[i] = Item(item_id=i, provider_id=pid, features=FeatureVector(fl), popularity=pop)
    consumers = [
        Consumer(1, PreferenceVector((0.9, 0.1)), MAINSTREAM),
        Consumer(2, PreferenceVector((0.7, 0.3)), MAINSTREAM),
        Consumer(3, PreferenceVector((0.5, 0.5)), MAINSTREAM),
        Consumer(4, PreferenceVector((0.2, 0.8)), NICHE),
    ]
    return Population(
        catalog=catalog,
        consumers=consumers,
        providers=providers,
        genre_labels=["Broad", "Narrow"],
        niche_genre_index=1,
        niche_provider_id=2,
    )


def toy_config(**overrides) -> SimConfig:
    base = dict(
        days_per_cycle=2,
        cycles=2,
        list_size=2,
        niche_genre="Narrow",
        exploration_probability=0.0,
        selection_model="threshold",
        consumer_sample_size=4,
        provider_count=2,
        items_per_mainstream_provider=3,
        seed=11,
    )
    base.update(overrides)
    return SimConfig(**base)
