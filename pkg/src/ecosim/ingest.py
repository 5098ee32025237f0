"""MovieLens-100k-format ingestion and population construction.

Reads the classic three-file layout — a pipe-delimited item file with
trailing binary genre columns, a tab-delimited ratings file, and a genre
index file — and builds the simulated universe: the item catalog with
popularity counts, the sampled consumers with class-manipulated
preferences, and the provider partition of the catalog.

All files are decoded as Latin-1; the canonical dataset contains title
bytes that are not valid UTF-8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .model import (
    MAINSTREAM,
    NICHE,
    POPULATION_STREAM,
    Consumer,
    FeatureVector,
    Item,
    Population,
    PreferenceVector,
    Provider,
    SimConfig,
    ValidationError,
    normalize_preference,
    substream,
)

GENRE_FILE = "u.genre"
ITEM_FILE = "u.item"
RATINGS_FILE = "u.data"

# id | title | release date | video release date | url, then one column per genre
_ITEM_FIXED_FIELDS = 5

# ratings at or above this value mark an item as preferred when deriving
# a user's genre-frequency preference vector
PREFERRED_RATING_MIN = 4


class ParseError(ValueError):
    """Malformed dataset input; the message carries the offending line number."""


@dataclass
class RatingsTable:
    """Column-oriented view of the ratings file."""

    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray
    timestamps: np.ndarray

    def __len__(self) -> int:
        return int(self.users.shape[0])

    @property
    def records(self) -> list[tuple[int, int, int, int]]:
        return list(
            zip(
                self.users.tolist(),
                self.items.tolist(),
                self.ratings.tolist(),
                self.timestamps.tolist(),
            )
        )

    def distinct_users(self) -> np.ndarray:
        return np.unique(self.users)

    def popularity(self) -> dict[int, int]:
        """Rating count per item id."""
        ids, counts = np.unique(self.items, return_counts=True)
        return {int(i): int(c) for i, c in zip(ids, counts)}


def parse_genres(genre_bytes: bytes) -> list[str]:
    """Parse the genre index file into an ordered list of labels."""
    labels: list[tuple[str, int]] = []
    for lineno, raw in enumerate(genre_bytes.decode("latin-1").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split("|")
        if len(parts) != 2:
            raise ParseError(f"genre file line {lineno}: expected 'label|index', got {raw!r}")
        name, idx_text = parts
        try:
            idx = int(idx_text)
        except ValueError:
            raise ParseError(f"genre file line {lineno}: non-integer genre index {idx_text!r}") from None
        labels.append((name, idx))
    if not labels:
        raise ParseError("genre file contains no labels")
    labels.sort(key=lambda pair: pair[1])
    for expected, (_, idx) in enumerate(labels):
        if idx != expected:
            raise ParseError(f"genre indices must be contiguous from 0; missing index {expected}")
    return [name for name, _ in labels]


def parse_items(item_bytes: bytes, genre_bytes: bytes) -> tuple[dict[int, FeatureVector], list[str]]:
    """Parse the item file into per-item feature vectors.

    Every line must carry exactly the five fixed fields plus one binary
    column per genre label; a short or malformed line fails with its line
    number.
    """
    labels = parse_genres(genre_bytes)
    n_genres = len(labels)
    expected = _ITEM_FIXED_FIELDS + n_genres
    features: dict[int, FeatureVector] = {}
    for lineno, raw in enumerate(item_bytes.decode("latin-1").splitlines(), start=1):
        if not raw.strip():
            continue
        parts = raw.split("|")
        if len(parts) != expected:
            raise ParseError(f"item file line {lineno}: expected {expected} fields, got {len(parts)}")
        try:
            item_id = int(parts[0])
        except ValueError:
            raise ParseError(f"item file line {lineno}: non-integer item id {parts[0]!r}") from None
        if item_id in features:
            raise ParseError(f"item file line {lineno}: duplicate item id {item_id}")
        flags = []
        for col, text in enumerate(parts[_ITEM_FIXED_FIELDS:]):
            if text == "0":
                flags.append(0)
            elif text == "1":
                flags.append(1)
            else:
                raise ParseError(
                    f"item file line {lineno}: genre column {col} must be 0 or 1, got {text!r}"
                )
        features[item_id] = FeatureVector(tuple(flags))
    if not features:
        raise ParseError("item file contains no items")
    return features, labels


def parse_ratings(ratings_bytes: bytes) -> RatingsTable:
    """Parse the tab-delimited user/item/rating/timestamp file."""
    users: list[int] = []
    items: list[int] = []
    ratings: list[int] = []
    stamps: list[int] = []
    for lineno, raw in enumerate(ratings_bytes.decode("latin-1").splitlines(), start=1):
        if not raw.strip():
            continue
        parts = raw.split("\t")
        if len(parts) != 4:
            raise ParseError(f"ratings file line {lineno}: expected 4 tab-separated fields, got {len(parts)}")
        try:
            u, i, r, t = (int(p) for p in parts)
        except ValueError:
            raise ParseError(f"ratings file line {lineno}: non-integer field in {raw!r}") from None
        if not 1 <= r <= 5:
            raise ParseError(f"ratings file line {lineno}: rating {r} outside [1,5]")
        users.append(u)
        items.append(i)
        ratings.append(r)
        stamps.append(t)
    table = RatingsTable(
        users=np.asarray(users, dtype=np.int64),
        items=np.asarray(items, dtype=np.int64),
        ratings=np.asarray(ratings, dtype=np.int64),
        timestamps=np.asarray(stamps, dtype=np.int64),
    )
    if len(table):
        pairs = table.users * (table.items.max() + 1) + table.items
        if np.unique(pairs).shape[0] != len(table):
            raise ParseError("ratings file contains a duplicate (user, item) pair")
    return table


def build_raw_preferences(
    user_id: int,
    ratings: RatingsTable,
    catalog: Mapping[int, FeatureVector],
) -> PreferenceVector:
    """Genre-frequency preference vector over a user's preferred items.

    Preferred items are those the user rated at or above
    ``PREFERRED_RATING_MIN``; a user with none falls back to the frequency
    over all of their rated items.
    """
    mask = ratings.users == user_id
    if not mask.any():
        raise KeyError(f"user {user_id} has no ratings")
    preferred = ratings.items[mask & (ratings.ratings >= PREFERRED_RATING_MIN)]
    if preferred.shape[0] == 0:
        preferred = ratings.items[mask]
    first = next(iter(catalog.values()))
    counts = [0] * first.dimension
    for iid in preferred.tolist():
        try:
            flags = catalog[iid].flags
        except KeyError:
            raise KeyError(f"user {user_id}: rated item {iid} missing from the catalog") from None
        for g, v in enumerate(flags):
            if v:
                counts[g] += 1
    return normalize_preference(counts)


def sample_consumers(ratings: RatingsTable, n: int, rng: np.random.Generator) -> list[int]:
    """Draw n distinct user ids uniformly without replacement."""
    pool = ratings.distinct_users()
    if n > pool.shape[0]:
        raise ValidationError(f"cannot sample {n} consumers from {pool.shape[0]} distinct users")
    chosen = rng.choice(pool, size=n, replace=False)
    return [int(u) for u in chosen]


def apply_class_manipulation(
    preferences: Sequence[PreferenceVector],
    niche_genre_index: int,
    boost: float,
    shrink: float,
    niche_fraction: float,
) -> list[tuple[PreferenceVector, str]]:
    """Split consumers into niche/mainstream classes and reshape their tastes.

    The ceil(niche_fraction * n) inputs with the largest raw niche-genre
    weight become niche (ties keep input order): their niche weight is
    multiplied by ``boost`` and the vector renormalized. Everyone else is
    mainstream with the niche weight multiplied by ``shrink``, again
    renormalized.
    """
    n = len(preferences)
    if n == 0:
        return []
    dim = preferences[0].dimension
    if not 0 <= niche_genre_index < dim:
        raise ValidationError(f"niche genre index {niche_genre_index} outside [0, {dim})")
    k = math.ceil(niche_fraction * n)
    ranked = sorted(range(n), key=lambda i: (-preferences[i].weights[niche_genre_index], i))
    niche_positions = set(ranked[:k])
    out: list[tuple[PreferenceVector, str]] = []
    for i, pref in enumerate(preferences):
        factor = boost if i in niche_positions else shrink
        scaled = list(pref.weights)
        scaled[niche_genre_index] *= factor
        total = sum(scaled)
        out.append(
            (
                PreferenceVector(tuple(w / total for w in scaled)),
                NICHE if i in niche_positions else MAINSTREAM,
            )
        )
    return out


def assign_providers(
    catalog: Mapping[int, FeatureVector],
    niche_genre_index: int,
    provider_count: int,
    items_per_provider: int,
    rng: np.random.Generator,
    *,
    exclude_niche_from_pool: bool = True,
) -> list[Provider]:
    """Partition the catalog into providers.

    Providers 1..provider_count-1 each receive a disjoint uniform sample of
    ``items_per_provider`` items; the last provider receives every item
    carrying the niche genre flag. With ``exclude_niche_from_pool`` (the
    default) the sampled pool contains no niche-flagged items, so the niche
    supply is exclusive to the last provider; otherwise the niche provider
    receives whatever niche items the sampling left unassigned.
    """
    ids_sorted = sorted(catalog)
    niche_ids = [i for i in ids_sorted if catalog[i].flags[niche_genre_index] == 1]
    if not niche_ids:
        raise ValidationError("no catalog item carries the niche genre flag")
    if exclude_niche_from_pool:
        pool = [i for i in ids_sorted if catalog[i].flags[niche_genre_index] == 0]
    else:
        pool = list(ids_sorted)
    need = (provider_count - 1) * items_per_provider
    if len(pool) < need:
        raise ValidationError(
            f"provider assignment needs {need} items for {provider_count - 1} mainstream providers, "
            f"only {len(pool)} available"
        )
    perm = rng.permutation(np.asarray(pool, dtype=np.int64))
    providers: list[Provider] = []
    taken: set[int] = set()
    for p in range(provider_count - 1):
        block = perm[p * items_per_provider : (p + 1) * items_per_provider]
        ids = {int(x) for x in block}
        taken |= ids
        providers.append(Provider(provider_id=p + 1, item_ids=ids))
    niche_set = {i for i in niche_ids if i not in taken}
    if not niche_set:
        raise ValidationError("every niche item was taken by a mainstream provider; niche provider would be empty")
    providers.append(Provider(provider_id=provider_count, item_ids=niche_set))
    return providers


def load_dataset(data_dir: str | Path) -> tuple[dict[int, FeatureVector], list[str], RatingsTable]:
    """Read and parse the three dataset files from a directory."""
    root = Path(data_dir)
    paths = {name: root / name for name in (ITEM_FILE, GENRE_FILE, RATINGS_FILE)}
    for name, p in paths.items():
        if not p.is_file():
            raise FileNotFoundError(f"dataset file {name} not found in {root}")
    features, labels = parse_items(paths[ITEM_FILE].read_bytes(), paths[GENRE_FILE].read_bytes())
    ratings = parse_ratings(paths[RATINGS_FILE].read_bytes())
    return features, labels, ratings


def build_population(
    data_dir: str | Path,
    config: SimConfig,
    rng: np.random.Generator | None = None,
) -> Population:
    """Construct the full experiment population from a dataset directory.

    Draw order on the population stream is fixed: consumer sampling first,
    then provider assignment, so a given (seed, config) pair always yields
    the same universe.
    """
    features, labels, ratings = load_dataset(data_dir)
    if config.niche_genre not in labels:
        raise ValidationError(f"niche genre {config.niche_genre!r} not among dataset labels {labels}")
    niche_idx = labels.index(config.niche_genre)
    if rng is None:
        rng = substream(config.seed, POPULATION_STREAM)

    user_ids = sorted(sample_consumers(ratings, config.consumer_sample_size, rng))
    raw_prefs = [build_raw_preferences(uid, ratings, features) for uid in user_ids]
    classed = apply_class_manipulation(
        raw_prefs,
        niche_idx,
        config.niche_boost_factor,
        config.mainstream_shrink_factor,
        config.niche_fraction,
    )
    consumers = [
        Consumer(consumer_id=uid, preferences=pref, consumer_class=cls)
        for uid, (pref, cls) in zip(user_ids, classed)
    ]

    providers = assign_providers(
        features,
        niche_idx,
        config.provider_count,
        config.items_per_mainstream_provider,
        rng,
    )
    popularity = ratings.popularity()
    catalog: dict[int, Item] = {}
    for provider in providers:
        for iid in provider.item_ids:
            catalog[iid] = Item(
                item_id=iid,
                provider_id=provider.provider_id,
                features=features[iid],
                popularity=popularity.get(iid, 0),
            )

    population = Population(
        catalog=catalog,
        consumers=consumers,
        providers=providers,
        genre_labels=labels,
        niche_genre_index=niche_idx,
        niche_provider_id=config.provider_count,
    )
    population.check(expected_niche_count=math.ceil(config.niche_fraction * len(consumers)))
    return population
