"""Deterministic synthetic dataset in the classic MovieLens-100k layout.

Emits ``u.item`` (pipe-delimited, 19 trailing binary genre columns),
``u.data`` (tab-delimited user/item/rating/timestamp), ``u.genre`` and
``u.info`` into a directory. Marginals are shaped like the real thing:
1682 items with a long-tailed popularity curve, 943 users with 20..500
ratings each (100,000 total), genre frequencies dominated by Drama and
Comedy, exactly 27 items carrying the Western flag, and a small minority
of users with a strong Western affinity.

Useful wherever the real dataset is not redistributable or not present:
the full pipeline, tests, and benchmarks run against these files through
the very same parsers.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

GENRE_LABELS = [
    "unknown",
    "Action",
    "Adventure",
    "Animation",
    "Children's",
    "Comedy",
    "Crime",
    "Documentary",
    "Drama",
    "Fantasy",
    "Film-Noir",
    "Horror",
    "Musical",
    "Mystery",
    "Romance",
    "Sci-Fi",
    "Thriller",
    "War",
    "Western",
]

# approximate item counts per genre in the canonical data, used as
# sampling weights for the synthetic catalog
_GENRE_WEIGHTS = {
    "Action": 251,
    "Adventure": 135,
    "Animation": 42,
    "Children's": 122,
    "Comedy": 505,
    "Crime": 109,
    "Documentary": 50,
    "Drama": 725,
    "Fantasy": 22,
    "Film-Noir": 24,
    "Horror": 92,
    "Musical": 56,
    "Mystery": 61,
    "Romance": 247,
    "Sci-Fi": 101,
    "Thriller": 251,
    "War": 71,
}

N_ITEMS = 1682
N_USERS = 943
N_RATINGS = 100_000
N_WESTERN = 27
N_UNKNOWN = 2
N_WESTERN_FANS = 90
# fans sample niche items far above their popularity weight: the setting
# wants a minority of consumers who are strongly selective for the niche
WESTERN_FAN_BOOST = 45.0

# a few Latin-1 titles so downstream decoding gets exercised
_ACCENTED = ["Cin\xe9ma Bleu", "Se\xf1or Octubre", "Caf\xe9 M\xfcnchen", "L'\xc9toile Rouge"]

DEFAULT_SEED = 977


def _item_genres(rng: np.random.Generator) -> list[tuple[int, ...]]:
    western_idx = GENRE_LABELS.index("Western")
    unknown_idx = GENRE_LABELS.index("unknown")
    names = list(_GENRE_WEIGHTS)
    weights = np.asarray([_GENRE_WEIGHTS[n] for n in names], dtype=np.float64)
    weights /= weights.sum()
    genre_ids = np.asarray([GENRE_LABELS.index(n) for n in names])

    flags: list[tuple[int, ...]] = []
    western_rows = set(rng.choice(N_ITEMS, size=N_WESTERN, replace=False).tolist())
    remaining = [i for i in range(N_ITEMS) if i not in western_rows]
    unknown_rows = set(rng.choice(np.asarray(remaining), size=N_UNKNOWN, replace=False).tolist())
    western_extra = [GENRE_LABELS.index(n) for n in ("Action", "Adventure", "Comedy", "Drama", "Romance")]
    for row in range(N_ITEMS):
        if row in western_rows:
            fl = {western_idx}
            if rng.random() < 0.4:
                fl.add(int(rng.choice(western_extra)))
            flags.append(tuple(sorted(fl)))
            continue
        if row in unknown_rows:
            flags.append((unknown_idx,))
            continue
        k = int(rng.choice([1, 2, 3], p=[0.45, 0.40, 0.15]))
        picks = rng.choice(genre_ids, size=k, replace=False, p=weights)
        flags.append(tuple(sorted(int(g) for g in picks)))
    return flags


def _popularity_weights(rng: np.random.Generator, flags: list[tuple[int, ...]]) -> np.ndarray:
    """Zipf-like weights; Western items are kept out of the top ranks."""
    western_idx = GENRE_LABELS.index("Western")
    ranks = np.empty(N_ITEMS, dtype=np.int64)
    western = [i for i, fl in enumerate(flags) if western_idx in fl]
    others = [i for i, fl in enumerate(flags) if western_idx not in fl]
    top = int(N_ITEMS * 0.4)
    tail_ranks = list(range(top, N_ITEMS))
    rng.shuffle(tail_ranks)
    for i, row in enumerate(western):
        ranks[row] = tail_ranks[i]
    head_ranks = list(range(top)) + tail_ranks[len(western) :]
    rng.shuffle(head_ranks)
    for i, row in enumerate(others):
        ranks[row] = head_ranks[i]
    w = 1.0 / np.power(ranks + 10.0, 0.85)
    return w / w.sum()


def generate(out_dir: str | Path, seed: int = DEFAULT_SEED) -> Path:
    """Write the four dataset files into ``out_dir`` and return the path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    n_genres = len(GENRE_LABELS)

    flags = _item_genres(rng)
    pop_w = _popularity_weights(rng, flags)
    flag_matrix = np.zeros((N_ITEMS, n_genres), dtype=np.float64)
    for i, fl in enumerate(flags):
        for g in fl:
            flag_matrix[i, g] = 1.0
    flag_counts = flag_matrix.sum(axis=1)

    # user affinities: a few liked genres each; a fixed minority likes Western
    western_idx = GENRE_LABELS.index("Western")
    names = list(_GENRE_WEIGHTS)
    gw = np.asarray([_GENRE_WEIGHTS[n] for n in names], dtype=np.float64)
    gw /= gw.sum()
    genre_ids = np.asarray([GENRE_LABELS.index(n) for n in names])
    western_fans = set(rng.choice(N_USERS, size=N_WESTERN_FANS, replace=False).tolist())

    counts = np.clip(np.round(rng.lognormal(np.log(75.0), 0.72, N_USERS)), 20, 500).astype(np.int64)
    # trim or pad the largest raters until the total is exact
    diff = int(counts.sum()) - N_RATINGS
    order = np.argsort(-counts)
    i = 0
    while diff != 0:
        u = order[i % N_USERS]
        if diff > 0 and counts[u] > 20:
            counts[u] -= 1
            diff -= 1
        elif diff < 0 and counts[u] < 500:
            counts[u] += 1
            diff += 1
        i += 1

    users_col: list[np.ndarray] = []
    items_col: list[np.ndarray] = []
    ratings_col: list[np.ndarray] = []
    log_pop = np.log(pop_w)
    western_col = flag_matrix[:, western_idx]
    for u in range(N_USERS):
        n_liked = int(rng.integers(2, 5))
        liked = set(rng.choice(genre_ids, size=n_liked, replace=False, p=gw).tolist())
        if u in western_fans:
            liked.add(western_idx)
        liked_vec = np.zeros(n_genres)
        for g in liked:
            liked_vec[g] = 1.0
        overlap = flag_matrix @ liked_vec / flag_counts
        score = log_pop + np.log(0.3 + 1.7 * overlap)
        if u in western_fans:
            score = score + western_col * np.log(WESTERN_FAN_BOOST)
        # weighted sampling without replacement via Gumbel keys
        keys = score + rng.gumbel(size=N_ITEMS)
        picked = np.argpartition(-keys, counts[u])[: counts[u]]
        p_like = 0.25 + 0.6 * (overlap[picked] > 0)
        if u in western_fans:
            p_like = np.maximum(p_like, 0.92 * western_col[picked])
        liked_mask = rng.random(picked.shape[0]) < p_like
        r = np.where(
            liked_mask,
            rng.choice([4, 5], size=picked.shape[0], p=[0.55, 0.45]),
            rng.integers(1, 4, size=picked.shape[0]),
        )
        users_col.append(np.full(picked.shape[0], u + 1, dtype=np.int64))
        items_col.append(picked + 1)
        ratings_col.append(r.astype(np.int64))

    users = np.concatenate(users_col)
    items = np.concatenate(items_col)
    ratings = np.concatenate(ratings_col)
    stamps = 874_000_000 + np.arange(users.shape[0], dtype=np.int64) * 7

    with open(out / "u.genre", "w", encoding="latin-1", newline="\n") as f:
        for g, label in enumerate(GENRE_LABELS):
            f.write(f"{label}|{g}\n")

    years = rng.integers(1930, 1999, N_ITEMS)
    with open(out / "u.item", "w", encoding="latin-1", newline="\n") as f:
        for i in range(N_ITEMS):
            if i < len(_ACCENTED):
                title = f"{_ACCENTED[i]} ({years[i]})"
            else:
                title = f"Feature No. {i + 1:04d} ({years[i]})"
            cols = "|".join("1" if flag_matrix[i, g] else "0" for g in range(n_genres))
            f.write(f"{i + 1}|{title}|01-Jan-{years[i]}||http://example.com/title/{i + 1}|{cols}\n")

    with open(out / "u.data", "w", encoding="latin-1", newline="\n") as f:
        lines = [
            f"{users[i]}\t{items[i]}\t{ratings[i]}\t{stamps[i]}\n" for i in range(users.shape[0])
        ]
        f.writelines(lines)

    with open(out / "u.info", "w", encoding="latin-1", newline="\n") as f:
        f.write(f"{N_USERS} users\n{N_ITEMS} items\n{users.shape[0]} ratings\n")
    return out
