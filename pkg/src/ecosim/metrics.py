"""Run outputs: CSV metric tables, the JSON-lines event log, the run
manifest, event-log replay, and sweep summaries.

File schemas are stable contracts consumed by the plotting package:

* ``consumer_daily.csv``: day, consumer_id, class, recommender_id, list_utility
* ``provider_cycle.csv``: cycle, provider_id, class, recommender_id,
  displays, clicks, utility (cumulative counters at each cycle end)
* ``switches.csv``: cycle, consumer_id, from, to
* ``events.jsonl``: one JSON object per consumer-day
* ``manifest.json``: full config, seed, and content hashes of all outputs

Float columns are written with nine significant digits.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from . import __version__
from .engine import RunResult
from .model import MAINSTREAM, NICHE, FeeSchedule

CONSUMER_DAILY = "consumer_daily.csv"
PROVIDER_CYCLE = "provider_cycle.csv"
SWITCHES = "switches.csv"
EVENTS = "events.jsonl"
MANIFEST = "manifest.json"


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_metrics(
    result: RunResult,
    out_dir: str | Path,
    *,
    log_events: bool = False,
    dataset_files: Mapping[str, str] | None = None,
    data_dir: str | None = None,
) -> dict:
    """Write all output files for a run and return the manifest dict."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    item_ids = result.item_ids
    classes = result.consumer_classes
    cons_ids = result.consumer_ids
    rec_ids = result.recommender_ids
    n_days, n_cons = result.out_util.shape

    with open(out / CONSUMER_DAILY, "w", newline="") as f:
        f.write("day,consumer_id,class,recommender_id,list_utility\n")
        for t in range(n_days):
            day = t + 1
            recs_row = result.out_rec[t]
            util_row = result.out_util[t]
            lines = []
            for j in range(n_cons):
                lines.append(
                    f"{day},{cons_ids[j]},{classes[j]},{rec_ids[recs_row[j]]},{_fmt(util_row[j])}\n"
                )
            f.writelines(lines)

    niche_pid = result.niche_provider_id
    with open(out / PROVIDER_CYCLE, "w", newline="") as f:
        f.write("cycle,provider_id,class,recommender_id,displays,clicks,utility\n")
        n_cycles = result.provider_cycle_utility.shape[0]
        for c in range(n_cycles):
            for i, pid in enumerate(result.provider_ids):
                cls = NICHE if pid == niche_pid else MAINSTREAM
                for x, rid in enumerate(rec_ids):
                    f.write(
                        f"{c + 1},{pid},{cls},{rid},"
                        f"{result.provider_cycle_displays[c, i, x]},"
                        f"{result.provider_cycle_clicks[c, i, x]},"
                        f"{_fmt(result.provider_cycle_utility[c, i, x])}\n"
                    )

    with open(out / SWITCHES, "w", newline="") as f:
        f.write("cycle,consumer_id,from,to\n")
        for ev in result.switch_events:
            f.write(f"{ev.cycle},{ev.consumer_id},{ev.from_recommender},{ev.to_recommender}\n")

    written = [CONSUMER_DAILY, PROVIDER_CYCLE, SWITCHES]

    if log_events:
        with open(out / EVENTS, "w") as f:
            for t in range(n_days):
                day = t + 1
                for j in range(n_cons):
                    record = {
                        "day": day,
                        "consumer_id": cons_ids[j],
                        "recommender_id": rec_ids[result.out_rec[t, j]],
                        "items": [int(item_ids[x]) for x in result.out_items[t, j]],
                        "clicked_item_id": int(item_ids[result.out_click[t, j]]),
                        "list_utility": float(result.out_util[t, j]),
                    }
                    f.write(json.dumps(record, separators=(",", ":")) + "\n")
        written.append(EVENTS)

    manifest = {
        "experiment": result.label,
        "seed": result.config.seed,
        "config": asdict(result.config),
        "recommender_ids": rec_ids,
        "kernel": result.kernel_name,
        "version": __version__,
        "data": {"dir": data_dir, "files": dict(dataset_files or {})},
        "row_counts": {
            CONSUMER_DAILY: n_days * n_cons,
            PROVIDER_CYCLE: int(result.provider_cycle_utility.size),
            SWITCHES: len(result.switch_events),
        },
        "outputs": {name: _sha256(out / name) for name in written},
    }
    with open(out / MANIFEST, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest


def replay_events(
    lines: Iterable[str],
    item_to_provider: Mapping[int, int],
    recommender_ids: Iterable[int],
    fees: FeeSchedule,
) -> dict:
    """Rebuild provider counters and utilities from an event log.

    Returns per-provider display/click counters, provider utilities, and
    recommender fee income, computed exactly as the engine's accounting
    does, from nothing but the logged events.
    """
    rec_ids = list(recommender_ids)
    displays: dict[tuple[int, int], int] = {}
    clicks: dict[tuple[int, int], int] = {}
    for line in lines:
        line = line.strip()
        if not line:
            continue
        ev = json.loads(line)
        rid = ev["recommender_id"]
        for iid in ev["items"]:
            key = (item_to_provider[iid], rid)
            displays[key] = displays.get(key, 0) + 1
        ckey = (item_to_provider[ev["clicked_item_id"]], rid)
        clicks[ckey] = clicks.get(ckey, 0) + 1

    providers = sorted({p for p, _ in displays} | {p for p, _ in clicks})
    utility = {
        (p, k): (fees.display_utility - fees.display_fee) * displays.get((p, k), 0)
        + (fees.click_utility - fees.click_fee) * clicks.get((p, k), 0)
        for p in providers
        for k in rec_ids
    }
    fee_income = {
        k: sum(
            fees.display_fee * displays.get((p, k), 0) + fees.click_fee * clicks.get((p, k), 0)
            for p in providers
        )
        for k in rec_ids
    }
    return {
        "displays": displays,
        "clicks": clicks,
        "utility": utility,
        "fee_income": fee_income,
    }


def last_day_summary(result: RunResult) -> dict:
    """Last-day mean utilities by consumer class and by provider class."""
    return {
        "consumer": result.last_day_class_means(),
        "provider": result.last_day_provider_class_means(),
    }


def config_fingerprint(config) -> str:
    """Hash of the config with the seed stripped; identifies an experiment."""
    data = asdict(config)
    data.pop("seed", None)
    return hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()[:16]


def summarize_sweep(records: list[dict]) -> dict:
    """Cross-seed summary of per-run last-day summaries.

    Each record carries: experiment, seed, config_fingerprint, and the
    ``last_day_summary`` output. Runs of one experiment must share a
    config fingerprint. Standard deviations are sample standard
    deviations; a single seed yields 0 by convention, flagged via
    ``single_seed``.
    """
    if not records:
        raise ValueError("cannot summarize an empty sweep")
    by_exp: dict[str, list[dict]] = {}
    for rec in records:
        by_exp.setdefault(rec["experiment"], []).append(rec)

    experiments = {}
    for exp, recs in sorted(by_exp.items()):
        fps = {r["config_fingerprint"] for r in recs}
        if len(fps) > 1:
            raise ValueError(f"experiment {exp}: runs have mismatched configs (fingerprints {sorted(fps)})")
        seeds = [r["seed"] for r in recs]
        if len(set(seeds)) != len(seeds):
            raise ValueError(f"experiment {exp}: duplicate seeds {seeds}")
        per_seed = {
            str(r["seed"]): {"consumer": r["consumer"], "provider": r["provider"]} for r in recs
        }
        cross: dict[str, dict] = {}
        for group in ("consumer", "provider"):
            cross[group] = {}
            for cls in (NICHE, MAINSTREAM):
                values = [r[group][cls] for r in recs]
                mean = float(np.mean(values))
                std = 0.0 if len(values) == 1 else float(np.std(values, ddof=1))
                cross[group][cls] = {"mean": mean, "std": std}
        experiments[exp] = {
            "seeds": sorted(seeds),
            "single_seed": len(seeds) == 1,
            "per_seed": per_seed,
            "cross_seed": cross,
            "config_fingerprint": recs[0]["config_fingerprint"],
        }
    return {"experiments": experiments, "n_experiments": len(experiments)}
