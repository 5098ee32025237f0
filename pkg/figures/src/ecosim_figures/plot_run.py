"""Four-panel summary of one run.

Top: last-day consumer utility box plot by class, and the cumulative
per-day mean consumer utility by class. Bottom: final provider utility
strip plot by class (summed over recommenders), and cumulative provider
utility lines per provider. Threshold-switching runs get a dashed line at
the switching threshold on the box panel.

Usage: ``plot_run <run_dir> <out.png>``
"""

from __future__ import annotations

import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import CLASS_COLORS, read_consumer_daily, read_manifest, read_provider_cycle

CLASSES = ["niche", "mainstream"]


def plot_run(run_dir: str | Path, out_path: str | Path):
    """Render the four-panel figure and return the matplotlib Figure."""
    run_dir = Path(run_dir)
    consumer = read_consumer_daily(run_dir)
    provider = read_provider_cycle(run_dir)
    manifest = read_manifest(run_dir)

    fig, axes = plt.subplots(2, 2, figsize=(11, 8))
    (ax_box, ax_ccum), (ax_strip, ax_pcum) = axes
    title = manifest.get("experiment") or run_dir.name
    fig.suptitle(f"{title} (seed {manifest.get('seed')})")

    # last-day consumer utility by class
    last_day = max(consumer["day"])
    per_class = {cls: [] for cls in CLASSES}
    daily = defaultdict(lambda: {cls: [] for cls in CLASSES})
    for day, cls, u in zip(consumer["day"], consumer["class"], consumer["list_utility"]):
        daily[day][cls].append(u)
        if day == last_day:
            per_class[cls].append(u)
    box = ax_box.boxplot(
        [per_class[cls] for cls in CLASSES], tick_labels=CLASSES, patch_artist=True
    )
    for patch, cls in zip(box["boxes"], CLASSES):
        patch.set_facecolor(CLASS_COLORS[cls])
    ax_box.set_title("consumer utility, last day")
    ax_box.set_ylabel("list utility")
    config = manifest.get("config", {})
    if config.get("selection_model") == "threshold":
        ax_box.axhline(config["switching_threshold"], linestyle="--", color="black", linewidth=1)

    # cumulative per-day mean consumer utility
    days = sorted(daily)
    for cls in CLASSES:
        means = [float(np.mean(daily[d][cls])) if daily[d][cls] else 0.0 for d in days]
        ax_ccum.plot(days, np.cumsum(means), label=cls, color=CLASS_COLORS[cls])
    ax_ccum.set_title("cumulative mean consumer utility")
    ax_ccum.set_xlabel("day")
    ax_ccum.legend()

    # provider utility: final totals by class and cumulative lines
    last_cycle = max(provider["cycle"])
    totals = defaultdict(float)
    classes_of = {}
    series = defaultdict(lambda: defaultdict(float))
    for cycle, pid, cls, u in zip(
        provider["cycle"], provider["provider_id"], provider["class"], provider["utility"]
    ):
        series[pid][cycle] += u
        classes_of[pid] = cls
        if cycle == last_cycle:
            totals[pid] += u
    rng = np.random.default_rng(0)
    for x, cls in enumerate(CLASSES):
        values = [totals[pid] for pid in totals if classes_of[pid] == cls]
        jitter = rng.uniform(-0.08, 0.08, len(values))
        ax_strip.scatter(np.full(len(values), x) + jitter, values, color=CLASS_COLORS[cls], alpha=0.8)
    ax_strip.set_xticks(range(len(CLASSES)), CLASSES)
    ax_strip.set_title("provider utility, end of run")
    ax_strip.set_ylabel("utility")

    for pid in sorted(series):
        cycles = sorted(series[pid])
        ax_pcum.plot(
            cycles,
            [series[pid][c] for c in cycles],
            color=CLASS_COLORS[classes_of[pid]],
            alpha=0.8,
        )
    ax_pcum.set_title("cumulative provider utility")
    ax_pcum.set_xlabel("cycle")

    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=120)
    return fig


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        print("usage: plot_run <run_dir> <out.png>", file=sys.stderr)
        return 2
    try:
        plot_run(argv[0], argv[1])
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(argv[1])
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
