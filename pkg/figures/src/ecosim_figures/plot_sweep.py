"""Cross-experiment comparison from a sweep summary.

Grouped bars of last-day mean utility per experiment for niche and
mainstream consumers and providers, with cross-seed standard deviations
as error bars. Single-seed summaries render without error bars and emit
a warning.

Usage: ``plot_sweep <summary.json> <out.png>``
"""

from __future__ import annotations

import sys
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import CLASS_COLORS, read_sweep_summary

CLASSES = ["niche", "mainstream"]


def plot_sweep(summary_path: str | Path, out_path: str | Path):
    """Render grouped bars from a sweep summary and return the Figure."""
    doc = read_sweep_summary(Path(summary_path))
    experiments = sorted(doc["experiments"])
    single = [e for e in experiments if doc["experiments"][e].get("single_seed")]
    if single:
        warnings.warn(f"single-seed experiments (no error bars): {single}", stacklevel=2)

    fig, (ax_cons, ax_prov) = plt.subplots(1, 2, figsize=(11, 4.5))
    x = np.arange(len(experiments))
    width = 0.38
    for ax, group, title in ((ax_cons, "consumer", "consumers"), (ax_prov, "provider", "providers")):
        for i, cls in enumerate(CLASSES):
            means = [doc["experiments"][e]["cross_seed"][group][cls]["mean"] for e in experiments]
            stds = [doc["experiments"][e]["cross_seed"][group][cls]["std"] for e in experiments]
            yerr = None if all(s == 0 for s in stds) else stds
            ax.bar(
                x + (i - 0.5) * width,
                means,
                width,
                yerr=yerr,
                capsize=3,
                label=cls,
                color=CLASS_COLORS[cls],
            )
        ax.set_xticks(x, experiments, rotation=12)
        ax.set_title(f"last-day mean utility, {title}")
        ax.legend()
    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=120)
    return fig


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        print("usage: plot_sweep <summary.json> <out.png>", file=sys.stderr)
        return 2
    try:
        plot_sweep(argv[0], argv[1])
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(argv[1])
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
