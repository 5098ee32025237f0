"""Command-line front end.

``run`` executes one experiment preset and writes the metric tables;
``sweep`` repeats every preset over a seed list and writes per-run
outputs plus a cross-seed summary; ``make-data`` generates the synthetic
dataset for environments without the real one.

The dataset directory comes from ``--data`` or, as a fallback, the
``ECOSIM_DATA`` environment variable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__, synthdata
from .engine import ConfigError, run_experiment
from .ingest import GENRE_FILE, ITEM_FILE, RATINGS_FILE, build_population
from .metrics import config_fingerprint, last_day_summary, summarize_sweep, write_metrics
from .model import SimConfig, ValidationError, validate_config

EXPERIMENTS = {
    "exp1_single": {"selection_model": "none"},
    "exp2_threshold": {"selection_model": "threshold"},
    "exp3_ucb": {"selection_model": "ucb"},
}
_SHORT = {"exp1": "exp1_single", "exp2": "exp2_threshold", "exp3": "exp3_ucb"}
EXPERIMENT_CHOICES = sorted(EXPERIMENTS) + sorted(_SHORT)

DEFAULT_SWEEP_SEEDS = 5


def resolve_experiment(name: str) -> str:
    return _SHORT.get(name, name)


def _resolve_data_dir(arg: str | None) -> Path:
    data = arg or os.environ.get("ECOSIM_DATA")
    if not data:
        raise FileNotFoundError("no dataset directory: pass --data or set ECOSIM_DATA")
    root = Path(data)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset directory {root} does not exist")
    return root


def _dataset_hashes(root: Path) -> dict[str, str]:
    out = {}
    for name in (ITEM_FILE, GENRE_FILE, RATINGS_FILE):
        p = root / name
        if p.is_file():
            out[name] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out


def _load_config(path: str | None, experiment: str, seed: int | None) -> SimConfig:
    config = SimConfig()
    if path:
        p = Path(path)
        if not p.is_file():
            raise FileNotFoundError(f"config file {p} does not exist")
        config = SimConfig.from_json(p.read_text())
    overrides = dict(EXPERIMENTS[experiment])
    if seed is not None:
        overrides["seed"] = seed
    config = config.replace(**overrides)
    violations = validate_config(config)
    if violations:
        raise ConfigError("invalid config: " + "; ".join(violations))
    return config


def _run_one(experiment: str, config: SimConfig, data_root: Path, out_dir: Path, log_events: bool) -> dict:
    population = build_population(data_root, config)
    result = run_experiment(config, population, label=experiment)
    manifest = write_metrics(
        result,
        out_dir,
        log_events=log_events,
        dataset_files=_dataset_hashes(data_root),
        data_dir=str(data_root),
    )
    summary = last_day_summary(result)
    summary.update(
        {
            "experiment": experiment,
            "seed": config.seed,
            "config_fingerprint": config_fingerprint(config),
        }
    )
    return summary


def cmd_run(args) -> int:
    experiment = resolve_experiment(args.experiment)
    data_root = _resolve_data_dir(args.data)
    config = _load_config(args.config, experiment, args.seed)
    out_dir = Path(args.out)
    summary = _run_one(experiment, config, data_root, out_dir, args.log_events)
    print(f"{experiment} seed={config.seed}: wrote {out_dir}")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    data_root = _resolve_data_dir(args.data)
    seeds = list(range(1, args.seeds + 1))
    out_root = Path(args.out)
    records = []
    for experiment in sorted(EXPERIMENTS):
        for seed in seeds:
            config = _load_config(args.config, experiment, seed)
            run_dir = out_root / experiment / f"seed_{seed}"
            summary = _run_one(experiment, config, data_root, run_dir, args.log_events)
            records.append(summary)
            print(f"done: {experiment} seed={seed}")
    summary = summarize_sweep(records)
    summary_path = out_root / "sweep_summary.json"
    with open(summary_path, "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"sweep summary: {summary_path}")
    return 0


def cmd_make_data(args) -> int:
    out = synthdata.generate(args.out, seed=args.seed)
    print(f"synthetic dataset written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecosim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment and write its metric files")
    run_p.add_argument("--experiment", required=True, choices=EXPERIMENT_CHOICES)
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--data", default=None, help="dataset directory (fallback: ECOSIM_DATA)")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--config", default=None, help="JSON file with config overrides")
    run_p.add_argument("--log-events", action="store_true", help="also write events.jsonl")
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="run every experiment over a seed range")
    sweep_p.add_argument("--seeds", type=int, default=DEFAULT_SWEEP_SEEDS, help="number of seeds (1..N)")
    sweep_p.add_argument("--data", default=None)
    sweep_p.add_argument("--out", required=True)
    sweep_p.add_argument("--config", default=None)
    sweep_p.add_argument("--log-events", action="store_true")
    sweep_p.set_defaults(func=cmd_sweep)

    data_p = sub.add_parser("make-data", help="generate the synthetic dataset")
    data_p.add_argument("--out", required=True)
    data_p.add_argument("--seed", type=int, default=synthdata.DEFAULT_SEED)
    data_p.set_defaults(func=cmd_make_data)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ConfigError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
