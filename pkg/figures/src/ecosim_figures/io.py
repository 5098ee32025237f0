"""CSV/JSON readers for the published run-output schemas."""

from __future__ import annotations

import csv
import json
from pathlib import Path

CONSUMER_COLUMNS = ["day", "consumer_id", "class", "recommender_id", "list_utility"]
PROVIDER_COLUMNS = ["cycle", "provider_id", "class", "recommender_id", "displays", "clicks", "utility"]

CLASS_COLORS = {"niche": "tab:orange", "mainstream": "tab:blue"}


class SchemaError(ValueError):
    """An input file does not match the published schema."""


def read_table(path: Path, expected_columns: list[str]) -> dict[str, list]:
    """Read a CSV into columns, enforcing the exact schema."""
    if not path.is_file():
        raise SchemaError(f"{path} does not exist")
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path} is empty") from None
        missing = [c for c in expected_columns if c not in header]
        if missing or header != expected_columns:
            raise SchemaError(
                f"{path} columns {header} do not match {expected_columns}"
                + (f"; missing: {missing}" if missing else "")
            )
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path} has a header but no data rows")
    columns: dict[str, list] = {c: [] for c in expected_columns}
    for row in rows:
        for c, value in zip(expected_columns, row):
            columns[c].append(value)
    return columns


def read_consumer_daily(run_dir: Path) -> dict[str, list]:
    cols = read_table(run_dir / "consumer_daily.csv", CONSUMER_COLUMNS)
    cols["day"] = [int(v) for v in cols["day"]]
    cols["list_utility"] = [float(v) for v in cols["list_utility"]]
    return cols

def read_provider_cycle(run_dir: Path) -> dict[str, list]:
    cols = read_table(run_dir / "provider_cycle.csv", PROVIDER_COLUMNS)
    cols["cycle"] = [int(v) for v in cols["cycle"]]
    cols["provider_id"] = [int(v) for v in cols["provider_id"]]
    cols["utility"] = [float(v) for v in cols["utility"]]
    return cols


def read_manifest(run_dir: Path) -> dict:
    path = run_dir / "manifest.json"
    if not path.is_file():
        raise SchemaError(f"{path} does not exist")
    return json.loads(path.read_text())


def read_sweep_summary(path: Path) -> dict:
    if not path.is_file():
        raise SchemaError(f"{path} does not exist")
    doc = json.loads(path.read_text())
    if "experiments" not in doc or not doc["experiments"]:
        raise SchemaError(f"{path} holds no experiments")
    return doc
