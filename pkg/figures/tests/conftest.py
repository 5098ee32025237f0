"""Fixtures producing real run outputs through the simulator CLI."""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

SMALL_CONFIG = {
    "consumer_sample_size": 24,
    "cycles": 3,
    "days_per_cycle": 4,
}


def run_cli(*args) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "ecosim.cli", *args], capture_output=True, text=True
    )


@pytest.fixture(scope="session")
def workspace(tmp_path_factory) -> Path:
    """Synthetic dataset plus one tiny run per experiment and a 2-seed sweep."""
    root = tmp_path_factory.mktemp("figdata")
    data = root / "data"
    proc = run_cli("make-data", "--out", str(data))
    assert proc.returncode == 0, proc.stderr

    config_path = root / "small.json"
    config_path.write_text(json.dumps(SMALL_CONFIG))

    for exp in ("exp1", "exp2", "exp3"):
        proc = run_cli(
            "run",
            "--experiment",
            exp,
            "--seed",
            "1",
            "--data",
            str(data),
            "--out",
            str(root / "runs" / exp),
            "--config",
            str(config_path),
        )
        assert proc.returncode == 0, proc.stderr

    proc = run_cli(
        "sweep",
        "--seeds",
        "2",
        "--data",
        str(data),
        "--out",
        str(root / "sweep"),
        "--config",
        str(config_path),
    )
    assert proc.returncode == 0, proc.stderr
    return root
