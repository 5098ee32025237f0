"""Fixtures: datasets and the acceptance-report terminal section."""

from __future__ import annotations

from pathlib import Path

import pytest

from ecosim import synthdata
from helpers import ACCEPTANCE_REPORT, REAL_DATA_DIR, make_toy_population


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_REPORT:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def real_data_dir() -> Path:
    if REAL_DATA_DIR is None:
        pytest.skip("canonical dataset not present (set ECOSIM_DATA or place ml-100k/)")
    return REAL_DATA_DIR


@pytest.fixture(scope="session")
def synth_data_dir(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("dataset")
    synthdata.generate(out)
    return out


@pytest.fixture(scope="session")
def data_dir(synth_data_dir) -> Path:
    """Dataset for full-scale runs: the real one when present, else synthetic."""
    return REAL_DATA_DIR or synth_data_dir


@pytest.fixture
def toy_population():
    return make_toy_population()
