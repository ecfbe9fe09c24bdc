"""Session-scoped fixture city and pipeline run shared across test modules."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from transitgap.fixtures import fixture_config, write_fixture_city
from transitgap.pipeline import run_all


@pytest.fixture(scope="session")
def city_dir(tmp_path_factory):
    target = tmp_path_factory.mktemp("fixture_city")
    write_fixture_city(target)
    return target


@pytest.fixture(scope="session")
def pipeline_run(city_dir, tmp_path_factory):
    """One full pipeline run: (config, manifest)."""
    out_dir = tmp_path_factory.mktemp("pipeline_out")
    config = fixture_config(city_dir, out_dir)
    manifest = run_all(config)
    return config, manifest
