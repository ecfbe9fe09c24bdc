"""Shared bootstrap for the demo scripts: one fixture city, one output dir."""

from pathlib import Path

from transitgap.fixtures import fixture_config, write_fixture_city

WORKSPACE = Path(__file__).resolve().parent / "_workspace"


def demo_config():
    """Generate the fixture city once and return a pipeline config for it."""
    city = WORKSPACE / "city"
    out = WORKSPACE / "out"
    if not (city / "monthly.csv").exists():
        write_fixture_city(city)
    return fixture_config(city, out)
