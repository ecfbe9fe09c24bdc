"""Census spatial hierarchy, block apportionment, and stop service coverage.

The hierarchy is tract > block group > block. Demographic variables are
reported at block-group level and redistributed to blocks by population
share; a stop "services" a block when any representative point of the block
(centroid plus boundary vertices) lies within the coverage radius.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (
    MissingParent,
    NegativeCount,
    OutOfRangeCoordinate,
    SchemaError,
    EmptyCoverageWarning,
    ZeroPopulationGroupWarning,
)

logger = logging.getLogger(__name__)

EARTH_RADIUS_MILES = 3958.7613
DEFAULT_SERVICE_RADIUS_MILES = 0.75

MEDIAN_INCOME = "median_income"

# Transit vulnerability variables: the person-count factors assumed to affect
# transit access, plus median income (dollars, never apportioned as a count).
TVV_COUNT_NAMES = (
    "age_65_over",
    "with_disability",
    "below_poverty",
    "english_less_than_well",
    "renter_population",
    "vehicle_ownership",
    "unemployed_population",
    "means_private_vehicle",
    "means_public_transit",
    "means_bicycle",
    "means_walking",
    "means_worked_at_home",
)
TVV_NAMES = TVV_COUNT_NAMES + (MEDIAN_INCOME,)


@dataclass(frozen=True)
class CensusTract:
    tract_id: str
    population: float
    svi: float | None = None

    def __post_init__(self):
        if self.population < 0:
            raise NegativeCount(f"tract {self.tract_id}: population {self.population} < 0")
        if self.svi is not None and not (0.0 <= self.svi <= 1.0):
            raise SchemaError(f"tract {self.tract_id}: svi {self.svi} outside [0, 1]")


@dataclass(frozen=True)
class BlockGroup:
    group_id: str
    parent_tract_id: str
    population: float
    tvv: Mapping[str, float]

    def __post_init__(self):
        if self.population < 0:
            raise NegativeCount(f"group {self.group_id}: population {self.population} < 0")
        missing = [name for name in TVV_NAMES if name not in self.tvv]
        if missing:
            raise SchemaError(f"group {self.group_id}: missing TVV columns {missing}")
        for name in TVV_COUNT_NAMES:
            if self.tvv[name] < 0:
                raise NegativeCount(f"group {self.group_id}: {name} = {self.tvv[name]} < 0")


@dataclass(frozen=True)
class CensusBlock:
    block_id: str
    parent_group_id: str
    population: float
    centroid: tuple[float, float]  # (lat, lon)
    boundary_points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.population < 0:
            raise NegativeCount(f"block {self.block_id}: population {self.population} < 0")
        if self.boundary_points and len(self.boundary_points) < 3:
            raise SchemaError(
                f"block {self.block_id}: boundary needs >= 3 points, got {len(self.boundary_points)}"
            )

    def representative_points(self) -> tuple[tuple[float, float], ...]:
        return (self.centroid,) + self.boundary_points


@dataclass
class BlockProfile:
    """A block with its share of the parent group's vulnerability variables."""

    block_id: str
    population: float
    tvv: dict[str, float]
    covered_by: set[str] = field(default_factory=set)

    @property
    def median_income(self) -> float:
        return self.tvv[MEDIAN_INCOME]


@dataclass(frozen=True)
class StopProfile:
    """Demographics of the population serviced by one stop.

    Count variables are summed over served blocks; median income is the
    population-weighted mean over served blocks. ``empty_coverage`` marks
    stops that serve no block at all (all values zero).
    """

    stop_id: str
    stop_pop: float
    tvv: Mapping[str, float]
    served_block_ids: tuple[str, ...]
    empty_coverage: bool = False

    @property
    def median_income(self) -> float:
        return self.tvv[MEDIAN_INCOME]


@dataclass(frozen=True)
class CensusIndex:
    tracts: Mapping[str, CensusTract]
    groups: Mapping[str, BlockGroup]
    blocks: Mapping[str, CensusBlock]

    def blocks_in_group(self, group_id: str) -> list[CensusBlock]:
        return [b for b in self.blocks.values() if b.parent_group_id == group_id]

    def validate(self, rel_tol: float = 1e-9) -> None:
        """Check parent links and that group populations sum from blocks."""
        for group in self.groups.values():
            if group.parent_tract_id not in self.tracts:
                raise MissingParent(
                    f"group {group.group_id} references unknown tract {group.parent_tract_id}"
                )
        by_group: dict[str, float] = {gid: 0.0 for gid in self.groups}
        for block in self.blocks.values():
            if block.parent_group_id not in self.groups:
                raise MissingParent(
                    f"block {block.block_id} references unknown group {block.parent_group_id}"
                )
            by_group[block.parent_group_id] += block.population
        for gid, total in by_group.items():
            expected = self.groups[gid].population
            if not math.isclose(total, expected, rel_tol=rel_tol, abs_tol=1e-9):
                raise SchemaError(
                    f"group {gid}: block populations sum to {total}, group says {expected}"
                )


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def _read_rows(source) -> list[dict]:
    path = Path(source)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file")
        return list(reader)


def _require(row: dict, column: str, source: str) -> str:
    value = row.get(column)
    if value is None or value == "":
        raise SchemaError(f"{source}: missing value for column '{column}'")
    return value


def parse_polygon_wkt(wkt: str) -> tuple[tuple[float, float], ...]:
    """Parse ``POLYGON((lon lat, lon lat, ...))`` into (lat, lon) tuples.

    Only the outer ring is read; a closing vertex equal to the first is
    dropped.
    """
    text = wkt.strip()
    if not text.upper().startswith("POLYGON"):
        raise SchemaError(f"not a POLYGON wkt: {wkt!r}")
    inner = text[text.index("((") + 2 : text.rindex("))")]
    points = []
    for pair in inner.split(","):
        parts = pair.split()
        if len(parts) != 2:
            raise SchemaError(f"bad coordinate pair in wkt: {pair!r}")
        lon, lat = float(parts[0]), float(parts[1])
        points.append((lat, lon))
    if len(points) > 1 and points[0] == points[-1]:
        points = points[:-1]
    return tuple(points)


def load_census(blocks_source, groups_source, tracts_source) -> CensusIndex:
    """Load the tract/group/block hierarchy from CSV files and validate it."""
    tracts: dict[str, CensusTract] = {}
    for row in _read_rows(tracts_source):
        tract_id = _require(row, "tract_id", "tracts")
        svi_raw = row.get("svi", "")
        tracts[tract_id] = CensusTract(
            tract_id=tract_id,
            population=float(_require(row, "population", "tracts")),
            svi=float(svi_raw) if svi_raw not in (None, "") else None,
        )

    groups: dict[str, BlockGroup] = {}
    for row in _read_rows(groups_source):
        group_id = _require(row, "group_id", "block_groups")
        tvv = {}
        for name in TVV_NAMES:
            tvv[name] = float(_require(row, name, "block_groups"))
        groups[group_id] = BlockGroup(
            group_id=group_id,
            parent_tract_id=_require(row, "tract_id", "block_groups"),
            population=float(_require(row, "population", "block_groups")),
            tvv=tvv,
        )

    blocks: dict[str, CensusBlock] = {}
    for row in _read_rows(blocks_source):
        block_id = _require(row, "block_id", "blocks")
        wkt = row.get("boundary_wkt", "")
        blocks[block_id] = CensusBlock(
            block_id=block_id,
            parent_group_id=_require(row, "group_id", "blocks"),
            population=float(_require(row, "population", "blocks")),
            centroid=(
                float(_require(row, "lat", "blocks")),
                float(_require(row, "lon", "blocks")),
            ),
            boundary_points=parse_polygon_wkt(wkt) if wkt else (),
        )

    index = CensusIndex(tracts=tracts, groups=groups, blocks=blocks)
    index.validate()
    logger.info(
        "loaded census hierarchy: %d tracts, %d groups, %d blocks",
        len(tracts), len(groups), len(blocks),
    )
    return index


# ---------------------------------------------------------------------------
# apportionment
# ---------------------------------------------------------------------------

def apportion_to_blocks(index: CensusIndex) -> list[BlockProfile]:
    """Redistribute group-level count variables to blocks by population share.

    Each count variable v becomes ``v * block_pop / group_pop``; median income
    is copied unchanged (it is averaged later, at stop aggregation). A group
    with zero population but a nonzero count variable cannot be apportioned:
    the blocks get zeros and a ZeroPopulationGroupWarning is emitted.
    """
    profiles: list[BlockProfile] = []
    for group in index.groups.values():
        members = index.blocks_in_group(group.group_id)
        zero_pop = group.population == 0
        if zero_pop:
            bad = [n for n in TVV_COUNT_NAMES if group.tvv[n] != 0]
            if bad:
                warnings.warn(
                    ZeroPopulationGroupWarning(
                        f"group {group.group_id} has zero population but nonzero "
                        f"count variables {bad}; apportioned values set to 0"
                    )
                )
        for block in members:
            share = 0.0 if zero_pop else block.population / group.population
            tvv = {name: group.tvv[name] * share for name in TVV_COUNT_NAMES}
            tvv[MEDIAN_INCOME] = group.tvv[MEDIAN_INCOME]
            profiles.append(
                BlockProfile(block_id=block.block_id, population=block.population, tvv=tvv)
            )
    return profiles


# ---------------------------------------------------------------------------
# distance and coverage
# ---------------------------------------------------------------------------

def haversine_miles(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Great-circle distance in miles between two (lat, lon) points."""
    for lat, lon in (a, b):
        if not -90.0 <= lat <= 90.0:
            raise OutOfRangeCoordinate(f"latitude {lat} outside [-90, 90]")
        if not -180.0 <= lon <= 180.0:
            raise OutOfRangeCoordinate(f"longitude {lon} outside [-180, 180]")
    if a == b:
        return 0.0
    lat1, lon1, lat2, lon2 = map(math.radians, (a[0], a[1], b[0], b[1]))
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_MILES * math.asin(min(1.0, math.sqrt(h)))


def _min_distance_to_stop(stop, block: CensusBlock) -> float:
    stop_pos = (stop.lat, stop.lon)
    return min(haversine_miles(stop_pos, p) for p in block.representative_points())


def blocks_served(
    stop,
    blocks: Iterable[CensusBlock],
    radius_miles: float = DEFAULT_SERVICE_RADIUS_MILES,
) -> set[str]:
    """Block ids whose nearest representative point is within the radius.

    ``stop`` is anything with ``stop_id``, ``lat`` and ``lon`` attributes.
    """
    if radius_miles <= 0:
        raise ValueError(f"radius must be positive, got {radius_miles}")
    return {
        block.block_id
        for block in blocks
        if _min_distance_to_stop(stop, block) <= radius_miles
    }


def attach_coverage(
    stops: Sequence,
    index: CensusIndex,
    profiles: Sequence[BlockProfile],
    radius_miles: float = DEFAULT_SERVICE_RADIUS_MILES,
) -> dict[str, set[str]]:
    """Compute blocks_served per stop and fill each profile's covered_by set.

    Returns stop_id -> set of served block ids.
    """
    coverage: dict[str, set[str]] = {}
    by_id = {p.block_id: p for p in profiles}
    for stop in stops:
        served = blocks_served(stop, index.blocks.values(), radius_miles)
        coverage[stop.stop_id] = served
        for block_id in served:
            by_id[block_id].covered_by.add(stop.stop_id)
    return coverage


def stop_profile(stop, profiles: Sequence[BlockProfile]) -> StopProfile:
    """Aggregate served blocks' demographics into one per-stop profile.

    Requires coverage to be attached (profiles' covered_by filled). Count
    variables are summed; median income is population-weighted over served
    blocks. A stop with no served blocks yields all zeros plus a warning.
    """
    served = [p for p in profiles if stop.stop_id in p.covered_by]
    if not served:
        warnings.warn(EmptyCoverageWarning(f"stop {stop.stop_id} serves no blocks"))
        tvv = {name: 0.0 for name in TVV_NAMES}
        return StopProfile(
            stop_id=stop.stop_id, stop_pop=0.0, tvv=tvv,
            served_block_ids=(), empty_coverage=True,
        )
    stop_pop = sum(p.population for p in served)
    tvv = {name: sum(p.tvv[name] for p in served) for name in TVV_COUNT_NAMES}
    if stop_pop > 0:
        tvv[MEDIAN_INCOME] = (
            sum(p.population * p.median_income for p in served) / stop_pop
        )
    else:
        tvv[MEDIAN_INCOME] = 0.0
    return StopProfile(
        stop_id=stop.stop_id,
        stop_pop=stop_pop,
        tvv=tvv,
        served_block_ids=tuple(sorted(p.block_id for p in served)),
    )


def unserviced_blocks(stops: Sequence, index: CensusIndex,
                      radius_miles: float = DEFAULT_SERVICE_RADIUS_MILES) -> list[str]:
    """Ids of blocks outside the coverage radius of every stop, sorted."""
    covered: set[str] = set()
    for stop in stops:
        covered |= blocks_served(stop, index.blocks.values(), radius_miles)
    return sorted(set(index.blocks) - covered)
