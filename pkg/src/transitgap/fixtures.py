"""Synthetic fixture city with the same file schemas as the real extracts.

The city has 3 tracts, 6 block groups, and 40 blocks (one engineered to sit
far outside every stop's coverage radius). The stop file carries transfer
hubs and JMU-route stops for the exclusion paths, plus one engineered
high-demand/low-supply stop. Monthly targets are deliberately nonlinear in
the predictors so that the neural net has something real to learn.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .census import EARTH_RADIUS_MILES, MEDIAN_INCOME, TVV_COUNT_NAMES, TVV_NAMES
from .ingest import DEFAULT_OFF_SESSION_FACTOR, adjusted_population

FIXTURE_SEED = 20717

CITY_CENTER = (38.45, -78.87)
GAP_STOP_ID = "S-GAP"
REMOTE_BLOCK_ID = "B-REMOTE"

_LAT_PER_MILE = 360.0 / (2 * math.pi * EARTH_RADIUS_MILES)

# Per-group rate ranges for the count-typed vulnerability variables
# (fraction of group population). Spread keeps the columns independent.
_TVV_RATE_RANGES = {
    "age_65_over": (0.06, 0.22),
    "with_disability": (0.05, 0.16),
    "below_poverty": (0.08, 0.32),
    "english_less_than_well": (0.02, 0.12),
    "renter_population": (0.25, 0.70),
    "vehicle_ownership": (0.45, 0.90),
    "unemployed_population": (0.02, 0.09),
    "means_private_vehicle": (0.30, 0.55),
    "means_public_transit": (0.02, 0.12),
    "means_bicycle": (0.005, 0.03),
    "means_walking": (0.02, 0.09),
    "means_worked_at_home": (0.01, 0.06),
}


@dataclass(frozen=True)
class FixturePaths:
    blocks_csv: Path
    block_groups_csv: Path
    tracts_csv: Path
    monthly_csv: Path
    stops_csv: Path
    calendar_csv: Path


def _group_centers() -> list[tuple[float, float]]:
    lat0, lon0 = CITY_CENTER
    centers = []
    for i in range(3):
        for j in range(2):
            centers.append((lat0 + (i - 1) * 0.02, lon0 + (j - 0.5) * 0.04))
    return centers


def _square_wkt(lat: float, lon: float, half: float = 0.002) -> str:
    corners = [
        (lon - half, lat - half),
        (lon + half, lat - half),
        (lon + half, lat + half),
        (lon - half, lat + half),
    ]
    inner = ", ".join(f"{x:.6f} {y:.6f}" for x, y in corners)
    return f"POLYGON(({inner}))"


def _in_session(month: int) -> bool:
    return month not in (5, 6, 7, 8)


def write_fixture_city(
    target_dir,
    seed: int = FIXTURE_SEED,
    n_city_stops: int = 24,
    n_months: int = 60,
) -> FixturePaths:
    """Generate the full CSV set for the fixture city, deterministically."""
    target = Path(target_dir)
    target.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    centers = _group_centers()
    blocks_per_group = [7, 7, 7, 7, 6, 5]

    # --- blocks and groups ---
    block_rows = []
    group_rows = []
    tract_pops = [0.0, 0.0, 0.0]
    group_incomes = []
    block_index = 0
    for g, (center, n_blocks) in enumerate(zip(centers, blocks_per_group)):
        group_id = f"G{g + 1}"
        tract = g // 2
        members = []
        for _ in range(n_blocks):
            lat = center[0] + float(rng.uniform(-0.008, 0.008))
            lon = center[1] + float(rng.uniform(-0.008, 0.008))
            pop = int(rng.integers(30, 400))
            members.append((f"B{block_index:03d}", lat, lon, pop))
            block_index += 1
        if g == len(centers) - 1:
            # engineered block miles east of every stop
            members.append((REMOTE_BLOCK_ID, center[0], center[1] + 0.09, 55))
        group_pop = sum(m[3] for m in members)
        tract_pops[tract] += group_pop
        rates = {
            name: float(rng.uniform(*bounds)) for name, bounds in _TVV_RATE_RANGES.items()
        }
        income = float(np.round(rng.uniform(28000, 72000), 0))
        group_incomes.append(income)
        tvv_values = {
            name: float(np.round(group_pop * rates[name], 3)) for name in TVV_COUNT_NAMES
        }
        tvv_values[MEDIAN_INCOME] = income
        group_rows.append(
            [group_id, f"T{tract + 1}", group_pop]
            + [tvv_values[name] for name in TVV_NAMES]
        )
        for block_id, lat, lon, pop in members:
            wkt = _square_wkt(lat, lon) if rng.uniform() < 0.35 else ""
            block_rows.append([block_id, group_id, pop, round(lat, 6), round(lon, 6), wkt])

    blocks_csv = target / "blocks.csv"
    with blocks_csv.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["block_id", "group_id", "population", "lat", "lon", "boundary_wkt"])
        writer.writerows(block_rows)

    groups_csv = target / "block_groups.csv"
    with groups_csv.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group_id", "tract_id", "population"] + list(TVV_NAMES))
        writer.writerows(group_rows)

    tracts_csv = target / "tracts.csv"
    with tracts_csv.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tract_id", "population", "svi"])
        for t, pop in enumerate(tract_pops):
            writer.writerow([f"T{t + 1}", pop, round(float(rng.uniform(0.05, 0.85)), 4)])

    # --- stops ---
    stop_rows = []
    per_group = max(1, n_city_stops // len(centers))
    stop_positions = []
    for g, center in enumerate(centers):
        for k in range(per_group):
            if len(stop_positions) >= n_city_stops - 1:
                break
            lat = center[0] + float(rng.uniform(-0.006, 0.006))
            lon = center[1] + float(rng.uniform(-0.006, 0.006))
            stop_positions.append((f"S{len(stop_positions):02d}", lat, lon))
    while len(stop_positions) < n_city_stops - 1:
        lat = CITY_CENTER[0] + float(rng.uniform(-0.02, 0.02))
        lon = CITY_CENTER[1] + float(rng.uniform(-0.03, 0.03))
        stop_positions.append((f"S{len(stop_positions):02d}", lat, lon))

    group_pop_by_id = {row[0]: row[2] for row in group_rows}
    group_rates = {
        row[0]: {name: row[3 + i] / row[2] for i, name in enumerate(TVV_NAMES[:-1])}
        for row in group_rows
    }

    def nearest_group(lat, lon):
        best, best_d = None, math.inf
        for g, center in enumerate(centers):
            d = (center[0] - lat) ** 2 + (center[1] - lon) ** 2
            if d < best_d:
                best, best_d = g, d
        return f"G{best + 1}"

    def stop_demographics(lat, lon):
        """Rough serviced population used only to pose supply/demand rules."""
        gid = nearest_group(lat, lon)
        pop = group_pop_by_id[gid] * float(rng.uniform(0.5, 0.95))
        renter_share = group_rates[gid]["renter_population"]
        return pop, renter_share

    for stop_id, lat, lon in stop_positions:
        pop, renter_share = stop_demographics(lat, lon)
        routes = 2.0 + pop / 250.0 + 6.0 * renter_share + float(rng.normal(0, 0.4))
        routes = float(np.clip(round(routes), 2, 28))
        per_route = 55.0 + 0.03 * pop + 40.0 * renter_share + float(rng.normal(0, 4))
        riders = float(np.round(routes * per_route, 0))
        stop_rows.append(
            [stop_id, f"Stop {stop_id}", round(lat, 6), round(lon, 6),
             riders, routes, "false", "false"]
        )

    # engineered stop: demographics of a well-served area, starved of routes
    gap_center = centers[2]
    gap_lat = gap_center[0] + 0.004
    gap_lon = gap_center[1] - 0.004
    stop_rows.append(
        [GAP_STOP_ID, "Northwest Edge", round(gap_lat, 6), round(gap_lon, 6),
         5200.0, 2.0, "false", "false"]
    )
    # transfer hubs: inflated ridership, many routes
    for h in range(3):
        lat = CITY_CENTER[0] + float(rng.uniform(-0.002, 0.002))
        lon = CITY_CENTER[1] + float(rng.uniform(-0.002, 0.002))
        stop_rows.append(
            [f"HUB{h + 1}", f"Transfer Hub {h + 1}", round(lat, 6), round(lon, 6),
             float(np.round(rng.uniform(28000, 46000), 0)), float(rng.integers(55, 90)),
             "true", "false"]
        )
    # campus shuttle stops: excluded from spatial modeling
    for j in range(3):
        lat = CITY_CENTER[0] - 0.012 + 0.002 * j
        lon = CITY_CENTER[1] + 0.01
        stop_rows.append(
            [f"JMU{j + 1}", f"Campus {j + 1}", round(lat, 6), round(lon, 6),
             float(np.round(rng.uniform(8000, 21000), 0)), float(rng.integers(18, 40)),
             "false", "true"]
        )

    stops_csv = target / "stops.csv"
    with stops_csv.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stop_id", "name", "lat", "lon", "total_riders",
                         "city_routes_ran", "is_transfer_hub", "on_jmu_route"])
        writer.writerows(stop_rows)

    # --- monthly records ---
    total_pop = sum(tract_pops)
    monthly_rows = []
    calendar_rows = []
    year, month = 2017, 7
    for i in range(n_months):
        in_session = _in_session(month)
        fy = (year - 2017) + (1 if month >= 7 else 0)
        enrollment = float(np.round(19500 + 180 * fy + rng.normal(0, 60), 0))
        summer = float(np.round(enrollment * rng.uniform(0.09, 0.12), 0))
        base_pop = float(np.round(total_pop + 42000 + 260 * fy + rng.normal(0, 120), 0))
        adj_pop = adjusted_population(
            base_pop, enrollment, summer, in_session, DEFAULT_OFF_SESSION_FACTOR
        )
        jmu_ran = float(np.round(10 + rng.normal(0, 0.7), 1)) if in_session else float(
            np.round(2 + rng.uniform(0, 1), 1)
        )
        city_ran = float(np.round(12 + 2 * math.sin(2 * math.pi * month / 12)
                                  + rng.normal(0, 0.8), 1))

        season = math.sin(2 * math.pi * month / 12.0)
        # supply targets: smooth but distinctly non-additive in the inputs
        miles = (
            24000.0
            + 0.55 * adj_pop
            + 1500.0 * (city_ran - 12.0) ** 2
            + 2500.0 * season * (jmu_ran / 10.0)
            + float(rng.normal(0, 120))
        )
        hours = (
            800.0
            + 0.05 * adj_pop
            + 60.0 * (city_ran - 12.0) ** 2
            + 140.0 * math.cos(2 * math.pi * month / 12.0) * (city_ran / 12.0)
            + float(rng.normal(0, 8))
        )

        tvv = {}
        drift = 1.0 + 0.01 * fy
        for name in TVV_COUNT_NAMES:
            low, high = _TVV_RATE_RANGES[name]
            level = 50000.0 * (low + high) / 2.0 * drift
            tvv[name] = float(np.round(level * (1 + rng.normal(0, 0.08)), 1))
        tvv[MEDIAN_INCOME] = float(np.round(46000 + 500 * fy + rng.normal(0, 300), 0))

        # demand saturates in supply (diminishing returns on extra miles),
        # surges sharply when the fall semester starts, and draws a real
        # contribution from every demand-side predictor
        months_from_september = min(abs(month - 9), 12 - abs(month - 9))
        fall_surge = math.exp(-months_from_september**2 / 1.6)
        # demand saturates in the level of service and surges each fall in
        # proportion to the renter population (streets of returning tenants)
        trips = (
            45000.0 / (1.0 + math.exp(-(miles - 52000.0) / 1500.0))
            + 1.4 * tvv["renter_population"] * fall_surge
            + 0.05 * adj_pop
            + 1.5 * tvv["means_public_transit"]
            + 0.5 * tvv["unemployed_population"]
            + 0.2 * tvv["age_65_over"]
            + 0.1 * tvv["with_disability"]
            + 0.1 * tvv["below_poverty"]
            + 0.1 * tvv["english_less_than_well"]
            + 0.05 * tvv["vehicle_ownership"]
            + 0.01 * tvv[MEDIAN_INCOME]
            + float(rng.normal(0, 200))
        )

        monthly_rows.append(
            [year, month, float(np.round(trips, 0)), float(np.round(miles, 1)),
             float(np.round(hours, 1)), enrollment, jmu_ran, city_ran, base_pop,
             str(in_session).lower(), summer]
            + [tvv[name] for name in TVV_NAMES]
        )
        calendar_rows.append([year, month, str(in_session).lower()])
        month += 1
        if month > 12:
            month = 1
            year += 1

    monthly_csv = target / "monthly.csv"
    with monthly_csv.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["year", "month", "passenger_trips", "revenue_miles", "revenue_hours",
             "jmu_enrollment", "jmu_routes_ran", "city_routes_ran", "base_population",
             "in_session", "summer_enrollment"] + list(TVV_NAMES)
        )
        writer.writerows(monthly_rows)

    calendar_csv = target / "calendar.csv"
    with calendar_csv.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["year", "month", "in_session"])
        writer.writerows(calendar_rows)

    return FixturePaths(
        blocks_csv=blocks_csv,
        block_groups_csv=groups_csv,
        tracts_csv=tracts_csv,
        monthly_csv=monthly_csv,
        stops_csv=stops_csv,
        calendar_csv=calendar_csv,
    )


def fixture_config(fixture_dir, out_dir, seed: int = FIXTURE_SEED):
    """PipelineConfig pointing at a generated fixture city.

    The neural-net settings are tuned up from the library defaults because
    the fixture's monthly series is short (60 rows) and strongly nonlinear.
    """
    from .config import PipelineConfig

    fixture_dir = Path(fixture_dir)
    return PipelineConfig(
        blocks_csv=str(fixture_dir / "blocks.csv"),
        block_groups_csv=str(fixture_dir / "block_groups.csv"),
        tracts_csv=str(fixture_dir / "tracts.csv"),
        monthly_csv=str(fixture_dir / "monthly.csv"),
        stops_csv=str(fixture_dir / "stops.csv"),
        calendar_csv=str(fixture_dir / "calendar.csv"),
        out_dir=str(out_dir),
        seed=seed,
        model_params={
            "polynomial": {"degree": 2},
            "random_forest": {"trees": 200, "max_depth": 8, "min_leaf": 2},
            "neural_net": {"hidden": [10, 10], "epochs": 3500, "step": 1e-2, "batch": None},
        },
    )
