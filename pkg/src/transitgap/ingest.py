"""Monthly and per-stop record loading, adjusted population, design matrices.

Feature matrices are standardized to zero mean / unit variance with the
stats stored on the FeatureSpec; targets always stay in raw units so error
metrics are interpretable.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .census import TVV_NAMES, StopProfile
from .errors import (
    ConstantFeature,
    DuplicateMonth,
    EmptyStopListWarning,
    InconsistentEnrollment,
    NegativeCount,
    SchemaError,
    TooFewRows,
    UnknownFeature,
)

logger = logging.getLogger(__name__)

# Share of students assumed to leave town when the university is off session.
DEFAULT_OFF_SESSION_FACTOR = 0.9

ENCODING_NUMERIC = "numeric"
ENCODING_CYCLIC_MONTH = "cyclic-month"
ENCODING_RAW_YEAR = "raw-year"


def adjusted_population(
    base_pop: float,
    enrollment: float,
    summer_enrollment: float,
    in_session: bool,
    off_session_factor: float = DEFAULT_OFF_SESSION_FACTOR,
) -> float:
    """City population corrected for students absent while off session.

    In session the base population stands; off session, ``off_session_factor``
    of the students without summer enrollment are assumed to leave.
    """
    if summer_enrollment > enrollment:
        raise InconsistentEnrollment(
            f"summer enrollment {summer_enrollment} exceeds enrollment {enrollment}"
        )
    if min(base_pop, enrollment, summer_enrollment) < 0:
        raise NegativeCount("populations and enrollments must be non-negative")
    if in_session:
        return float(base_pop)
    adjusted = base_pop - off_session_factor * (enrollment - summer_enrollment)
    return max(0.0, float(adjusted))


@dataclass(frozen=True)
class MonthlyRecord:
    """One month of citywide service metrics plus demand-side demographics."""

    t_year: int
    t_month: int
    passenger_trips: float
    revenue_miles: float
    revenue_hours: float
    jmu_enrollment: float
    jmu_routes_ran: float
    city_routes_ran: float
    base_population: float
    in_session: bool
    tvv: Mapping[str, float]
    summer_enrollment: float = 0.0
    adj_pop: float = 0.0  # derived at load time from the off-session factor

    @property
    def row_id(self) -> str:
        return f"{self.t_year:04d}-{self.t_month:02d}"


@dataclass(frozen=True)
class StopRecord:
    stop_id: str
    name: str
    lat: float
    lon: float
    total_riders: float
    city_routes_ran: float
    is_transfer_hub: bool = False
    on_jmu_route: bool = False

    def __post_init__(self):
        if self.total_riders < 0:
            raise NegativeCount(f"stop {self.stop_id}: total_riders < 0")
        if self.city_routes_ran < 0:
            raise NegativeCount(f"stop {self.stop_id}: city_routes_ran < 0")


@dataclass(frozen=True)
class SpatialRow:
    """A stop joined with its serviced-population profile, one model row."""

    stop_id: str
    lat: float
    lon: float
    stop_pop: float
    city_routes_ran: float
    total_riders: float
    tvv: Mapping[str, float]

    @property
    def row_id(self) -> str:
        return self.stop_id


def spatial_rows(stops: Sequence[StopRecord],
                 profiles: Mapping[str, StopProfile]) -> list[SpatialRow]:
    """Join stop records with their aggregated profiles for model building."""
    rows = []
    for stop in stops:
        profile = profiles[stop.stop_id]
        rows.append(
            SpatialRow(
                stop_id=stop.stop_id,
                lat=stop.lat,
                lon=stop.lon,
                stop_pop=profile.stop_pop,
                city_routes_ran=stop.city_routes_ran,
                total_riders=stop.total_riders,
                tvv=dict(profile.tvv),
            )
        )
    return rows


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

_MONTHLY_BASE_COLUMNS = (
    "year", "month", "passenger_trips", "revenue_miles", "revenue_hours",
    "jmu_enrollment", "jmu_routes_ran", "city_routes_ran", "base_population",
    "in_session",
)

_TRUE_VALUES = {"1", "true", "yes"}
_FALSE_VALUES = {"0", "false", "no"}


def _parse_bool(value: str, context: str) -> bool:
    text = value.strip().lower()
    if text in _TRUE_VALUES:
        return True
    if text in _FALSE_VALUES:
        return False
    raise SchemaError(f"{context}: cannot parse boolean from {value!r}")


def load_calendar(source) -> dict[tuple[int, int], bool]:
    """Read (year, month) -> in_session from a calendar CSV."""
    sessions: dict[tuple[int, int], bool] = {}
    with Path(source).open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            try:
                key = (int(row["year"]), int(row["month"]))
            except (KeyError, ValueError) as exc:
                raise SchemaError(f"calendar: bad row {row}") from exc
            sessions[key] = _parse_bool(row["in_session"], "calendar")
    return sessions


def load_monthly(
    source,
    calendar: Mapping[tuple[int, int], bool] | None = None,
    off_session_factor: float = DEFAULT_OFF_SESSION_FACTOR,
) -> list[MonthlyRecord]:
    """Load and validate monthly records, sorted by (year, month).

    When a calendar mapping is given it is the authority for in_session and
    must agree with the monthly file's own column. summer_enrollment is an
    optional column defaulting to 0 (no students stay over the summer).
    """
    path = Path(source)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        columns = reader.fieldnames or []
        missing = [c for c in _MONTHLY_BASE_COLUMNS if c not in columns]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        tvv_columns = [c for c in columns if c in TVV_NAMES]
        absent = [c for c in TVV_NAMES if c not in columns]
        if absent:
            raise SchemaError(f"{path}: missing TVV columns {absent}")
        records: list[MonthlyRecord] = []
        seen: set[tuple[int, int]] = set()
        for row in reader:
            year = int(row["year"])
            month = int(row["month"])
            if not 1 <= month <= 12:
                raise SchemaError(f"{path}: month {month} outside [1, 12]")
            if (year, month) in seen:
                raise DuplicateMonth(f"{path}: duplicate month {year}-{month:02d}")
            seen.add((year, month))
            in_session = _parse_bool(row["in_session"], f"{path} {year}-{month:02d}")
            if calendar is not None:
                key = (year, month)
                if key not in calendar:
                    raise SchemaError(f"calendar missing entry for {year}-{month:02d}")
                if calendar[key] != in_session:
                    raise SchemaError(
                        f"{path}: in_session for {year}-{month:02d} disagrees with calendar"
                    )
                in_session = calendar[key]
            counts = {
                name: float(row[name])
                for name in (
                    "passenger_trips", "revenue_miles", "revenue_hours",
                    "jmu_enrollment", "jmu_routes_ran", "city_routes_ran",
                    "base_population",
                )
            }
            negative = [name for name, value in counts.items() if value < 0]
            if negative:
                raise NegativeCount(f"{path} {year}-{month:02d}: negative {negative}")
            summer = float(row.get("summer_enrollment") or 0.0)
            tvv = {name: float(row[name]) for name in tvv_columns}
            records.append(
                MonthlyRecord(
                    t_year=year,
                    t_month=month,
                    passenger_trips=counts["passenger_trips"],
                    revenue_miles=counts["revenue_miles"],
                    revenue_hours=counts["revenue_hours"],
                    jmu_enrollment=counts["jmu_enrollment"],
                    jmu_routes_ran=counts["jmu_routes_ran"],
                    city_routes_ran=counts["city_routes_ran"],
                    base_population=counts["base_population"],
                    in_session=in_session,
                    tvv=tvv,
                    summer_enrollment=summer,
                    adj_pop=adjusted_population(
                        counts["base_population"], counts["jmu_enrollment"],
                        summer, in_session, off_session_factor,
                    ),
                )
            )
    records.sort(key=lambda r: (r.t_year, r.t_month))
    logger.info("loaded %d monthly records from %s", len(records), path)
    return records


def load_stops(
    source,
    exclude_transfer_hubs: bool = False,
    exclude_jmu_routes: bool = False,
) -> list[StopRecord]:
    """Load stop records, optionally dropping transfer hubs and JMU-route stops.

    Transfer-hub ridership is inflated by transfers between routes, so spatial
    modeling excludes those stops.
    """
    path = Path(source)
    required = ("stop_id", "name", "lat", "lon", "total_riders",
                "city_routes_ran", "is_transfer_hub", "on_jmu_route")
    stops: list[StopRecord] = []
    n_hubs = 0
    n_jmu = 0
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        columns = reader.fieldnames or []
        missing = [c for c in required if c not in columns]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        for row in reader:
            record = StopRecord(
                stop_id=row["stop_id"],
                name=row["name"],
                lat=float(row["lat"]),
                lon=float(row["lon"]),
                total_riders=float(row["total_riders"]),
                city_routes_ran=float(row["city_routes_ran"]),
                is_transfer_hub=_parse_bool(row["is_transfer_hub"], path.name),
                on_jmu_route=_parse_bool(row["on_jmu_route"], path.name),
            )
            if exclude_transfer_hubs and record.is_transfer_hub:
                n_hubs += 1
                continue
            if exclude_jmu_routes and record.on_jmu_route:
                n_jmu += 1
                continue
            stops.append(record)
    if n_hubs or n_jmu:
        logger.info("excluded %d transfer hubs and %d JMU-route stops", n_hubs, n_jmu)
    if not stops:
        warnings.warn(EmptyStopListWarning(f"{path}: filtering removed every stop"))
    return stops


# ---------------------------------------------------------------------------
# design matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureSpec:
    """Ordered feature columns with their encodings and standardization stats.

    Column order here is the single source of truth for matrix layout.
    """

    feature_names: tuple[str, ...]
    encodings: tuple[str, ...]
    means: tuple[float, ...]
    stds: tuple[float, ...]
    target: str

    def __post_init__(self):
        n = len(self.feature_names)
        if not (len(self.encodings) == len(self.means) == len(self.stds) == n):
            raise SchemaError("feature spec fields must have equal lengths")
        for name, std in zip(self.feature_names, self.stds):
            if std <= 0:
                raise ConstantFeature(f"feature '{name}' has non-positive stddev")

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def standardize(self, raw: np.ndarray) -> np.ndarray:
        return (np.asarray(raw, dtype=float) - np.array(self.means)) / np.array(self.stds)

    def destandardize(self, features: np.ndarray) -> np.ndarray:
        return np.asarray(features, dtype=float) * np.array(self.stds) + np.array(self.means)

    def row_from_values(self, values: Mapping[str, float]) -> np.ndarray:
        """Build one standardized row from raw values keyed by source name.

        Cyclic-month columns are derived from a ``t_month`` entry.
        """
        raw = np.empty(self.n_features)
        for j, (name, encoding) in enumerate(zip(self.feature_names, self.encodings)):
            if encoding == ENCODING_CYCLIC_MONTH:
                if "t_month" not in values:
                    raise UnknownFeature("cyclic month column requires 't_month'")
                sin_part, cos_part = encode_month(float(values["t_month"]))
                raw[j] = sin_part if name.endswith("_sin") else cos_part
            else:
                if name not in values:
                    raise UnknownFeature(f"missing value for feature '{name}'")
                raw[j] = float(values[name])
        return self.standardize(raw)

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "encodings": list(self.encodings),
            "means": list(self.means),
            "stds": list(self.stds),
            "target": self.target,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "FeatureSpec":
        return cls(
            feature_names=tuple(data["feature_names"]),
            encodings=tuple(data["encodings"]),
            means=tuple(data["means"]),
            stds=tuple(data["stds"]),
            target=data["target"],
        )


@dataclass(frozen=True)
class Dataset:
    """Standardized feature matrix with raw targets and row provenance."""

    features: np.ndarray
    targets: np.ndarray
    spec: FeatureSpec
    row_ids: tuple[str, ...]

    def __post_init__(self):
        if not (self.features.shape[0] == len(self.targets) == len(self.row_ids)):
            raise SchemaError("features, targets and row_ids must agree on row count")
        if not np.all(np.isfinite(self.features)) or not np.all(np.isfinite(self.targets)):
            raise SchemaError("dataset contains NaN or Inf entries")
        self.features.setflags(write=False)
        self.targets.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    def to_dict(self) -> dict:
        return {
            "features": self.features.tolist(),
            "targets": self.targets.tolist(),
            "spec": self.spec.to_dict(),
            "row_ids": list(self.row_ids),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Dataset":
        return cls(
            features=np.array(data["features"], dtype=float),
            targets=np.array(data["targets"], dtype=float),
            spec=FeatureSpec.from_dict(data["spec"]),
            row_ids=tuple(data["row_ids"]),
        )


def encode_month(month: float) -> tuple[float, float]:
    """Cyclic month encoding: (sin, cos) of 2*pi*month/12."""
    angle = 2.0 * math.pi * month / 12.0
    return math.sin(angle), math.cos(angle)


def _raw_value(row, name: str) -> float:
    if hasattr(row, name):
        return float(getattr(row, name))
    tvv = getattr(row, "tvv", None)
    if tvv is not None and name in tvv:
        return float(tvv[name])
    raise UnknownFeature(f"feature '{name}' not found on {type(row).__name__}")


def build_design_matrix(
    rows: Sequence,
    features: Sequence[str],
    target: str,
    month_encoding: str = ENCODING_CYCLIC_MONTH,
) -> Dataset:
    """Build a standardized design matrix from records.

    ``t_month`` expands into sin/cos columns under the cyclic encoding;
    ``t_year`` stays a raw numeric year. Targets keep raw units. Constant
    columns are rejected because they cannot be standardized.
    """
    if not rows:
        raise TooFewRows("cannot build a design matrix from zero rows")
    columns: list[tuple[str, str]] = []  # (column name, encoding)
    for name in features:
        if name == "t_month" and month_encoding == ENCODING_CYCLIC_MONTH:
            columns.append(("t_month_sin", ENCODING_CYCLIC_MONTH))
            columns.append(("t_month_cos", ENCODING_CYCLIC_MONTH))
        elif name == "t_year":
            columns.append((name, ENCODING_RAW_YEAR))
        else:
            columns.append((name, ENCODING_NUMERIC))

    raw = np.empty((len(rows), len(columns)))
    for i, row in enumerate(rows):
        j = 0
        for name in features:
            if name == "t_month" and month_encoding == ENCODING_CYCLIC_MONTH:
                sin_part, cos_part = encode_month(_raw_value(row, "t_month"))
                raw[i, j] = sin_part
                raw[i, j + 1] = cos_part
                j += 2
            else:
                raw[i, j] = _raw_value(row, name)
                j += 1

    means = raw.mean(axis=0)
    stds = raw.std(axis=0)
    for (name, _), std in zip(columns, stds):
        if std == 0:
            raise ConstantFeature(f"feature '{name}' is constant across rows")

    targets = np.array([_raw_value(row, target) for row in rows], dtype=float)
    row_ids = tuple(str(getattr(row, "row_id", i)) for i, row in enumerate(rows))
    spec = FeatureSpec(
        feature_names=tuple(name for name, _ in columns),
        encodings=tuple(enc for _, enc in columns),
        means=tuple(float(m) for m in means),
        stds=tuple(float(s) for s in stds),
        target=target,
    )
    return Dataset(
        features=(raw - means) / stds,
        targets=targets,
        spec=spec,
        row_ids=row_ids,
    )


def train_test_split(
    ds: Dataset, train_fraction: float = 0.8, seed: int = 0
) -> tuple[Dataset, Dataset]:
    """Deterministic seeded shuffle into floor(fraction*n) train rows + rest."""
    n = ds.n_rows
    if n < 5:
        raise TooFewRows(f"need at least 5 rows to split, got {n}")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(math.floor(train_fraction * n))
    train_idx = np.sort(order[:n_train])
    test_idx = np.sort(order[n_train:])

    def subset(idx: np.ndarray) -> Dataset:
        return Dataset(
            features=ds.features[idx].copy(),
            targets=ds.targets[idx].copy(),
            spec=ds.spec,
            row_ids=tuple(ds.row_ids[i] for i in idx),
        )

    return subset(train_idx), subset(test_idx)
