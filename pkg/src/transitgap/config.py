"""Pipeline configuration and the run manifest."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import ConfigError

# Default predictor sets. Temporal supply uses service-level inputs; temporal
# demand adds actual supply plus vulnerability variables; spatial models use
# the serviced population around each stop. All lists are overridable per
# config file; the temporal demand default is deliberately lean because a
# five-year monthly series (60 rows) cannot support a wide design matrix.
TEMPORAL_SUPPLY_FEATURES = (
    "adj_pop", "jmu_enrollment", "jmu_routes_ran", "city_routes_ran",
    "t_year", "t_month",
)
TEMPORAL_DEMAND_FEATURES = (
    "revenue_miles", "revenue_hours", "adj_pop", "means_public_transit",
    "t_month",
)
SPATIAL_SUPPLY_FEATURES = (
    "stop_pop", "age_65_over", "with_disability", "below_poverty",
    "renter_population", "vehicle_ownership", "median_income", "lat", "lon",
)
SPATIAL_DEMAND_FEATURES = SPATIAL_SUPPLY_FEATURES + ("city_routes_ran",)

MODEL_SLOTS = ("temporal_supply", "temporal_demand", "spatial_supply", "spatial_demand")

DEFAULT_MODEL_PARAMS = {
    "polynomial": {"degree": 2},
    "random_forest": {"trees": 200, "max_depth": 8, "min_leaf": 2},
    "neural_net": {"hidden": [10, 10], "epochs": 2000, "step": 1e-3, "batch": None},
}

DEFAULT_TRAIN_JOBS = (
    {"which": "temporal_supply", "kind": "neural_net"},
    {"which": "temporal_demand", "kind": "neural_net"},
    {"which": "spatial_supply", "kind": "neural_net"},
    {"which": "spatial_demand", "kind": "neural_net"},
    {"which": "spatial_supply", "kind": "linear"},
    {"which": "spatial_demand", "kind": "linear"},
)


@dataclass
class PipelineConfig:
    blocks_csv: str
    block_groups_csv: str
    tracts_csv: str
    monthly_csv: str
    stops_csv: str
    calendar_csv: str
    out_dir: str
    seed: int
    off_session_factor: float = 0.9
    coverage_radius_miles: float = 0.75
    train_fraction: float = 0.8
    month_encoding: str = "cyclic-month"
    shortage_factor: float = 1.5
    surplus_factor: float = 1.5
    exclude_transfer_hubs: bool = True
    exclude_jmu_routes: bool = True
    link_exclusions: tuple[str, ...] = ()
    temporal_supply_features: tuple[str, ...] = TEMPORAL_SUPPLY_FEATURES
    temporal_demand_features: tuple[str, ...] = TEMPORAL_DEMAND_FEATURES
    spatial_supply_features: tuple[str, ...] = SPATIAL_SUPPLY_FEATURES
    spatial_demand_features: tuple[str, ...] = SPATIAL_DEMAND_FEATURES
    model_params: dict = field(default_factory=lambda: json.loads(json.dumps(DEFAULT_MODEL_PARAMS)))
    train_jobs: tuple[dict, ...] = DEFAULT_TRAIN_JOBS
    # Gap scoring wants a model that does not interpolate single-stop
    # outliers, so it defaults to the linear spatial models.
    gaps_model_kind: str = "linear"
    significance_model_kind: str = "neural_net"
    serve_model_kind: str = "neural_net"

    def __post_init__(self):
        if self.coverage_radius_miles <= 0:
            raise ConfigError("coverage_radius_miles must be positive")
        if not 0.0 <= self.off_session_factor <= 1.0:
            raise ConfigError("off_session_factor must lie in [0, 1]")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer (no wall-clock seeding)")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must lie in (0, 1)")
        for job in self.train_jobs:
            if job.get("which") not in MODEL_SLOTS:
                raise ConfigError(f"unknown model slot {job.get('which')!r}")
        self.link_exclusions = tuple(self.link_exclusions)
        self.train_jobs = tuple(dict(j) for j in self.train_jobs)
        for name in ("temporal_supply_features", "temporal_demand_features",
                     "spatial_supply_features", "spatial_demand_features"):
            setattr(self, name, tuple(getattr(self, name)))

    @property
    def out_path(self) -> Path:
        return Path(self.out_dir)

    def input_paths(self) -> dict[str, Path]:
        return {
            "blocks_csv": Path(self.blocks_csv),
            "block_groups_csv": Path(self.block_groups_csv),
            "tracts_csv": Path(self.tracts_csv),
            "monthly_csv": Path(self.monthly_csv),
            "stops_csv": Path(self.stops_csv),
            "calendar_csv": Path(self.calendar_csv),
        }

    def hyperparams(self, kind: str) -> dict:
        params = dict(self.model_params.get(kind, {}))
        if kind == "neural_net" and "hidden" in params:
            params["hidden"] = tuple(params["hidden"])
        return params

    def to_dict(self) -> dict:
        data = asdict(self)
        data["link_exclusions"] = list(self.link_exclusions)
        data["train_jobs"] = [dict(j) for j in self.train_jobs]
        for name in ("temporal_supply_features", "temporal_demand_features",
                     "spatial_supply_features", "spatial_demand_features"):
            data[name] = list(getattr(self, name))
        return data

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()

    @classmethod
    def from_dict(cls, data: Mapping) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        required = [
            "blocks_csv", "block_groups_csv", "tracts_csv", "monthly_csv",
            "stops_csv", "calendar_csv", "out_dir", "seed",
        ]
        missing = [k for k in required if k not in data]
        if missing:
            raise ConfigError(f"missing config keys: {missing}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    def write_json(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n")
        return path


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """Ledger of one pipeline run: hashes in, artifacts out."""

    config_hash: str
    input_hashes: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    timestamps: dict = field(default_factory=dict)

    FILENAME = "run_manifest.json"

    def record_artifact(self, name: str, path: Path) -> None:
        self.artifacts[name] = {"path": str(path), "sha256": sha256_file(path)}

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "input_hashes": self.input_hashes,
            "artifacts": self.artifacts,
            "metrics": self.metrics,
            "timestamps": self.timestamps,
        }

    def save(self, out_dir: Path) -> Path:
        path = Path(out_dir) / self.FILENAME
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n")
        return path

    @classmethod
    def load_or_create(cls, out_dir: Path, config_hash: str) -> "RunManifest":
        path = Path(out_dir) / cls.FILENAME
        if path.exists():
            data = json.loads(path.read_text())
            manifest = cls(
                config_hash=data["config_hash"],
                input_hashes=data.get("input_hashes", {}),
                artifacts=data.get("artifacts", {}),
                metrics=data.get("metrics", {}),
                timestamps=data.get("timestamps", {}),
            )
            if manifest.config_hash != config_hash:
                # a different config invalidates previous outputs
                return cls(config_hash=config_hash)
            return manifest
        return cls(config_hash=config_hash)

    def verify_artifacts(self) -> list[str]:
        """Names of listed artifacts missing from disk."""
        return [
            name for name, entry in self.artifacts.items()
            if not Path(entry["path"]).exists()
        ]
