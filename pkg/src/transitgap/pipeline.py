"""Pipeline commands: ingest, train, evaluate, significance, gaps, serve.

Every command is idempotent given identical inputs: all randomness flows
from the config seed and artifacts are written as stable sorted JSON, so a
re-run on unchanged inputs reproduces every artifact byte for byte. Only
the run manifest carries timestamps.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
import numpy as np

from .analysis import (
    GapReport,
    GapThresholds,
    LinearLink,
    SignificanceReport,
    assess_gaps,
    fit_linear_link,
    significance,
)
from .census import apportion_to_blocks, attach_coverage, load_census, stop_profile, unserviced_blocks
from .config import PipelineConfig, RunManifest, sha256_file
from .errors import ExpansionTooLarge, MissingArtifact, SingularDesign, TooFewRows
from .geojson import coverage_feature_collection, write_geojson
from .ingest import (
    Dataset,
    SpatialRow,
    load_calendar,
    load_monthly,
    load_stops,
    build_design_matrix,
    spatial_rows,
    train_test_split,
)
from .models import MODEL_KINDS, fit, load_artifact, metrics, predict, save_artifact

logger = logging.getLogger(__name__)

DATASET_NAMES = (
    "temporal_supply_miles",
    "temporal_supply_hours",
    "temporal_demand",
    "spatial_supply",
    "spatial_demand",
)

_SLOT_DATASETS = {
    "temporal_supply": ("temporal_supply_miles", "temporal_supply_hours"),
    "temporal_demand": ("temporal_demand",),
    "spatial_supply": ("spatial_supply",),
    "spatial_demand": ("spatial_demand",),
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_json(payload, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return path


def _read_json(path: Path):
    if not path.exists():
        raise MissingArtifact(f"required artifact missing: {path}")
    return json.loads(path.read_text())


def dataset_path(config: PipelineConfig, name: str) -> Path:
    return config.out_path / "datasets" / f"{name}.json"


def model_path(config: PipelineConfig, dataset_name: str, kind: str) -> Path:
    return config.out_path / "models" / f"{dataset_name}__{kind}.json"


def link_path(config: PipelineConfig, predictor: str) -> Path:
    return config.out_path / "models" / f"linear_link_{predictor}.json"


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------

def cmd_ingest(config: PipelineConfig) -> RunManifest:
    """Load sources, compute coverage and profiles, persist design matrices."""
    manifest = RunManifest.load_or_create(config.out_path, config.config_hash())
    for name, path in config.input_paths().items():
        if not path.exists():
            raise MissingArtifact(f"input file missing: {path}")
        manifest.input_hashes[name] = sha256_file(path)

    index = load_census(config.blocks_csv, config.block_groups_csv, config.tracts_csv)
    profiles = apportion_to_blocks(index)
    all_stops = load_stops(config.stops_csv)
    model_stops = load_stops(
        config.stops_csv,
        exclude_transfer_hubs=config.exclude_transfer_hubs,
        exclude_jmu_routes=config.exclude_jmu_routes,
    )
    coverage = attach_coverage(model_stops, index, profiles, config.coverage_radius_miles)
    unserved = unserviced_blocks(all_stops, index, config.coverage_radius_miles)
    stop_profiles = {s.stop_id: stop_profile(s, profiles) for s in model_stops}
    rows = spatial_rows(model_stops, stop_profiles)

    calendar = load_calendar(config.calendar_csv)
    records = load_monthly(
        config.monthly_csv, calendar=calendar,
        off_session_factor=config.off_session_factor,
    )

    datasets = {
        "temporal_supply_miles": build_design_matrix(
            records, config.temporal_supply_features, "revenue_miles", config.month_encoding
        ),
        "temporal_supply_hours": build_design_matrix(
            records, config.temporal_supply_features, "revenue_hours", config.month_encoding
        ),
        "temporal_demand": build_design_matrix(
            records, config.temporal_demand_features, "passenger_trips", config.month_encoding
        ),
        "spatial_supply": build_design_matrix(
            rows, config.spatial_supply_features, "city_routes_ran", config.month_encoding
        ),
        "spatial_demand": build_design_matrix(
            rows, config.spatial_demand_features, "total_riders", config.month_encoding
        ),
    }
    for name, ds in datasets.items():
        path = _write_json(ds.to_dict(), dataset_path(config, name))
        manifest.record_artifact(f"dataset:{name}", path)

    profile_payload = []
    stops_by_id = {s.stop_id: s for s in model_stops}
    for stop_id in sorted(stop_profiles):
        profile = stop_profiles[stop_id]
        record = stops_by_id[stop_id]
        profile_payload.append(
            {
                "stop_id": stop_id,
                "name": record.name,
                "lat": record.lat,
                "lon": record.lon,
                "total_riders": record.total_riders,
                "city_routes_ran": record.city_routes_ran,
                "stop_pop": profile.stop_pop,
                "tvv": {k: profile.tvv[k] for k in sorted(profile.tvv)},
                "served_block_ids": list(profile.served_block_ids),
                "empty_coverage": profile.empty_coverage,
            }
        )
    path = _write_json(profile_payload, config.out_path / "stop_profiles.json")
    manifest.record_artifact("stop_profiles", path)

    coverage_payload = {
        "radius_miles": config.coverage_radius_miles,
        "blocks_served": {k: sorted(v) for k, v in sorted(coverage.items())},
        "unserviced_block_ids": unserved,
    }
    path = _write_json(coverage_payload, config.out_path / "coverage.json")
    manifest.record_artifact("coverage", path)

    latest = records[-1]
    reference = {
        "row_id": latest.row_id,
        "values": {
            "revenue_miles": latest.revenue_miles,
            "revenue_hours": latest.revenue_hours,
            "adj_pop": latest.adj_pop,
            "jmu_enrollment": latest.jmu_enrollment,
            "jmu_routes_ran": latest.jmu_routes_ran,
            "city_routes_ran": latest.city_routes_ran,
            "t_year": latest.t_year,
            "t_month": latest.t_month,
            **{k: latest.tvv[k] for k in sorted(latest.tvv)},
        },
    }
    path = _write_json(reference, config.out_path / "temporal_reference.json")
    manifest.record_artifact("temporal_reference", path)

    manifest.timestamps["ingest"] = _now()
    manifest.save(config.out_path)
    return manifest


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def _load_dataset(config: PipelineConfig, name: str) -> Dataset:
    return Dataset.from_dict(_read_json(dataset_path(config, name)))


def train_one(config: PipelineConfig, dataset_name: str, kind: str):
    """Split, fit, and score one (dataset, kind) pair."""
    ds = _load_dataset(config, dataset_name)
    train, test = train_test_split(ds, config.train_fraction, config.seed)
    model = fit(train, kind, seed=config.seed, **config.hyperparams(kind))
    report = metrics(predict(model, test.features), test.targets)
    return model, report


def cmd_train(config: PipelineConfig, which: str | None = None, kind: str | None = None) -> RunManifest:
    """Train configured (slot, kind) jobs and persist artifacts plus links."""
    manifest = RunManifest.load_or_create(config.out_path, config.config_hash())
    if which is not None:
        jobs = [{"which": which, "kind": kind or "neural_net"}]
    else:
        jobs = list(config.train_jobs)

    for job in jobs:
        slot, job_kind = job["which"], job["kind"]
        for dataset_name in _SLOT_DATASETS[slot]:
            model, report = train_one(config, dataset_name, job_kind)
            path = save_artifact(model, model_path(config, dataset_name, job_kind))
            manifest.record_artifact(f"model:{dataset_name}__{job_kind}", path)
            manifest.metrics.setdefault("train", {})[f"{dataset_name}__{job_kind}"] = report.to_dict()
            logger.info(
                "trained %s %s: rmse=%.4f rrmse=%.4f",
                dataset_name, job_kind, report.rmse, report.relative_rmse,
            )

    records = load_monthly(
        config.monthly_csv, calendar=load_calendar(config.calendar_csv),
        off_session_factor=config.off_session_factor,
    )
    for predictor in ("revenue_hours", "revenue_miles"):
        link = fit_linear_link(records, predictor, config.link_exclusions)
        path = _write_json(link.to_dict(), link_path(config, predictor))
        manifest.record_artifact(f"link:{predictor}", path)

    manifest.timestamps["train"] = _now()
    manifest.save(config.out_path)
    return manifest


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def cmd_evaluate(config: PipelineConfig) -> dict:
    """Fit all four kinds on every dataset and tabulate test metrics."""
    manifest = RunManifest.load_or_create(config.out_path, config.config_hash())
    report: dict[str, dict] = {}
    for dataset_name in DATASET_NAMES:
        report[dataset_name] = {}
        for kind in MODEL_KINDS:
            try:
                _, metric = train_one(config, dataset_name, kind)
                report[dataset_name][kind] = metric.to_dict()
            except (ExpansionTooLarge, SingularDesign, TooFewRows) as exc:
                report[dataset_name][kind] = {"error": f"{type(exc).__name__}: {exc}"}

    path = _write_json(report, config.out_path / "evaluation_report.json")
    manifest.record_artifact("evaluation_report", path)

    csv_path = config.out_path / "evaluation_report.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "model_kind", "rmse", "relative_rmse", "n_test", "error"])
        for dataset_name in DATASET_NAMES:
            for kind in MODEL_KINDS:
                entry = report[dataset_name][kind]
                if "error" in entry:
                    writer.writerow([dataset_name, kind, "", "", "", entry["error"]])
                else:
                    writer.writerow([
                        dataset_name, kind, repr(entry["rmse"]),
                        repr(entry["relative_rmse"]), entry["n_test"], "",
                    ])
    manifest.record_artifact("evaluation_report_csv", csv_path)
    manifest.metrics["evaluate"] = report
    manifest.timestamps["evaluate"] = _now()
    manifest.save(config.out_path)
    return report


# ---------------------------------------------------------------------------
# significance
# ---------------------------------------------------------------------------

def cmd_significance(config: PipelineConfig, model: str = "temporal_demand") -> SignificanceReport:
    """Averaged absolute input gradients for a trained demand model."""
    if model not in ("temporal_demand", "spatial_demand"):
        raise MissingArtifact(f"significance is reported for demand models, not {model!r}")
    manifest = RunManifest.load_or_create(config.out_path, config.config_hash())
    kind = config.significance_model_kind
    artifact_path = model_path(config, model, kind)
    if not artifact_path.exists():
        raise MissingArtifact(f"train the {model} {kind} model first: {artifact_path}")
    artifact = load_artifact(artifact_path)
    ds = _load_dataset(config, model)
    report = significance(artifact, ds)

    path = _write_json(report.to_dict(), config.out_path / f"significance_{model}.json")
    manifest.record_artifact(f"significance:{model}", path)
    csv_path = config.out_path / f"significance_{model}.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "significance", "direction", "sign"])
        for entry in report.to_dict()["features"]:
            writer.writerow([
                entry["name"], repr(entry["significance"]),
                repr(entry["direction"]), entry["sign"],
            ])
    manifest.record_artifact(f"significance_csv:{model}", csv_path)
    manifest.timestamps[f"significance:{model}"] = _now()
    manifest.save(config.out_path)
    return report


# ---------------------------------------------------------------------------
# gaps
# ---------------------------------------------------------------------------

def _spatial_rows_from_profiles(config: PipelineConfig) -> list[SpatialRow]:
    payload = _read_json(config.out_path / "stop_profiles.json")
    rows = []
    for entry in payload:
        rows.append(
            SpatialRow(
                stop_id=entry["stop_id"],
                lat=entry["lat"],
                lon=entry["lon"],
                stop_pop=entry["stop_pop"],
                city_routes_ran=entry["city_routes_ran"],
                total_riders=entry["total_riders"],
                tvv=entry["tvv"],
            )
        )
    return rows


def cmd_gaps(config: PipelineConfig) -> GapReport:
    """Ratio- and model-based service gaps plus the coverage GeoJSON layer."""
    manifest = RunManifest.load_or_create(config.out_path, config.config_hash())
    kind = config.gaps_model_kind
    supply_path = model_path(config, "spatial_supply", kind)
    demand_path = model_path(config, "spatial_demand", kind)
    for path in (supply_path, demand_path):
        if not path.exists():
            raise MissingArtifact(f"train the spatial {kind} models first: {path}")
    supply_model = load_artifact(supply_path)
    demand_model = load_artifact(demand_path)
    rows = _spatial_rows_from_profiles(config)
    coverage = _read_json(config.out_path / "coverage.json")
    thresholds = GapThresholds(config.shortage_factor, config.surplus_factor)
    report = assess_gaps(
        rows, supply_model, demand_model, thresholds,
        unserviced_block_ids=coverage["unserviced_block_ids"],
    )

    path = _write_json(report.to_dict(), config.out_path / "gap_report.json")
    manifest.record_artifact("gap_report", path)
    csv_path = config.out_path / "gap_report.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "stop_id", "gap_ratio", "gap_ratio_infinite", "total_riders",
            "city_routes_ran", "predicted_supply", "predicted_demand",
            "supply_gap", "demand_gap", "classification",
        ])
        for entry in report.stops:
            writer.writerow([
                entry.stop_id,
                "" if entry.gap_ratio_infinite else repr(entry.gap_ratio),
                entry.gap_ratio_infinite, repr(entry.total_riders),
                repr(entry.city_routes_ran), repr(entry.predicted_supply),
                repr(entry.predicted_demand), repr(entry.supply_gap),
                repr(entry.demand_gap), entry.classification,
            ])
    manifest.record_artifact("gap_report_csv", csv_path)

    index = load_census(config.blocks_csv, config.block_groups_csv, config.tracts_csv)
    stops = load_stops(
        config.stops_csv,
        exclude_transfer_hubs=config.exclude_transfer_hubs,
        exclude_jmu_routes=config.exclude_jmu_routes,
    )
    profiles = apportion_to_blocks(index)
    attach_coverage(stops, index, profiles, config.coverage_radius_miles)
    stop_profiles = {s.stop_id: stop_profile(s, profiles) for s in stops}
    collection = coverage_feature_collection(
        stops, index, stop_profiles, report, block_profiles=profiles
    )
    geo_path = write_geojson(collection, config.out_path / "coverage.geojson")
    manifest.record_artifact("coverage_geojson", geo_path)

    manifest.timestamps["gaps"] = _now()
    manifest.save(config.out_path)
    return report


# ---------------------------------------------------------------------------
# serve + full run
# ---------------------------------------------------------------------------

@dataclass
class ServingContext:
    """Immutable artifacts the scenario service answers from."""

    config: PipelineConfig
    stops: list[dict]
    gap_report: dict
    spatial_supply: object
    spatial_demand: object
    temporal_demand: object
    links: dict[str, LinearLink]
    temporal_reference: dict
    significance_reports: dict[str, dict]
    geojson: dict
    thresholds: GapThresholds

    @property
    def spatial_rows(self) -> dict[str, SpatialRow]:
        return {
            entry["stop_id"]: SpatialRow(
                stop_id=entry["stop_id"], lat=entry["lat"], lon=entry["lon"],
                stop_pop=entry["stop_pop"], city_routes_ran=entry["city_routes_ran"],
                total_riders=entry["total_riders"], tvv=entry["tvv"],
            )
            for entry in self.stops
        }


def load_serving_context(config: PipelineConfig) -> ServingContext:
    gaps_kind = config.gaps_model_kind
    serve_kind = config.serve_model_kind
    significance_reports = {}
    for model in ("temporal_demand", "spatial_demand"):
        path = config.out_path / f"significance_{model}.json"
        if path.exists():
            significance_reports[model] = _read_json(path)
    links = {}
    for predictor in ("revenue_hours", "revenue_miles"):
        links[predictor] = LinearLink.from_dict(_read_json(link_path(config, predictor)))
    return ServingContext(
        config=config,
        stops=_read_json(config.out_path / "stop_profiles.json"),
        gap_report=_read_json(config.out_path / "gap_report.json"),
        spatial_supply=load_artifact(model_path(config, "spatial_supply", gaps_kind)),
        spatial_demand=load_artifact(model_path(config, "spatial_demand", gaps_kind)),
        temporal_demand=load_artifact(model_path(config, "temporal_demand", serve_kind)),
        links=links,
        temporal_reference=_read_json(config.out_path / "temporal_reference.json"),
        significance_reports=significance_reports,
        geojson=_read_json(config.out_path / "coverage.geojson"),
        thresholds=GapThresholds(config.shortage_factor, config.surplus_factor),
    )


def cmd_serve(config: PipelineConfig, bind: str = "127.0.0.1:8000", ui_dir=None):
    """Run the scenario service over the trained artifacts (blocking)."""
    import uvicorn

    from .service import create_app

    context = load_serving_context(config)
    app = create_app(context, ui_dir=ui_dir)
    host, _, port = bind.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="info")


def run_all(config: PipelineConfig) -> RunManifest:
    """Ingest, train, evaluate, significance, and gaps in one pass."""
    cmd_ingest(config)
    cmd_train(config)
    cmd_evaluate(config)
    cmd_significance(config, "temporal_demand")
    cmd_significance(config, "spatial_demand")
    cmd_gaps(config)
    return RunManifest.load_or_create(config.out_path, config.config_hash())
