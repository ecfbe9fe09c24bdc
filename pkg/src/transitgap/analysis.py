"""Predictor significance, the supply-to-demand linear link, and gap scoring."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DegeneratePredictor,
    EmptyDataset,
    NegativeOverride,
    SpecMismatch,
    TooFewRows,
)
from .ingest import Dataset, MonthlyRecord, SpatialRow
from .models import (
    KIND_NEURAL_NET,
    ModelArtifact,
    finite_difference_gradient,
    input_gradient,
    predict,
)

CLASS_SHORTAGE = "shortage"
CLASS_SURPLUS = "surplus"
CLASS_BALANCED = "balanced"


# ---------------------------------------------------------------------------
# significance of predictors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignificanceReport:
    """Per-feature averaged |partial derivative| plus its signed mean.

    The absolute mean ranks how strongly a predictor moves the output; the
    signed mean gives the direction of the average effect.
    """

    feature_names: tuple[str, ...]
    mean_abs_gradient: tuple[float, ...]
    mean_signed_gradient: tuple[float, ...]
    evaluation_points: int
    space: str = "standardized"

    def ranking(self) -> list[str]:
        order = sorted(
            range(len(self.feature_names)),
            key=lambda i: (-self.mean_abs_gradient[i], self.feature_names[i]),
        )
        return [self.feature_names[i] for i in order]

    def to_dict(self) -> dict:
        return {
            "space": self.space,
            "evaluation_points": self.evaluation_points,
            "features": [
                {
                    "name": name,
                    "significance": abs_grad,
                    "direction": signed,
                    "sign": "positive" if signed >= 0 else "negative",
                }
                for name, abs_grad, signed in zip(
                    self.feature_names, self.mean_abs_gradient, self.mean_signed_gradient
                )
            ],
        }


def significance(
    model: ModelArtifact,
    ds: Dataset,
    points: np.ndarray | None = None,
    space: str = "standardized",
) -> SignificanceReport:
    """Average absolute (and signed) input gradients over evaluation points.

    Neural nets use exact reverse-mode gradients; every other kind falls back
    to central finite differences so the measure stays model-agnostic. By
    default the dataset rows are the evaluation points; pass ``points`` for a
    custom grid. ``space="raw"`` rescales gradients to raw feature units
    through the stored standardization.
    """
    if points is None:
        points = ds.features
    points = np.asarray(points, dtype=float)
    if points.shape[0] == 0:
        raise EmptyDataset("no rows to evaluate gradients on")
    if points.shape[1] != model.spec.n_features:
        raise SpecMismatch(
            f"points have {points.shape[1]} columns, model expects {model.spec.n_features}"
        )
    grads = np.empty_like(points)
    for i, x in enumerate(points):
        if model.kind == KIND_NEURAL_NET:
            grads[i] = input_gradient(model, x)
        else:
            grads[i] = finite_difference_gradient(model, x)
    if space == "raw":
        grads = grads / np.asarray(model.spec.stds)
    elif space != "standardized":
        raise ValueError(f"space must be 'standardized' or 'raw', got {space!r}")
    return SignificanceReport(
        feature_names=model.spec.feature_names,
        mean_abs_gradient=tuple(float(v) for v in np.abs(grads).mean(axis=0)),
        mean_signed_gradient=tuple(float(v) for v in grads.mean(axis=0)),
        evaluation_points=points.shape[0],
        space=space,
    )


# ---------------------------------------------------------------------------
# linear supply -> demand link
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearLink:
    """Simple regression of passenger trips on one supply quantifier."""

    intercept: float
    slope: float
    predictor_name: str
    r_squared: float
    excluded_rows: tuple[str, ...] = ()
    n_used: int = 0

    def to_dict(self) -> dict:
        return {
            "intercept": self.intercept,
            "slope": self.slope,
            "predictor_name": self.predictor_name,
            "r_squared": self.r_squared,
            "excluded_rows": list(self.excluded_rows),
            "n_used": self.n_used,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "LinearLink":
        return cls(
            intercept=float(data["intercept"]),
            slope=float(data["slope"]),
            predictor_name=data["predictor_name"],
            r_squared=float(data["r_squared"]),
            excluded_rows=tuple(data.get("excluded_rows", ())),
            n_used=int(data.get("n_used", 0)),
        )


def fit_linear_link(
    records: Sequence[MonthlyRecord],
    predictor: str = "revenue_hours",
    exclusions: Sequence[str] = (),
) -> LinearLink:
    """Least squares of passenger trips on revenue hours or miles.

    ``exclusions`` drops rows by id before fitting (e.g. months where service
    kept running while ridership collapsed).
    """
    if predictor not in ("revenue_hours", "revenue_miles"):
        raise ValueError(f"predictor must be revenue_hours or revenue_miles, got {predictor!r}")
    excluded = set(exclusions)
    kept = [r for r in records if r.row_id not in excluded]
    if len(kept) < 3:
        raise TooFewRows(f"need at least 3 rows after exclusions, got {len(kept)}")
    x = np.array([getattr(r, predictor) for r in kept], dtype=float)
    y = np.array([r.passenger_trips for r in kept], dtype=float)
    var_x = float(((x - x.mean()) ** 2).sum())
    if var_x == 0.0:
        raise DegeneratePredictor(f"{predictor} is constant across rows")
    slope = float(((x - x.mean()) * (y - y.mean())).sum() / var_x)
    intercept = float(y.mean() - slope * x.mean())
    residual = y - (intercept + slope * x)
    sst = float(((y - y.mean()) ** 2).sum())
    r_squared = 1.0 if sst == 0.0 else 1.0 - float(residual @ residual) / sst
    return LinearLink(
        intercept=intercept,
        slope=slope,
        predictor_name=predictor,
        r_squared=r_squared,
        excluded_rows=tuple(sorted(excluded)),
        n_used=len(kept),
    )


def predict_trips(link: LinearLink, value: float) -> float:
    return link.intercept + link.slope * value


# ---------------------------------------------------------------------------
# service gaps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapThresholds:
    """How many times larger one side must be before we call it a gap."""

    shortage_factor: float = 1.5
    surplus_factor: float = 1.5


@dataclass(frozen=True)
class GapRatio:
    """Riders per route ran; routes of zero with riders is flagged infinite."""

    value: float
    infinite: bool
    riders: float

    @property
    def sort_key(self) -> float:
        return math.inf if self.infinite else self.value


def gap_ratio(stop) -> GapRatio:
    """Total riders divided by routes ran at a stop (duck-typed record)."""
    riders = float(stop.total_riders)
    routes = float(stop.city_routes_ran)
    if routes > 0:
        return GapRatio(value=riders / routes, infinite=False, riders=riders)
    if riders > 0:
        return GapRatio(value=math.inf, infinite=True, riders=riders)
    return GapRatio(value=0.0, infinite=False, riders=riders)


def classify_gap(predicted: float, actual: float, thresholds: GapThresholds) -> str:
    if predicted > actual and predicted >= thresholds.shortage_factor * actual:
        return CLASS_SHORTAGE
    if actual > predicted and actual >= thresholds.surplus_factor * predicted:
        return CLASS_SURPLUS
    return CLASS_BALANCED


@dataclass(frozen=True)
class StopGap:
    stop_id: str
    gap_ratio: float
    gap_ratio_infinite: bool
    total_riders: float
    city_routes_ran: float
    predicted_supply: float
    predicted_demand: float
    supply_gap: float
    demand_gap: float
    classification: str

    def to_dict(self) -> dict:
        return {
            "stop_id": self.stop_id,
            "gap_ratio": None if self.gap_ratio_infinite else self.gap_ratio,
            "gap_ratio_infinite": self.gap_ratio_infinite,
            "total_riders": self.total_riders,
            "city_routes_ran": self.city_routes_ran,
            "predicted_supply": self.predicted_supply,
            "predicted_demand": self.predicted_demand,
            "supply_gap": self.supply_gap,
            "demand_gap": self.demand_gap,
            "classification": self.classification,
        }


@dataclass(frozen=True)
class GapReport:
    stops: tuple[StopGap, ...]
    unserviced_block_ids: tuple[str, ...]
    thresholds: GapThresholds = field(default_factory=GapThresholds)

    def to_dict(self) -> dict:
        return {
            "thresholds": {
                "shortage_factor": self.thresholds.shortage_factor,
                "surplus_factor": self.thresholds.surplus_factor,
            },
            "stops": [s.to_dict() for s in self.stops],
            "unserviced_block_ids": list(self.unserviced_block_ids),
        }


def spatial_feature_values(row: SpatialRow) -> dict[str, float]:
    """Raw named values a spatial model can draw its features from."""
    values = {
        "stop_pop": row.stop_pop,
        "lat": row.lat,
        "lon": row.lon,
        "city_routes_ran": row.city_routes_ran,
        "total_riders": row.total_riders,
    }
    values.update({k: float(v) for k, v in row.tvv.items()})
    return values


def _predict_row(model: ModelArtifact, values: Mapping[str, float]) -> float:
    try:
        x = model.spec.row_from_values(values)
    except Exception as exc:
        raise SpecMismatch(f"cannot build feature row for model: {exc}") from exc
    return float(predict(model, x[None, :])[0])


def assess_gaps(
    rows: Sequence[SpatialRow],
    supply_model: ModelArtifact,
    demand_model: ModelArtifact,
    thresholds: GapThresholds = GapThresholds(),
    unserviced_block_ids: Sequence[str] = (),
) -> GapReport:
    """Score each stop's supply and demand gap and classify shortages.

    supply_gap = predicted routes - actual routes; demand_gap likewise
    for ridership; classification compares predicted to actual supply. The
    report is sorted by descending gap ratio (infinite first), stop id
    breaking ties.
    """
    entries = []
    for row in rows:
        values = spatial_feature_values(row)
        predicted_supply = _predict_row(supply_model, values)
        predicted_demand = _predict_row(demand_model, values)
        ratio = gap_ratio(row)
        entries.append(
            StopGap(
                stop_id=row.stop_id,
                gap_ratio=ratio.value,
                gap_ratio_infinite=ratio.infinite,
                total_riders=row.total_riders,
                city_routes_ran=row.city_routes_ran,
                predicted_supply=predicted_supply,
                predicted_demand=predicted_demand,
                supply_gap=predicted_supply - row.city_routes_ran,
                demand_gap=predicted_demand - row.total_riders,
                classification=classify_gap(
                    predicted_supply, row.city_routes_ran, thresholds
                ),
            )
        )
    entries.sort(key=lambda e: (-(math.inf if e.gap_ratio_infinite else e.gap_ratio), e.stop_id))
    return GapReport(
        stops=tuple(entries),
        unserviced_block_ids=tuple(unserviced_block_ids),
        thresholds=thresholds,
    )


def scenario_demand(
    demand_model: ModelArtifact,
    row: SpatialRow,
    routes_ran_override: float,
) -> float:
    """Predicted stop ridership with the routes-ran input overridden."""
    if routes_ran_override < 0:
        raise NegativeOverride(f"routes override must be >= 0, got {routes_ran_override}")
    values = spatial_feature_values(row)
    values["city_routes_ran"] = float(routes_ran_override)
    return _predict_row(demand_model, values)
