"""What-if scenario REST service over trained, immutable artifacts.

Error contract: 400 malformed body, 404 unknown stop/model, 422 failed
precondition; bodies are {code, message}. No request mutates server state.
"""

from __future__ import annotations

import logging

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .analysis import classify_gap, predict_trips, scenario_demand, spatial_feature_values
from .errors import NegativeOverride, UnknownFeature
from .models import predict
from .pipeline import ServingContext

logger = logging.getLogger(__name__)


class TemporalPredictRequest(BaseModel):
    features: dict[str, float]


class SpatialPredictRequest(BaseModel):
    stop_id: str


class RouteOverride(BaseModel):
    stop_id: str
    city_routes_ran: float


class SpatialScenarioRequest(BaseModel):
    overrides: list[RouteOverride]


class TemporalScenarioRequest(BaseModel):
    revenue_hours: float | None = None
    revenue_miles: float | None = None
    use_linear_link: bool = True


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(context: ServingContext, ui_dir=None) -> FastAPI:
    """Build the app; ``ui_dir`` optionally mounts the dashboard at /ui."""
    app = FastAPI(title="transitgap scenario service", version="1.0")
    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")
    gap_by_stop = {entry["stop_id"]: entry for entry in context.gap_report["stops"]}
    rows = context.spatial_rows

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return _error(400, "malformed_body", str(exc.errors()[:3]))

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/stops")
    def stops():
        payload = []
        for entry in context.stops:
            gap = gap_by_stop.get(entry["stop_id"], {})
            payload.append(
                {
                    "stop_id": entry["stop_id"],
                    "name": entry["name"],
                    "lat": entry["lat"],
                    "lon": entry["lon"],
                    "profile": {
                        "stop_pop": entry["stop_pop"],
                        "tvv": entry["tvv"],
                        "total_riders": entry["total_riders"],
                        "city_routes_ran": entry["city_routes_ran"],
                        "empty_coverage": entry["empty_coverage"],
                    },
                    "gap_ratio": gap.get("gap_ratio"),
                    "gap_ratio_infinite": gap.get("gap_ratio_infinite", False),
                    "classification": gap.get("classification"),
                }
            )
        return payload

    @app.get("/significance")
    def significance_report(model: str = Query("temporal_demand")):
        if model not in context.significance_reports:
            return _error(404, "unknown_model",
                          f"no significance report for {model!r}; "
                          f"available: {sorted(context.significance_reports)}")
        return context.significance_reports[model]

    @app.post("/predict/temporal")
    def predict_temporal(body: TemporalPredictRequest):
        spec = context.temporal_demand.spec
        try:
            x = spec.row_from_values(body.features)
        except UnknownFeature as exc:
            return _error(400, "malformed_body", str(exc))
        value = float(predict(context.temporal_demand, x[None, :])[0])
        return {"prediction": value, "model_kind": context.temporal_demand.kind}

    @app.post("/predict/spatial")
    def predict_spatial(body: SpatialPredictRequest):
        row = rows.get(body.stop_id)
        if row is None:
            return _error(404, "unknown_stop", f"no stop {body.stop_id!r}")
        values = spatial_feature_values(row)
        predicted_supply = float(
            predict(context.spatial_supply, context.spatial_supply.spec.row_from_values(values)[None, :])[0]
        )
        predicted_demand = float(
            predict(context.spatial_demand, context.spatial_demand.spec.row_from_values(values)[None, :])[0]
        )
        return {
            "stop_id": row.stop_id,
            "predicted_supply": predicted_supply,
            "predicted_demand": predicted_demand,
            "actual_supply": row.city_routes_ran,
            "actual_demand": row.total_riders,
        }

    @app.post("/scenario/spatial")
    def scenario_spatial(body: SpatialScenarioRequest):
        results = []
        for override in body.overrides:
            row = rows.get(override.stop_id)
            if row is None:
                return _error(404, "unknown_stop", f"no stop {override.stop_id!r}")
            try:
                predicted_demand = scenario_demand(
                    context.spatial_demand, row, override.city_routes_ran
                )
            except NegativeOverride as exc:
                return _error(422, "negative_override", str(exc))
            values = spatial_feature_values(row)
            predicted_supply = float(
                predict(context.spatial_supply,
                        context.spatial_supply.spec.row_from_values(values)[None, :])[0]
            )
            results.append(
                {
                    "stop_id": row.stop_id,
                    "city_routes_ran": override.city_routes_ran,
                    "predicted_demand": predicted_demand,
                    "demand_gap": predicted_demand - row.total_riders,
                    "classification": classify_gap(
                        predicted_supply, override.city_routes_ran, context.thresholds
                    ),
                }
            )
        return {"results": results}

    @app.post("/scenario/temporal")
    def scenario_temporal(body: TemporalScenarioRequest):
        if body.use_linear_link:
            if body.revenue_hours is not None and body.revenue_miles is None:
                link = context.links["revenue_hours"]
                value = body.revenue_hours
            elif body.revenue_miles is not None and body.revenue_hours is None:
                link = context.links["revenue_miles"]
                value = body.revenue_miles
            else:
                return _error(
                    400, "malformed_body",
                    "the linear link takes exactly one of revenue_hours or revenue_miles",
                )
            if value < 0:
                return _error(422, "negative_override", "supply values must be >= 0")
            return {
                "predicted_trips": predict_trips(link, value),
                "method": f"linear_link:{link.predictor_name}",
            }
        if body.revenue_hours is None and body.revenue_miles is None:
            return _error(400, "malformed_body",
                          "provide revenue_hours and/or revenue_miles to override")
        values = dict(context.temporal_reference["values"])
        for name in ("revenue_hours", "revenue_miles"):
            given = getattr(body, name)
            if given is not None:
                if given < 0:
                    return _error(422, "negative_override", "supply values must be >= 0")
                values[name] = given
        spec = context.temporal_demand.spec
        x = spec.row_from_values(values)
        return {
            "predicted_trips": float(predict(context.temporal_demand, x[None, :])[0]),
            "method": f"model:{context.temporal_demand.kind}",
            "reference_month": context.temporal_reference["row_id"],
        }

    @app.get("/geo/coverage")
    def geo_coverage():
        return context.geojson

    return app
