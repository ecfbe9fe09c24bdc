"""REST scenario service: endpoint contract, error codes, statelessness."""

import json

import pytest
from fastapi.testclient import TestClient

from transitgap.fixtures import GAP_STOP_ID
from transitgap.pipeline import load_serving_context
from transitgap.service import create_app


@pytest.fixture(scope="module")
def client(pipeline_run):
    config, _ = pipeline_run
    context = load_serving_context(config)
    return TestClient(create_app(context))


def any_stop(client):
    return client.get("/stops").json()[0]


class TestHealthAndStops:
    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}

    def test_stops_carry_profile_and_gap_fields(self, client):
        stops = client.get("/stops").json()
        assert len(stops) == 24
        for stop in stops:
            assert {"stop_id", "name", "lat", "lon", "profile",
                    "gap_ratio", "classification"} <= set(stop)
        gap_stop = next(s for s in stops if s["stop_id"] == GAP_STOP_ID)
        assert gap_stop["classification"] == "shortage"


class TestSignificance:
    def test_known_models(self, client):
        for model in ("temporal_demand", "spatial_demand"):
            response = client.get("/significance", params={"model": model})
            assert response.status_code == 200
            assert response.json()["features"]

    def test_unknown_model_404(self, client):
        response = client.get("/significance", params={"model": "nope"})
        assert response.status_code == 404
        assert response.json()["code"] == "unknown_model"


class TestPredict:
    def test_temporal_predict_by_name(self, client, pipeline_run):
        config, _ = pipeline_run
        reference = json.loads(
            (config.out_path / "temporal_reference.json").read_text()
        )["values"]
        features = {
            name: reference[name]
            for name in ("revenue_miles", "revenue_hours", "adj_pop",
                         "means_public_transit", "t_month")
        }
        response = client.post("/predict/temporal", json={"features": features})
        assert response.status_code == 200
        body = response.json()
        assert body["model_kind"] == "neural_net"
        assert 0 < body["prediction"] < 1e7

    def test_temporal_predict_missing_feature_400(self, client):
        response = client.post("/predict/temporal", json={"features": {"revenue_miles": 1.0}})
        assert response.status_code == 400
        assert response.json()["code"] == "malformed_body"

    def test_spatial_predict(self, client):
        stop = any_stop(client)
        response = client.post("/predict/spatial", json={"stop_id": stop["stop_id"]})
        assert response.status_code == 200
        body = response.json()
        assert body["actual_supply"] == stop["profile"]["city_routes_ran"]
        assert body["actual_demand"] == stop["profile"]["total_riders"]
        assert isinstance(body["predicted_supply"], float)
        assert isinstance(body["predicted_demand"], float)

    def test_spatial_predict_unknown_stop_404(self, client):
        response = client.post("/predict/spatial", json={"stop_id": "NOPE"})
        assert response.status_code == 404
        assert response.json()["code"] == "unknown_stop"

    def test_malformed_json_400(self, client):
        response = client.post(
            "/predict/spatial",
            content=b"{not json",
            headers={"content-type": "application/json"},
        )
        assert response.status_code == 400


class TestSpatialScenario:
    def test_identity_override_matches_baseline_prediction(self, client):
        stop = any_stop(client)
        baseline = client.post("/predict/spatial", json={"stop_id": stop["stop_id"]}).json()
        scenario = client.post(
            "/scenario/spatial",
            json={"overrides": [{"stop_id": stop["stop_id"],
                                 "city_routes_ran": stop["profile"]["city_routes_ran"]}]},
        ).json()["results"][0]
        assert scenario["predicted_demand"] == baseline["predicted_demand"]

    def test_negative_override_422(self, client):
        stop = any_stop(client)
        response = client.post(
            "/scenario/spatial",
            json={"overrides": [{"stop_id": stop["stop_id"], "city_routes_ran": -1}]},
        )
        assert response.status_code == 422
        assert response.json()["code"] == "negative_override"

    def test_multiple_overrides(self, client):
        stops = client.get("/stops").json()[:3]
        overrides = [
            {"stop_id": s["stop_id"], "city_routes_ran": s["profile"]["city_routes_ran"] + 5}
            for s in stops
        ]
        response = client.post("/scenario/spatial", json={"overrides": overrides})
        assert response.status_code == 200
        results = response.json()["results"]
        assert [r["stop_id"] for r in results] == [s["stop_id"] for s in stops]
        for result in results:
            assert "demand_gap" in result and "classification" in result

    def test_unknown_stop_404(self, client):
        response = client.post(
            "/scenario/spatial",
            json={"overrides": [{"stop_id": "NOPE", "city_routes_ran": 5}]},
        )
        assert response.status_code == 404


class TestTemporalScenario:
    def test_linear_link_hours(self, client, pipeline_run):
        config, _ = pipeline_run
        link = json.loads(
            (config.out_path / "models" / "linear_link_revenue_hours.json").read_text()
        )
        response = client.post(
            "/scenario/temporal", json={"revenue_hours": 3000, "use_linear_link": True}
        )
        assert response.status_code == 200
        body = response.json()
        assert body["method"] == "linear_link:revenue_hours"
        assert body["predicted_trips"] == pytest.approx(
            link["intercept"] + link["slope"] * 3000
        )

    def test_linear_link_requires_exactly_one_input(self, client):
        both = client.post(
            "/scenario/temporal",
            json={"revenue_hours": 1.0, "revenue_miles": 1.0, "use_linear_link": True},
        )
        assert both.status_code == 400
        neither = client.post("/scenario/temporal", json={"use_linear_link": True})
        assert neither.status_code == 400

    def test_model_path_uses_reference_month(self, client):
        response = client.post(
            "/scenario/temporal",
            json={"revenue_hours": 3300, "revenue_miles": 52000, "use_linear_link": False},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["method"] == "model:neural_net"
        assert "reference_month" in body

    def test_negative_values_422(self, client):
        response = client.post(
            "/scenario/temporal", json={"revenue_hours": -5, "use_linear_link": True}
        )
        assert response.status_code == 422


class TestGeoAndStatelessness:
    def test_geojson_served(self, client):
        response = client.get("/geo/coverage")
        assert response.status_code == 200
        assert response.json()["type"] == "FeatureCollection"

    def test_requests_do_not_mutate_state(self, client):
        stop = any_stop(client)
        before = client.post("/predict/spatial", json={"stop_id": stop["stop_id"]}).json()
        client.post(
            "/scenario/spatial",
            json={"overrides": [{"stop_id": stop["stop_id"], "city_routes_ran": 99}]},
        )
        after = client.post("/predict/spatial", json={"stop_id": stop["stop_id"]}).json()
        assert before == after
        stops_again = client.get("/stops").json()
        assert any(s["stop_id"] == stop["stop_id"] for s in stops_again)
