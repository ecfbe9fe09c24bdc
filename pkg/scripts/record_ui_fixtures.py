"""Record REST responses from a fixture-city run for the dashboard tests.

Runs the full pipeline, starts the service in process, and captures the
response bodies the browser dashboard replays offline. The recorded town
is a three-stop slice of the fixture city (the engineered shortage stop
plus two ordinary ones); scenario tapes hold an identity override and a
+5-routes override per stop.

Usage: python3 scripts/record_ui_fixtures.py [target_dir]
"""

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from transitgap.fixtures import GAP_STOP_ID, fixture_config, write_fixture_city
from transitgap.pipeline import load_serving_context, run_all
from transitgap.service import create_app

TAPE_STOPS = [GAP_STOP_ID, "S00", "S09"]


def main() -> None:
    target = Path(sys.argv[1] if len(sys.argv) > 1 else "frontend/tests/fixtures")
    target.mkdir(parents=True, exist_ok=True)

    workdir = Path(tempfile.mkdtemp(prefix="ui_fixtures_"))
    write_fixture_city(workdir / "city")
    config = fixture_config(workdir / "city", workdir / "out")
    run_all(config)
    client = TestClient(create_app(load_serving_context(config)))

    def save(name: str, payload) -> None:
        (target / name).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        print(f"recorded {name}")

    stops = [s for s in client.get("/stops").json() if s["stop_id"] in TAPE_STOPS]
    assert len(stops) == len(TAPE_STOPS)
    save("stops.json", stops)

    save("significance_spatial_demand.json",
         client.get("/significance", params={"model": "spatial_demand"}).json())
    save("significance_temporal_demand.json",
         client.get("/significance", params={"model": "temporal_demand"}).json())

    scenarios = {}
    for stop in stops:
        routes = stop["profile"]["city_routes_ran"]
        for label, value in (("identity", routes), ("plus5", routes + 5)):
            body = {"overrides": [{"stop_id": stop["stop_id"], "city_routes_ran": value}]}
            response = client.post("/scenario/spatial", json=body)
            assert response.status_code == 200
            scenarios[f"{stop['stop_id']}:{label}"] = {
                "request": body,
                "response": response.json(),
            }
    save("scenario_spatial.json", scenarios)

    predictions = {
        stop["stop_id"]: client.post("/predict/spatial",
                                     json={"stop_id": stop["stop_id"]}).json()
        for stop in stops
    }
    save("predict_spatial.json", predictions)

    temporal = {}
    for body in (
        {"revenue_hours": 3000, "use_linear_link": True},
        {"revenue_miles": 50000, "use_linear_link": True},
        {"revenue_hours": 3300, "revenue_miles": 52000, "use_linear_link": False},
    ):
        key = "_".join(
            f"{k}={v}" for k, v in sorted(body.items()) if k != "use_linear_link"
        ) + ("_link" if body["use_linear_link"] else "_model")
        response = client.post("/scenario/temporal", json=body)
        assert response.status_code == 200
        temporal[key] = {"request": body, "response": response.json()}
    save("scenario_temporal.json", temporal)

    geojson = client.get("/geo/coverage").json()
    kept = [
        feature for feature in geojson["features"]
        if feature["properties"]["kind"] == "unserviced_block"
        or feature["properties"].get("stop_id") in TAPE_STOPS
    ]
    save("coverage.geojson.json", {"type": "FeatureCollection", "features": kept})


if __name__ == "__main__":
    main()
