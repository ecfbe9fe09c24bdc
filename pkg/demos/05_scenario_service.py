"""The what-if scenario service, exercised in process.

Runs the full pipeline into the demo workspace, loads the artifacts into
the REST app, and walks the endpoints a planner dashboard would call:
baseline stop listing, a spatial routes-ran override, and the temporal
hours-to-trips link. Start the same service on a port with:

    transitgap serve --config <config.json> --bind 127.0.0.1:8000
"""

import json

from _common import demo_config
from fastapi.testclient import TestClient

from transitgap.pipeline import load_serving_context, run_all
from transitgap.service import create_app

config = demo_config()
run_all(config)
client = TestClient(create_app(load_serving_context(config)))

print("GET /health ->", client.get("/health").json())

stops = client.get("/stops").json()
worst = stops[0]
print(f"\nGET /stops -> {len(stops)} stops; worst gap ratio at "
      f"{worst['stop_id']} ({worst['classification']})")

baseline = client.post("/predict/spatial", json={"stop_id": worst["stop_id"]}).json()
print(f"\nPOST /predict/spatial {{stop_id: {worst['stop_id']}}} ->")
print(json.dumps(baseline, indent=2))

doubled = client.post("/scenario/spatial", json={
    "overrides": [{"stop_id": worst["stop_id"],
                   "city_routes_ran": 2 * baseline["actual_supply"] + 10}],
}).json()["results"][0]
print(f"\nPOST /scenario/spatial (routes {baseline['actual_supply']:.0f} -> "
      f"{2 * baseline['actual_supply'] + 10:.0f}) ->")
print(json.dumps(doubled, indent=2))

trips = client.post("/scenario/temporal",
                    json={"revenue_hours": 3400, "use_linear_link": True}).json()
print("\nPOST /scenario/temporal {revenue_hours: 3400, use_linear_link: true} ->")
print(json.dumps(trips, indent=2))
