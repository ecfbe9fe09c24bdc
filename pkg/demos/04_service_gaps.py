"""Service-gap scoring: riders-per-route ratios and model-based shortages.

Runs the spatial side end to end: per-stop demographic profiles feed a
supply model (routes ran from demographics) and a demand model (ridership
from demographics plus actual routes). A stop whose predicted supply far
exceeds what it actually gets is a shortage; the engineered northwest stop
should top the list.
"""

from _common import demo_config

from transitgap.analysis import GapThresholds, assess_gaps
from transitgap.census import apportion_to_blocks, attach_coverage, load_census, stop_profile, unserviced_blocks
from transitgap.ingest import build_design_matrix, load_stops, spatial_rows, train_test_split
from transitgap.models import fit, predict

config = demo_config()

index = load_census(config.blocks_csv, config.block_groups_csv, config.tracts_csv)
profiles = apportion_to_blocks(index)
stops = load_stops(config.stops_csv, exclude_transfer_hubs=True, exclude_jmu_routes=True)
attach_coverage(stops, index, profiles, config.coverage_radius_miles)
rows = spatial_rows(stops, {s.stop_id: stop_profile(s, profiles) for s in stops})

supply_ds = build_design_matrix(rows, config.spatial_supply_features, "city_routes_ran")
demand_ds = build_design_matrix(rows, config.spatial_demand_features, "total_riders")
supply_model = fit(train_test_split(supply_ds, config.train_fraction, config.seed)[0],
                   config.gaps_model_kind, seed=config.seed)
demand_model = fit(train_test_split(demand_ds, config.train_fraction, config.seed)[0],
                   config.gaps_model_kind, seed=config.seed)

unserved = unserviced_blocks(load_stops(config.stops_csv), index, config.coverage_radius_miles)
report = assess_gaps(
    rows, supply_model, demand_model,
    GapThresholds(config.shortage_factor, config.surplus_factor),
    unserviced_block_ids=unserved,
)

print(f"{'stop':<8} {'riders':>8} {'routes':>7} {'ratio':>8} "
      f"{'pred supply':>12} {'class':>10}")
for entry in report.stops[:10]:
    ratio = "inf" if entry.gap_ratio_infinite else f"{entry.gap_ratio:8.1f}"
    print(f"{entry.stop_id:<8} {entry.total_riders:>8.0f} {entry.city_routes_ran:>7.0f} "
          f"{ratio:>8} {entry.predicted_supply:>12.2f} {entry.classification:>10}")

shortages = [e.stop_id for e in report.stops if e.classification == "shortage"]
print(f"\nshortage stops: {shortages}")
print(f"unserviced blocks: {list(report.unserviced_block_ids)}")
