"""Census hierarchy, block apportionment, and 3/4-mile stop coverage.

Walks the lowest layer of the toolkit: load the tract/group/block files,
redistribute group-level vulnerability variables to blocks by population
share, find which blocks each stop services, and aggregate per-stop
demographic profiles. Ends by listing blocks no stop reaches.
"""

from _common import demo_config

from transitgap.census import (
    apportion_to_blocks,
    attach_coverage,
    load_census,
    stop_profile,
    unserviced_blocks,
)
from transitgap.ingest import load_stops

config = demo_config()

index = load_census(config.blocks_csv, config.block_groups_csv, config.tracts_csv)
print(f"hierarchy: {len(index.tracts)} tracts, {len(index.groups)} block groups, "
      f"{len(index.blocks)} blocks")

profiles = apportion_to_blocks(index)
group = next(iter(index.groups.values()))
members = [p for p in profiles
           if index.blocks[p.block_id].parent_group_id == group.group_id]
print(f"\napportionment check for group {group.group_id} "
      f"(population {group.population:g}):")
for name in ("renter_population", "below_poverty"):
    total = sum(p.tvv[name] for p in members)
    print(f"  {name}: group value {group.tvv[name]:10.3f}  "
          f"sum over blocks {total:10.3f}")

stops = load_stops(config.stops_csv, exclude_transfer_hubs=True, exclude_jmu_routes=True)
coverage = attach_coverage(stops, index, profiles, config.coverage_radius_miles)
print(f"\n{len(stops)} modeling stops; coverage radius "
      f"{config.coverage_radius_miles} miles")

sample = stops[0]
served = sorted(coverage[sample.stop_id])
profile = stop_profile(sample, profiles)
print(f"\nstop {sample.stop_id} ({sample.name}) services {len(served)} blocks")
print(f"  serviced population: {profile.stop_pop:,.0f}")
print(f"  renters: {profile.tvv['renter_population']:,.1f}"
      f"   median income: ${profile.median_income:,.0f}")

unserved = unserviced_blocks(stops, index, config.coverage_radius_miles)
print(f"\nblocks outside every stop's radius: {unserved}")
