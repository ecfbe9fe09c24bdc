"""GeoJSON export of stops, their coverage profiles, and unserviced blocks."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping, Sequence

from .analysis import GapReport
from .census import BlockProfile, CensusIndex, StopProfile


def _stop_feature(stop, profile: StopProfile | None, gap: Mapping | None) -> dict:
    properties: dict = {"kind": "stop", "stop_id": stop.stop_id, "name": stop.name}
    properties["total_riders"] = stop.total_riders
    properties["city_routes_ran"] = stop.city_routes_ran
    if profile is not None:
        properties["stop_pop"] = profile.stop_pop
        properties["empty_coverage"] = profile.empty_coverage
        properties.update({k: v for k, v in sorted(profile.tvv.items())})
    if gap is not None:
        properties["gap_ratio"] = gap.get("gap_ratio")
        properties["gap_ratio_infinite"] = gap.get("gap_ratio_infinite")
        properties["classification"] = gap.get("classification")
    return {
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": [stop.lon, stop.lat]},
        "properties": properties,
    }


def _block_feature(index: CensusIndex, block_id: str, profile: BlockProfile | None) -> dict:
    block = index.blocks[block_id]
    properties: dict = {
        "kind": "unserviced_block",
        "block_id": block_id,
        "population": block.population,
    }
    if profile is not None:
        properties.update({k: profile.tvv[k] for k in sorted(profile.tvv)})
    return {
        "type": "Feature",
        "geometry": {
            "type": "Point",
            "coordinates": [block.centroid[1], block.centroid[0]],
        },
        "properties": properties,
    }


def coverage_feature_collection(
    stops: Sequence,
    index: CensusIndex,
    stop_profiles: Mapping[str, StopProfile],
    gap_report: GapReport | None = None,
    block_profiles: Sequence[BlockProfile] = (),
) -> dict:
    """Stops as points (with profile and gap info) plus unserviced block centroids."""
    gap_by_stop: dict[str, dict] = {}
    unserviced: Sequence[str] = ()
    if gap_report is not None:
        gap_by_stop = {entry.stop_id: entry.to_dict() for entry in gap_report.stops}
        unserviced = gap_report.unserviced_block_ids
    features = [
        _stop_feature(stop, stop_profiles.get(stop.stop_id), gap_by_stop.get(stop.stop_id))
        for stop in sorted(stops, key=lambda s: s.stop_id)
    ]
    profile_by_block = {p.block_id: p for p in block_profiles}
    features.extend(
        _block_feature(index, block_id, profile_by_block.get(block_id))
        for block_id in sorted(unserviced)
    )
    return {"type": "FeatureCollection", "features": features}


def write_geojson(collection: Mapping, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(collection, sort_keys=True, indent=2) + "\n")
    return path
