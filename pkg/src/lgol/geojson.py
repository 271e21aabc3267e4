"""GeoJSON rendering of predicted (or actual) stop sequences."""

from __future__ import annotations

import json
from typing import Mapping, Sequence

from .domain import Route

PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


def route_features(route: Route, order: Sequence[str], label: str = "predicted") -> list[dict]:
    by_id = route.by_id
    zones = list(route.zones)
    color = {z: PALETTE[i % len(PALETTE)] for i, z in enumerate(zones)}
    coords = [[by_id[s].location.lng, by_id[s].location.lat] for s in order]
    feats = [{
        "type": "Feature",
        "properties": {"route_id": route.route_id, "kind": label, "stops": len(order)},
        "geometry": {"type": "LineString", "coordinates": coords},
    }]
    for i, s in enumerate(order):
        stop = by_id[s]
        feats.append({
            "type": "Feature",
            "properties": {
                "route_id": route.route_id,
                "stop_id": s,
                "order": i,
                "zone": stop.zone,
                "station": stop.is_station,
                "marker-color": "#000000" if stop.is_station else color[stop.zone],
            },
            "geometry": {"type": "Point", "coordinates": [stop.location.lng, stop.location.lat]},
        })
    return feats


def to_geojson(routes: Mapping[str, Route], orders: Mapping[str, Sequence[str]]) -> dict:
    feats = []
    for rid in sorted(orders):
        feats.extend(route_features(routes[rid], orders[rid]))
    return {"type": "FeatureCollection", "features": feats}


def write_geojson(routes: Mapping[str, Route], orders: Mapping[str, Sequence[str]], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_geojson(routes, orders), f, indent=1)
        f.write("\n")
