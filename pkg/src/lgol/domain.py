"""Stops, routes and the small amount of geometry shared by every module.

Identifiers (stop, zone, station) are plain strings. Zone ids are only
meaningful within a station, so anything keyed by zone is also keyed by
station one level up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import NoZonedStops

EARTH_RADIUS_M = 6_371_000.0


class GeoPoint(NamedTuple):
    lat: float
    lng: float


def project(points: Sequence[GeoPoint], ref_lat: float | None = None) -> np.ndarray:
    """Equirectangular projection to metres, shape (n, 2) as (x, y).

    The reference latitude defaults to the mean latitude of ``points``.
    """
    arr = np.asarray(points, dtype=float).reshape(-1, 2)
    if ref_lat is None:
        ref_lat = float(arr[:, 0].mean()) if len(arr) else 0.0
    k = math.pi / 180.0 * EARTH_RADIUS_M
    x = arr[:, 1] * k * math.cos(math.radians(ref_lat))
    y = arr[:, 0] * k
    return np.column_stack([x, y])


@dataclass(frozen=True)
class Stop:
    id: str
    location: GeoPoint
    zone: str | None = None
    is_station: bool = False


@dataclass(frozen=True)
class Route:
    """One delivery route: a station stop plus ``n`` delivery stops.

    ``travel_times[a][b]`` is the time in seconds from stop ``a`` to stop
    ``b``; it need not be symmetric. ``actual_sequence`` is the realized
    visiting order (station first) when known.
    """

    route_id: str
    station: str
    stops: tuple[Stop, ...]
    travel_times: Mapping[str, Mapping[str, float]]
    actual_sequence: tuple[str, ...] | None = None

    @cached_property
    def stop_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.stops)

    @cached_property
    def position(self) -> dict[str, int]:
        """Row/column of each stop in :attr:`time_matrix`."""
        return {sid: i for i, sid in enumerate(self.stop_ids)}

    @cached_property
    def by_id(self) -> dict[str, Stop]:
        return {s.id: s for s in self.stops}

    @cached_property
    def station_stop(self) -> Stop:
        return next(s for s in self.stops if s.is_station)

    @cached_property
    def time_matrix(self) -> np.ndarray:
        ids = self.stop_ids
        tt = self.travel_times
        return np.array([[float(tt[a][b]) for b in ids] for a in ids], dtype=float)

    @cached_property
    def zones(self) -> dict[str, tuple[str, ...]]:
        """Zone id -> ids of its stops, zones sorted, stops in route order."""
        out: dict[str, list[str]] = {}
        for s in self.stops:
            if not s.is_station and s.zone is not None:
                out.setdefault(s.zone, []).append(s.id)
        return {z: tuple(out[z]) for z in sorted(out)}

    def zone_of(self, stop_id: str) -> str | None:
        return self.by_id[stop_id].zone

    def sequence_time(self, order: Sequence[str], include_return: bool = False) -> float:
        """Travel time along ``order``; optionally close the loop."""
        tt = self.travel_times
        total = sum(float(tt[a][b]) for a, b in zip(order, order[1:]))
        if include_return and len(order) > 1:
            total += float(tt[order[-1]][order[0]])
        return total


def impute_missing_zones(route: Route) -> Route:
    """Give every unzoned delivery stop the zone of its nearest zoned stop.

    "Nearest" is by travel time from the unzoned stop; ties go to the
    lexicographically smallest stop id. Only originally zoned stops are
    donors, which makes the operation idempotent.
    """
    donors = sorted(s.id for s in route.stops if not s.is_station and s.zone is not None)
    missing = [s for s in route.stops if not s.is_station and s.zone is None]
    if not missing:
        return route
    if not donors:
        raise NoZonedStops(f"route {route.route_id} has no zoned delivery stop")
    zone = {s.id: s.zone for s in route.stops}
    tt = route.travel_times
    fixed = {}
    for s in missing:
        row = tt[s.id]
        best = min(donors, key=lambda d: (float(row[d]), d))
        fixed[s.id] = zone[best]
    stops = tuple(replace(s, zone=fixed[s.id]) if s.id in fixed else s for s in route.stops)
    return replace(route, stops=stops)


def validate_route(route: Route) -> list[str]:
    """Return human-readable invariant violations; empty means valid."""
    problems: list[str] = []
    ids = [s.id for s in route.stops]
    if any(not i for i in ids):
        problems.append("stops: empty stop id")
    if len(set(ids)) != len(ids):
        problems.append("stops: duplicate stop ids")
    n_station = sum(s.is_station for s in route.stops)
    if n_station != 1:
        problems.append(f"stops: station uniqueness violated ({n_station} station stops)")
    for s in route.stops:
        lat, lng = s.location
        if not (-90.0 <= lat <= 90.0) or not (-180.0 <= lng <= 180.0):
            problems.append(f"stops[{s.id}].location: coordinates out of range")
    idset = set(ids)
    tt = route.travel_times
    if set(tt) != idset:
        problems.append("travel_times: matrix completeness violated (rows do not match stops)")
    else:
        bad_cols = [a for a in ids if set(tt[a]) != idset]
        if bad_cols:
            problems.append(f"travel_times: matrix completeness violated (columns of {bad_cols[0]})")
        else:
            if any(float(tt[a][a]) != 0.0 for a in ids):
                problems.append("travel_times: nonzero diagonal")
            if any(float(tt[a][b]) < 0 or math.isnan(float(tt[a][b])) for a in ids for b in ids):
                problems.append("travel_times: negative or NaN entry")
    seq = route.actual_sequence
    if seq is not None:
        if len(seq) != len(ids) or set(seq) != idset:
            problems.append("actual_sequence: not a permutation of the stops")
        elif n_station == 1 and seq[0] != route.station_stop.id:
            problems.append("actual_sequence: does not begin at the station")
    return problems
