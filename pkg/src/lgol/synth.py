"""Synthetic zone-structured corpora with tunable driver habits.

Each station serves a grid of zones some distance away. Drivers either
follow the station's habitual zone order (a serpentine sweep over the
grid) or, with probability ``1 - habit_strength``, visit zones greedily
by distance from the station. Stops of a zone are always visited
consecutively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cost import zone_centers
from .domain import EARTH_RADIUS_M, GeoPoint, Route, Stop, project
from .errors import InvalidConfig
from .ingestion import Corpus
from .tsp import PathInstance, solve_path


@dataclass(frozen=True)
class GeneratorConfig:
    station_count: int = 5
    zones_per_station: int = 20
    stops_per_zone_range: tuple[int, int] = (2, 6)
    route_count: int = 300  # per station
    habit_strength: float = 0.8
    within_zone_policy: str = "shortest_path"  # or "random"
    noise_seed: int = 0
    zones_per_route_range: tuple[int, int] = (5, 10)
    noise_level: float = 30.0  # max extra seconds per leg
    speed_mps: float = 8.0
    zone_spacing_m: float = 400.0
    stop_spread_m: float = 80.0
    depot_offset_m: float = 15000.0

    def __post_init__(self):
        lo, hi = self.stops_per_zone_range
        zlo, zhi = self.zones_per_route_range
        if self.station_count < 1 or self.zones_per_station < 1 or self.route_count < 1:
            raise InvalidConfig("counts must be positive")
        if not 1 <= lo <= hi:
            raise InvalidConfig("bad stops_per_zone_range")
        if not 1 <= zlo <= zhi:
            raise InvalidConfig("bad zones_per_route_range")
        if not 0.0 <= self.habit_strength <= 1.0:
            raise InvalidConfig("habit_strength must lie in [0, 1]")
        if self.within_zone_policy not in ("shortest_path", "random"):
            raise InvalidConfig(f"unknown within_zone_policy {self.within_zone_policy!r}")
        if self.noise_level < 0 or self.speed_mps <= 0:
            raise InvalidConfig("noise_level must be >= 0 and speed_mps > 0")


MIN_LEG_SECONDS = 1.0


def _to_geo(xy, origin: GeoPoint) -> GeoPoint:
    k = math.pi / 180.0 * EARTH_RADIUS_M
    lat = origin.lat + xy[1] / k
    lng = origin.lng + xy[0] / (k * math.cos(math.radians(origin.lat)))
    return GeoPoint(float(lat), float(lng))


def _snake(rows: int, cols: int, rng) -> list[tuple[int, int]]:
    cells = []
    if rng.random() < 0.5:
        for r in range(rows):
            cs = range(cols) if r % 2 == 0 else range(cols - 1, -1, -1)
            cells.extend((r, c) for c in cs)
    else:
        for c in range(cols):
            rs = range(rows) if c % 2 == 0 else range(rows - 1, -1, -1)
            cells.extend((r, c) for r in rs)
    if rng.random() < 0.5:
        cells.reverse()
    return cells


def greedy_zone_order(route: Route) -> tuple[str, ...]:
    """Nearest zone center from the station, then from each center in turn."""
    geo = zone_centers(route)
    xy = project(geo.points(), geo.ref_lat)
    pts = {z: xy[i + 1] for i, z in enumerate(geo.zones)}
    cur, left, order = xy[0], set(geo.zones), []
    while left:
        z = min(left, key=lambda q: (float(np.hypot(*(pts[q] - cur))), q))
        order.append(z)
        left.remove(z)
        cur = pts[z]
    return tuple(order)


def _shortest_within(prev_xy, member_xy) -> list[int]:
    pts = np.vstack([prev_xy, member_xy])
    d = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
    rep = solve_path(PathInstance(d, 0), exact_threshold=12)
    return [i - 1 for i in rep.order[1:]]


def _station(cfg: GeneratorConfig, s: int, rng) -> dict:
    origin = GeoPoint(40.0 + 0.7 * s, -100.0 + 1.1 * s)
    Z = cfg.zones_per_station
    rows = max(1, int(math.floor(math.sqrt(Z))))
    cols = int(math.ceil(Z / rows))
    angle = rng.uniform(0, 2 * math.pi)
    offset = cfg.depot_offset_m * np.array([math.cos(angle), math.sin(angle)])
    cells = [(r, c) for r in range(rows) for c in range(cols)][:Z]
    labels = [f"Z{i:02d}" for i in rng.permutation(Z)]
    centers = {}
    for lab, (r, c) in zip(labels, cells):
        jitter = rng.uniform(-0.2, 0.2, size=2) * cfg.zone_spacing_m
        centers[lab] = offset + np.array([c - (cols - 1) / 2, r - (rows - 1) / 2]) * cfg.zone_spacing_m + jitter
    cell_label = dict(zip(cells, labels))
    habit = [cell_label[c] for c in _snake(rows, cols, rng) if c in cell_label]
    return {"origin": origin, "centers": centers, "habit": habit}


def _route(cfg: GeneratorConfig, station_id: str, st: dict, route_id: str, rng) -> Route:
    centers = st["centers"]
    labels = sorted(centers)
    k = int(rng.integers(cfg.zones_per_route_range[0], cfg.zones_per_route_range[1] + 1))
    k = min(k, len(labels))
    seed_zone = labels[int(rng.integers(len(labels)))]
    near = sorted(labels, key=lambda z: (float(np.hypot(*(centers[z] - centers[seed_zone]))), z))
    route_zones = set(near[:k])

    xy = {"depot": np.zeros(2)}
    zone_of = {}
    members: dict[str, list[str]] = {}
    n_total = 0
    counts = {}
    for z in sorted(route_zones):
        counts[z] = int(rng.integers(cfg.stops_per_zone_range[0], cfg.stops_per_zone_range[1] + 1))
        n_total += counts[z]
    pool = rng.choice(10_000, size=n_total, replace=False)
    names = iter(f"S{i:04d}" for i in pool)
    for z in sorted(route_zones):
        members[z] = []
        for _ in range(counts[z]):
            sid = next(names)
            xy[sid] = centers[z] + rng.normal(0.0, cfg.stop_spread_m, size=2)
            zone_of[sid] = z
            members[z].append(sid)

    station_stop = f"{station_id}-DEPOT"
    ids = [station_stop, *sorted(zone_of)]
    xy[station_stop] = xy.pop("depot")
    P = np.array([xy[s] for s in ids])
    d = np.hypot(*(P[:, None, :] - P[None, :, :]).transpose(2, 0, 1))
    noise = rng.uniform(0.0, cfg.noise_level, size=d.shape) if cfg.noise_level > 0 else np.zeros_like(d)
    t = d / cfg.speed_mps + MIN_LEG_SECONDS + noise
    np.fill_diagonal(t, 0.0)
    travel_times = {a: {b: float(t[i, j]) for j, b in enumerate(ids)} for i, a in enumerate(ids)}
    origin = st["origin"]
    stops = (Stop(station_stop, origin, None, True),) + tuple(
        Stop(s, _to_geo(xy[s], origin), zone_of[s]) for s in sorted(zone_of)
    )
    route = Route(route_id, station_id, stops, travel_times)

    if rng.random() < cfg.habit_strength:
        zone_order = [z for z in st["habit"] if z in route_zones]
    else:
        zone_order = list(greedy_zone_order(route))
    seq = [station_stop]
    for z in zone_order:
        ms = members[z]
        if cfg.within_zone_policy == "random":
            seq.extend(ms[i] for i in rng.permutation(len(ms)))
        else:
            perm = _shortest_within(xy[seq[-1]], np.array([xy[s] for s in ms]))
            seq.extend(ms[i] for i in perm)
    return Route(route_id, station_id, stops, travel_times, tuple(seq))


def generate(config: GeneratorConfig | None = None) -> Corpus:
    cfg = config or GeneratorConfig()
    rng = np.random.default_rng(cfg.noise_seed)
    routes = []
    for s in range(cfg.station_count):
        sid = f"ST{s}"
        st = _station(cfg, s, rng)
        for i in range(cfg.route_count):
            routes.append(_route(cfg, sid, st, f"R{s}_{i:04d}", rng))
    return Corpus(tuple(routes))
