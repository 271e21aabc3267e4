"""Zone-level cost matrices for the global tour.

Every per-route matrix is indexed by ``[station, *zones]`` with the
route's zones sorted; entry ``[i, j]`` is the cost of going from node i to
node j.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import GeoPoint, Route, project
from .errors import EmptyZone, IndexMismatch, InvalidConfig
from .zones import CountMatrix

log = logging.getLogger(__name__)

METRICS = ("euclid", "traveltime")


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    station: str
    zones: tuple[str, ...]
    probs: np.ndarray

    @classmethod
    def empty(cls, station: str) -> TransitionMatrix:
        return cls(station, (), np.zeros((1, 1)))

    def restrict(self, zones: Sequence[str]) -> np.ndarray:
        """Probabilities over ``[station, *zones]``; unseen zones get zero rows/columns."""
        pos = {z: i + 1 for i, z in enumerate(self.zones)}
        idx = np.array([0] + [pos.get(z, -1) for z in zones])
        known = idx >= 0
        out = np.zeros((len(idx), len(idx)))
        sub = np.ix_(known, known)
        out[sub] = self.probs[np.ix_(idx[known], idx[known])]
        return out


def to_transition_matrix(counts: CountMatrix) -> TransitionMatrix:
    n = counts.counts.astype(float)
    sums = n.sum(axis=1, keepdims=True)
    probs = np.divide(n, sums, out=np.zeros_like(n), where=sums > 0)
    return TransitionMatrix(counts.station, counts.zones, probs)


@dataclass(frozen=True)
class ZoneGeometry:
    zones: tuple[str, ...]
    centers: dict[str, GeoPoint]
    station_location: GeoPoint

    @property
    def ref_lat(self) -> float:
        return self.station_location.lat

    def points(self) -> list[GeoPoint]:
        return [self.station_location, *(self.centers[z] for z in self.zones)]


def zone_centers(route: Route) -> ZoneGeometry:
    """Mean latitude/longitude of each zone's stops."""
    by_id = route.by_id
    centers = {}
    for z, ids in route.zones.items():
        lat = sum(by_id[s].location.lat for s in ids) / len(ids)
        lng = sum(by_id[s].location.lng for s in ids) / len(ids)
        centers[z] = GeoPoint(lat, lng)
    return ZoneGeometry(tuple(route.zones), centers, route.station_stop.location)


def center_stop(route: Route, zone: str, geometry: ZoneGeometry) -> str:
    """Stop of ``zone`` closest to the zone center (ties: smallest id)."""
    ids = route.zones.get(zone)
    if not ids:
        raise EmptyZone(f"zone {zone!r} has no stops in route {route.route_id}")
    pts = project([route.by_id[s].location for s in ids], geometry.ref_lat)
    c = project([geometry.centers[zone]], geometry.ref_lat)[0]
    d = np.hypot(*(pts - c).T)
    return min(zip(d.tolist(), ids))[1]


@dataclass(frozen=True, eq=False)
class ZoneDistanceMatrix:
    zones: tuple[str, ...]
    values: np.ndarray
    degenerate: bool = False


@dataclass(frozen=True, eq=False)
class ZoneTravelTimeMatrix:
    zones: tuple[str, ...]
    values: np.ndarray
    anchors: dict[str, str]


def _max_normalize(m: np.ndarray) -> tuple[np.ndarray, bool]:
    top = m.max() if m.size else 0.0
    if top <= 0:
        return np.zeros_like(m), True
    return m / top, False


def zone_distance_matrix(geometry: ZoneGeometry) -> ZoneDistanceMatrix:
    xy = project(geometry.points(), geometry.ref_lat)
    diff = xy[:, None, :] - xy[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    values, degenerate = _max_normalize(d)
    if degenerate:
        log.warning("all zone centers coincide with the station; distance matrix is zero")
    np.fill_diagonal(values, 0.0)
    return ZoneDistanceMatrix(geometry.zones, values, degenerate)


def zone_travel_time_matrix(route: Route, geometry: ZoneGeometry) -> ZoneTravelTimeMatrix:
    """Travel times between each zone's center stop, max-normalized."""
    anchors = {z: center_stop(route, z, geometry) for z in geometry.zones}
    ids = [route.station_stop.id, *(anchors[z] for z in geometry.zones)]
    idx = [route.position[s] for s in ids]
    t = route.time_matrix[np.ix_(idx, idx)]
    values, _ = _max_normalize(t)
    np.fill_diagonal(values, 0.0)
    return ZoneTravelTimeMatrix(geometry.zones, values, anchors)


@dataclass(frozen=True)
class WeightConfig:
    """Either one scalar weight or separate first/zone/last weights.

    The weight multiplies the distance (or travel-time) term; its complement
    multiplies the unfamiliarity term ``1 - P``.
    """

    omega: float | None = 0.9
    omega_f: float | None = None
    omega_z: float | None = None
    omega_l: float | None = None
    metric: str = "traveltime"

    def __post_init__(self):
        structured = (self.omega_f, self.omega_z, self.omega_l)
        if self.omega is not None:
            if any(v is not None for v in structured):
                raise InvalidConfig("scalar and structured weights are mutually exclusive")
            vals = [self.omega]
        else:
            if any(v is None for v in structured):
                raise InvalidConfig("structured mode needs omega_f, omega_z and omega_l")
            vals = list(structured)
        if any(not 0.0 <= v <= 1.0 for v in vals):
            raise InvalidConfig(f"weights must lie in [0, 1]: {vals}")
        if self.metric not in METRICS:
            raise InvalidConfig(f"metric must be one of {METRICS}, got {self.metric!r}")

    @classmethod
    def scalar(cls, omega: float, metric: str = "traveltime") -> WeightConfig:
        return cls(omega=omega, metric=metric)

    @classmethod
    def structured(cls, omega_f: float, omega_z: float, omega_l: float, metric: str = "traveltime") -> WeightConfig:
        return cls(omega=None, omega_f=omega_f, omega_z=omega_z, omega_l=omega_l, metric=metric)

    @property
    def is_structured(self) -> bool:
        return self.omega is None

    def weight_matrix(self, n: int) -> np.ndarray:
        """Per-entry weights for an ``n x n`` matrix whose node 0 is the station."""
        if not self.is_structured:
            return np.full((n, n), float(self.omega))
        w = np.full((n, n), float(self.omega_z))
        w[0, :] = self.omega_f
        w[:, 0] = self.omega_l
        w[0, 0] = 0.0
        return w

    def label(self) -> str:
        if self.is_structured:
            return f"F={self.omega_f:g},Z={self.omega_z:g},L={self.omega_l:g},{self.metric}"
        return f"omega={self.omega:g},{self.metric}"


@dataclass(frozen=True, eq=False)
class CostMatrix:
    zones: tuple[str, ...]
    values: np.ndarray


def cost_matrix(P: TransitionMatrix | np.ndarray, dist, w: WeightConfig, route_zones: Sequence[str]) -> CostMatrix:
    """Blend normalized distance and unfamiliarity: ``W*D + (1-W)*(1-P)``."""
    route_zones = tuple(route_zones)
    if tuple(dist.zones) != route_zones:
        raise IndexMismatch("distance matrix and route zones disagree")
    probs = P.restrict(route_zones) if isinstance(P, TransitionMatrix) else np.asarray(P, dtype=float)
    n = len(route_zones) + 1
    if probs.shape != (n, n) or dist.values.shape != (n, n):
        raise IndexMismatch(f"expected {n}x{n} matrices, got {probs.shape} and {dist.values.shape}")
    W = w.weight_matrix(n)
    C = W * dist.values + (1.0 - W) * (1.0 - probs)
    np.fill_diagonal(C, 0.0)
    return CostMatrix(route_zones, C)


def route_distance(route: Route, w: WeightConfig, geometry: ZoneGeometry | None = None):
    """The distance backend selected by ``w.metric`` for ``route``."""
    geometry = geometry or zone_centers(route)
    if w.metric == "euclid":
        return zone_distance_matrix(geometry)
    return zone_travel_time_matrix(route, geometry)
