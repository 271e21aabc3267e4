"""Learn-global / optimize-local route prediction.

A closed tour over ``[station, *zones]`` fixes the zone order. Each zone
is then sequenced by an open path that starts where the previous zone
ended and is pulled towards the next zone by a temporary lookahead stop
(the next zone's center stop, or the station after the last zone). The
lookahead is dropped once the path is solved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cost import (
    TransitionMatrix,
    WeightConfig,
    ZoneGeometry,
    center_stop,
    cost_matrix,
    route_distance,
    zone_centers,
)
from .domain import Route
from .errors import EmptyZone, StationMismatch, ZoneMismatch
from .tsp import DEFAULT_EXACT_THRESHOLD, PathInstance, SolveReport, TourInstance, path_cost, solve_path, solve_tour
from .zones import route_zone_sequence


@dataclass(frozen=True)
class PredictedSequence:
    route_id: str
    stop_order: tuple[str, ...]
    zone_order: tuple[str, ...]
    zone_report: SolveReport | None = None
    local_reports: tuple[SolveReport, ...] = field(default=(), repr=False)


def predict_zone_sequence(
    route: Route,
    model: TransitionMatrix,
    w: WeightConfig,
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    compare_directions: bool = False,
    geometry: ZoneGeometry | None = None,
) -> tuple[tuple[str, ...], SolveReport]:
    """Zone order from the cheapest station-anchored tour over the cost matrix.

    With ``compare_directions`` the reversed tour is taken when it is
    strictly cheaper (only matters when the tour came from local search).
    """
    if model.station != route.station:
        raise StationMismatch(f"model for {model.station} applied to route of {route.station}")
    geometry = geometry or zone_centers(route)
    zones = geometry.zones
    if not zones:
        return (), SolveReport((0,), 0.0, True, "exact")
    C = cost_matrix(model, route_distance(route, w, geometry), w, zones).values
    report = solve_tour(TourInstance(C, 0), exact_threshold)
    order = list(report.order)
    if compare_directions and len(order) > 2:
        back = [order[0], *reversed(order[1:])]
        back_cost = path_cost(C, back, closed=True)
        if back_cost < report.objective:
            report = SolveReport(tuple(back), back_cost, report.optimal, report.method, report.seed)
            order = back
    return tuple(zones[i - 1] for i in order[1:]), report


def select_entry_stop(next_zone: str, route: Route, geometry: ZoneGeometry) -> str:
    return center_stop(route, next_zone, geometry)


def predict_stop_sequence(
    route: Route,
    zone_seq: Sequence[str],
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    geometry: ZoneGeometry | None = None,
    zone_report: SolveReport | None = None,
) -> PredictedSequence:
    zone_seq = tuple(zone_seq)
    groups = route.zones
    if len(set(zone_seq)) != len(zone_seq) or set(zone_seq) != set(groups):
        raise ZoneMismatch(f"zone sequence does not match the zones of route {route.route_id}")
    geometry = geometry or zone_centers(route)
    station = route.station_stop.id
    T = route.time_matrix
    pos = route.position
    order = [station]
    reports = []
    for k, zone in enumerate(zone_seq):
        members = list(groups[zone])
        if not members:
            raise EmptyZone(zone)
        prev = order[-1]
        look = select_entry_stop(zone_seq[k + 1], route, geometry) if k + 1 < len(zone_seq) else station
        if look == prev:
            # single-zone route: start and lookahead are both the station
            nodes = [prev, *members]
            idx = [pos[s] for s in nodes]
            rep = solve_tour(TourInstance(T[np.ix_(idx, idx)], 0), exact_threshold)
            kept = [nodes[i] for i in rep.order[1:]]
        else:
            nodes = [prev, *members, look]
            idx = [pos[s] for s in nodes]
            rep = solve_path(PathInstance(T[np.ix_(idx, idx)], 0, len(nodes) - 1), exact_threshold)
            kept = [nodes[i] for i in rep.order[1:-1]]
        reports.append(rep)
        order.extend(kept)
    return PredictedSequence(route.route_id, tuple(order), zone_seq, zone_report, tuple(reports))


def predict(
    route: Route,
    model: TransitionMatrix,
    w: WeightConfig,
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    compare_directions: bool = False,
) -> PredictedSequence:
    geometry = zone_centers(route)
    zseq, report = predict_zone_sequence(route, model, w, exact_threshold, compare_directions, geometry)
    return predict_stop_sequence(route, zseq, exact_threshold, geometry, report)


def oracle_zone_prediction(route: Route, exact_threshold: int = DEFAULT_EXACT_THRESHOLD) -> PredictedSequence:
    """Local stage only, fed with the zone order extracted from the actual sequence."""
    return predict_stop_sequence(route, route_zone_sequence(route), exact_threshold)
