"""Reference predictors that ignore zones and history."""

from __future__ import annotations

from .domain import Route
from .predictor import PredictedSequence
from .tsp import DEFAULT_EXACT_THRESHOLD, TourInstance, path_cost, solve_tour
from .zones import route_zone_sequence


def _wrap(route: Route, order, report=None) -> PredictedSequence:
    return PredictedSequence(route.route_id, tuple(order), route_zone_sequence(route, order), report)


def nearest_neighbor(route: Route) -> PredictedSequence:
    """Greedy chain from the station: always go to the quickest unvisited stop."""
    tt = route.travel_times
    order = [route.station_stop.id]
    free = set(route.stop_ids) - {order[0]}
    while free:
        row = tt[order[-1]]
        nxt = min(free, key=lambda s: (float(row[s]), s))
        order.append(nxt)
        free.remove(nxt)
    return _wrap(route, order)


def full_tsp(route: Route, exact_threshold: int = DEFAULT_EXACT_THRESHOLD) -> PredictedSequence:
    """Travel-time optimal tour over all stops, cut open at the station.

    The tour is read in whichever direction has the lower closed-loop cost;
    on a tie the lexicographically smaller stop sequence wins.
    """
    ids = route.stop_ids
    start = route.position[route.station_stop.id]
    T = route.time_matrix
    rep = solve_tour(TourInstance(T, start), exact_threshold)
    fwd = list(rep.order)
    back = [fwd[0], *reversed(fwd[1:])]
    cf, cb = path_cost(T, fwd, closed=True), path_cost(T, back, closed=True)
    names_f = [ids[i] for i in fwd]
    names_b = [ids[i] for i in back]
    if cb < cf or (cb == cf and names_b < names_f):
        names_f = names_b
    return _wrap(route, names_f, rep)
