"""Route prediction scores: sequence deviation, edit counts, ERP and route_score."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .domain import Route
from .errors import EmptyInput, NotPermutation
from .zones import to_zone_sequence

STATION_MARK = None  # stands in for the station at the head of zone sequences


def _check_perm(actual: Sequence, predicted: Sequence) -> None:
    if len(actual) != len(predicted) or set(actual) != set(predicted) or len(set(actual)) != len(actual):
        raise NotPermutation("sequences are not permutations of the same elements")


def sequence_deviation(actual: Sequence[Hashable], predicted: Sequence[Hashable]) -> float:
    """Positional displacement score; 0 for identical orders.

    Sequences with fewer than two elements after the head score 0.
    """
    _check_perm(actual, predicted)
    if actual and actual[0] != predicted[0]:
        raise NotPermutation("sequences must share their first element")
    n = len(actual) - 1
    if n < 2:
        return 0.0
    where = {x: i for i, x in enumerate(actual)}
    a = [where[x] for x in predicted]
    total = sum(abs(a[i] - a[i - 1]) - 1 for i in range(1, n + 1))
    return 2.0 * total / (n * (n - 1))


def lcs_length(x: Sequence, y: Sequence) -> int:
    prev = [0] * (len(y) + 1)
    for xi in x:
        cur = [0]
        for j, yj in enumerate(y):
            cur.append(prev[j] + 1 if xi == yj else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def erp_edit(actual: Sequence, predicted: Sequence) -> int:
    """Insertions plus deletions turning ``predicted`` into ``actual``."""
    _check_perm(actual, predicted)
    return 2 * (len(actual) - lcs_length(actual, predicted))


def _as_matrix(travel_times, index):
    if isinstance(travel_times, np.ndarray):
        if index is None:
            raise ValueError("an index is required with a travel-time array")
        return travel_times, index
    ids = list(travel_times)
    m = np.array([[float(travel_times[a][b]) for b in ids] for a in ids], dtype=float)
    return m, {s: i for i, s in enumerate(ids)}


def erp_norm(actual: Sequence[str], predicted: Sequence[str], travel_times, index: Mapping[str, int] | None = None) -> float:
    """Positionwise sum of standardized, min-shifted travel times ``t[A[i], B[i]]``.

    Mean and (population) standard deviation run over every ordered stop
    pair, diagonal included. A constant matrix scores 0.
    """
    if len(actual) != len(predicted):
        raise NotPermutation("sequences differ in length")
    t, index = _as_matrix(travel_times, index)
    std = float(t.std())
    if std == 0.0:
        return 0.0
    y = (t - t.mean()) / std
    shifted = y - y.min()
    ia = [index[s] for s in actual]
    ib = [index[s] for s in predicted]
    return float(shifted[ia, ib].sum())


@dataclass(frozen=True)
class EvaluationReport:
    route_id: str
    sd_stop: float
    sd_zone: float
    erp_edit: int
    erp_norm: float
    erp_ratio: float | None
    route_score: float
    travel_time_seconds: float
    flags: tuple[str, ...] = ()


def route_score(
    actual: Sequence[str],
    predicted: Sequence[str],
    travel_times,
    zone_of: Mapping[str, str | None] | None = None,
    index: Mapping[str, int] | None = None,
    route_id: str = "",
    include_return: bool = False,
) -> EvaluationReport:
    """All metrics for one route. ``zone_of`` enables SD_zone."""
    t, index = _as_matrix(travel_times, index)
    flags = []
    sd = sequence_deviation(actual, predicted)
    if len(actual) < 3:
        flags.append("too_short")
    edits = erp_edit(actual, predicted)
    if float(t.std()) == 0.0:
        flags.append("zero_variance")
    norm = erp_norm(actual, predicted, t, index)
    sd_zone = 0.0
    if zone_of is not None:
        za = to_zone_sequence_or_empty(actual, zone_of)
        zb = to_zone_sequence_or_empty(predicted, zone_of)
        sd_zone = sequence_deviation((STATION_MARK, *za), (STATION_MARK, *zb))
    if edits > 0:
        ratio, score = norm / edits, sd * norm / edits
    else:
        ratio, score = None, 0.0
    ip = [index[s] for s in predicted]
    time = float(t[ip[:-1], ip[1:]].sum())
    if include_return and len(ip) > 1:
        time += float(t[ip[-1], ip[0]])
    return EvaluationReport(route_id, sd, sd_zone, edits, norm, ratio, score, time, tuple(flags))


def to_zone_sequence_or_empty(order: Sequence[str], zone_of: Mapping[str, str | None]) -> tuple:
    zs = [zone_of[s] for s in order if zone_of.get(s) is not None]
    return to_zone_sequence(zs) if zs else ()


def evaluate_route(route: Route, predicted: Sequence[str], include_return: bool = False) -> EvaluationReport:
    if route.actual_sequence is None:
        raise NotPermutation(f"route {route.route_id} has no actual sequence to score against")
    zone_of = {s.id: (None if s.is_station else s.zone) for s in route.stops}
    return route_score(
        route.actual_sequence, tuple(predicted), route.time_matrix, zone_of, route.position,
        route.route_id, include_return,
    )


@dataclass(frozen=True)
class CorpusScore:
    performance: float
    per_route: tuple[EvaluationReport, ...] = field(repr=False)

    def summary(self) -> dict:
        """Table-style means: SD_zone, SD_stop, ERP_ratio, Time, Performance."""
        reps = self.per_route
        ratios = [r.erp_ratio for r in reps if r.erp_ratio is not None]
        return {
            "sd_zone": float(np.mean([r.sd_zone for r in reps])),
            "sd_stop": float(np.mean([r.sd_stop for r in reps])),
            "erp_ratio": float(np.mean(ratios)) if ratios else 0.0,
            "time": float(np.mean([r.travel_time_seconds for r in reps])),
            "performance": self.performance,
            "routes": len(reps),
        }


def corpus_performance(reports: Sequence[EvaluationReport]) -> CorpusScore:
    reports = tuple(reports)
    if not reports:
        raise EmptyInput("no route reports")
    return CorpusScore(float(np.mean([r.route_score for r in reports])), reports)


REPORT_COLUMNS = [
    "route_id", "sd_zone", "sd_stop", "erp_edit", "erp_norm", "erp_ratio",
    "route_score", "travel_time_seconds", "flags",
]


def write_reports_csv(reports: Sequence[EvaluationReport], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(REPORT_COLUMNS)
        for r in reports:
            d = asdict(r)
            d["flags"] = ";".join(r.flags)
            d["erp_ratio"] = "" if r.erp_ratio is None else r.erp_ratio
            w.writerow([d[c] for c in REPORT_COLUMNS])


def write_score_json(score: CorpusScore, path) -> None:
    data = {"summary": score.summary(), "routes": [asdict(r) for r in score.per_route]}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, sort_keys=True, indent=1)
        f.write("\n")
