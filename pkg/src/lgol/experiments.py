"""Cross-validated weight sweeps and the benchmark comparison."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .baselines import full_tsp, nearest_neighbor
from .cost import (
    TransitionMatrix,
    WeightConfig,
    cost_matrix,
    to_transition_matrix,
    zone_centers,
    zone_distance_matrix,
    zone_travel_time_matrix,
)
from .domain import Route
from .errors import InsufficientData, MissingActualSequence
from .ingestion import Corpus
from .metrics import CorpusScore, corpus_performance, evaluate_route
from .predictor import PredictedSequence, oracle_zone_prediction, predict, predict_stop_sequence
from .tsp import DEFAULT_EXACT_THRESHOLD, TourInstance, solve_tour
from .zones import accumulate_counts

BEST_STRUCTURED = (0.2, 0.8, 1.0)


def grid_values(step: float = 0.1) -> list[float]:
    n = int(round(1.0 / step))
    return [round(i * step, 10) for i in range(n + 1)]


@dataclass(frozen=True)
class SweepResult:
    grid: tuple[WeightConfig, ...]
    performances: tuple[float, ...]
    fold_count: int
    fold_performances: tuple[tuple[float, ...], ...] = ()  # [grid point][fold]

    def best(self) -> tuple[WeightConfig, float]:
        i = int(np.argmin(self.performances))
        return self.grid[i], self.performances[i]

    def select(self, metric: str) -> SweepResult:
        keep = [i for i, w in enumerate(self.grid) if w.metric == metric]
        return SweepResult(
            tuple(self.grid[i] for i in keep),
            tuple(self.performances[i] for i in keep),
            self.fold_count,
            tuple(self.fold_performances[i] for i in keep) if self.fold_performances else (),
        )

    def rows(self) -> list[dict]:
        return [
            {
                "metric": w.metric,
                "omega": w.omega,
                "omega_f": w.omega_f,
                "omega_z": w.omega_z,
                "omega_l": w.omega_l,
                "performance": p,
            }
            for w, p in zip(self.grid, self.performances)
        ]


def fit_models(corpus: Corpus | Iterable[Route], stations: Iterable[str] = ()) -> dict[str, TransitionMatrix]:
    by_station: dict[str, list[Route]] = {s: [] for s in stations}
    for r in corpus:
        by_station.setdefault(r.station, []).append(r)
    return {s: to_transition_matrix(accumulate_counts(rs, s)) if rs else TransitionMatrix.empty(s)
            for s, rs in sorted(by_station.items())}


def assign_folds(corpus: Corpus, k: int, seed: int = 0) -> dict[str, int]:
    """Station-stratified fold index per route id."""
    if k < 2:
        raise InsufficientData("need at least two folds")
    rng = np.random.default_rng(seed)
    folds = {}
    for station, routes in corpus.by_station().items():
        if len(routes) < k:
            raise InsufficientData(f"station {station} has {len(routes)} routes, fewer than {k} folds")
        ids = sorted(r.route_id for r in routes)
        for pos, i in enumerate(rng.permutation(len(ids))):
            folds[ids[i]] = pos % k
    return folds


class _RouteCache:
    """Per-route quantities that do not depend on the weights."""

    def __init__(self, route: Route, model: TransitionMatrix, exact_threshold: int):
        self.route = route
        self.geometry = zone_centers(route)
        self.zones = self.geometry.zones
        self.P = model.restrict(self.zones)
        self.dist = {}
        self.exact_threshold = exact_threshold
        self.scores = {}

    def distance(self, metric):
        if metric not in self.dist:
            if metric == "euclid":
                self.dist[metric] = zone_distance_matrix(self.geometry)
            else:
                self.dist[metric] = zone_travel_time_matrix(self.route, self.geometry)
        return self.dist[metric]

    def route_score(self, w: WeightConfig) -> float:
        if self.zones:
            C = cost_matrix(self.P, self.distance(w.metric), w, self.zones).values
            rep = solve_tour(TourInstance(C, 0), self.exact_threshold)
            zseq = tuple(self.zones[i - 1] for i in rep.order[1:])
        else:
            zseq = ()
        if zseq not in self.scores:
            pred = predict_stop_sequence(self.route, zseq, self.exact_threshold, self.geometry)
            self.scores[zseq] = evaluate_route(self.route, pred.stop_order).route_score
        return self.scores[zseq]


def _score_fold(args) -> list[float]:
    train, test, stations, grid, exact_threshold = args
    models = fit_models(train, stations)
    caches = [_RouteCache(r, models[r.station], exact_threshold) for r in test]
    return [float(np.mean([c.route_score(w) for c in caches])) for w in grid]


def cross_validate(
    corpus: Corpus,
    grid: Sequence[WeightConfig],
    k: int = 5,
    seed: int = 0,
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    jobs: int = 1,
) -> SweepResult:
    """Mean held-out Performance per grid point over ``k`` stratified folds."""
    grid = tuple(grid)
    for r in corpus:
        if r.actual_sequence is None:
            raise MissingActualSequence(f"route {r.route_id} has no actual sequence")
    folds = assign_folds(corpus, k, seed)
    stations = sorted(corpus.stations)
    tasks = [
        (
            [r for r in corpus if folds[r.route_id] != f],
            [r for r in corpus if folds[r.route_id] == f],
            stations,
            grid,
            exact_threshold,
        )
        for f in range(k)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            per_fold = list(ex.map(_score_fold, tasks))
    else:
        per_fold = [_score_fold(t) for t in tasks]
    by_point = tuple(tuple(per_fold[f][g] for f in range(k)) for g in range(len(grid)))
    perf = tuple(float(np.mean(p)) for p in by_point)
    return SweepResult(grid, perf, k, by_point)


def omega_sweep(
    corpus: Corpus,
    metric_choice: str | Sequence[str] = ("traveltime", "euclid"),
    k: int = 5,
    seed: int = 0,
    step: float = 0.1,
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    jobs: int = 1,
) -> SweepResult:
    """Scalar-weight sweep over ``0, step, ..., 1`` for each metric backend."""
    metrics = (metric_choice,) if isinstance(metric_choice, str) else tuple(metric_choice)
    grid = [WeightConfig.scalar(o, m) for m in metrics for o in grid_values(step)]
    return cross_validate(corpus, grid, k, seed, exact_threshold, jobs)


def station_weight_grid(
    corpus: Corpus,
    omega_f_grid: Sequence[float] | None = None,
    omega_z_grid: Sequence[float] | None = None,
    omega_l: float = 1.0,
    k: int = 5,
    seed: int = 0,
    metric: str = "traveltime",
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    jobs: int = 1,
) -> SweepResult:
    """Structured-weight grid over (omega_F, omega_Z) at a fixed omega_L."""
    fs = grid_values() if omega_f_grid is None else list(omega_f_grid)
    zs = grid_values() if omega_z_grid is None else list(omega_z_grid)
    grid = [WeightConfig.structured(f, z, omega_l, metric) for f in fs for z in zs]
    return cross_validate(corpus, grid, k, seed, exact_threshold, jobs)


def omega_l_sensitivity(
    corpus: Corpus,
    pairs: Sequence[tuple[float, float]],
    omega_l_grid: Sequence[float] | None = None,
    k: int = 5,
    seed: int = 0,
    metric: str = "traveltime",
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    jobs: int = 1,
) -> SweepResult:
    ls = grid_values() if omega_l_grid is None else list(omega_l_grid)
    grid = [WeightConfig.structured(f, z, l, metric) for f, z in pairs for l in ls]
    return cross_validate(corpus, grid, k, seed, exact_threshold, jobs)


def _predict_one(args):
    route, model, w, exact_threshold = args
    return predict(route, model, w, exact_threshold)


def predict_corpus(
    corpus: Iterable[Route],
    models: Mapping[str, TransitionMatrix],
    w: WeightConfig,
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    jobs: int = 1,
) -> dict[str, PredictedSequence]:
    tasks = [(r, models.get(r.station) or TransitionMatrix.empty(r.station), w, exact_threshold) for r in corpus]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            preds = list(ex.map(_predict_one, tasks, chunksize=8))
    else:
        preds = [_predict_one(t) for t in tasks]
    return {p.route_id: p for p in preds}


def score_predictions(corpus: Iterable[Route], predictions: Mapping[str, Sequence[str] | PredictedSequence]) -> CorpusScore:
    reports = []
    for r in corpus:
        pred = predictions[r.route_id]
        reports.append(evaluate_route(r, getattr(pred, "stop_order", pred)))
    return corpus_performance(reports)


def hypothetical_oracle_run(
    test_corpus: Iterable[Route],
    w: WeightConfig | None = None,
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
) -> CorpusScore:
    """Local stage only, with zone orders taken from the actual sequences.

    ``w`` is accepted for interface symmetry; the global stage is skipped so
    the weights play no role.
    """
    routes = list(test_corpus)
    return score_predictions(routes, {r.route_id: oracle_zone_prediction(r, exact_threshold) for r in routes})


def benchmark_table(
    test_corpus: Iterable[Route],
    models: Mapping[str, TransitionMatrix],
    w: WeightConfig,
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    jobs: int = 1,
) -> dict[str, CorpusScore]:
    routes = list(test_corpus)
    lgol = predict_corpus(routes, models, w, exact_threshold, jobs)
    return {
        "Nearest Neighbor": score_predictions(routes, {r.route_id: nearest_neighbor(r) for r in routes}),
        "Full TSP": score_predictions(routes, {r.route_id: full_tsp(r, exact_threshold) for r in routes}),
        "LG-OL": score_predictions(routes, lgol),
        "LG-OL (hypothetical)": hypothetical_oracle_run(routes, w, exact_threshold),
        "Driver": score_predictions(routes, {r.route_id: r.actual_sequence for r in routes}),
    }


TABLE_COLUMNS = ["model", "sd_zone", "sd_stop", "erp_ratio", "time", "performance"]


def table_rows(table: Mapping[str, CorpusScore]) -> list[dict]:
    return [{"model": name, **{k: v for k, v in score.summary().items() if k in TABLE_COLUMNS}}
            for name, score in table.items()]


def write_table(table: Mapping[str, CorpusScore], csv_path, json_path=None) -> None:
    rows = table_rows(table)
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        wr = csv.DictWriter(f, fieldnames=TABLE_COLUMNS)
        wr.writeheader()
        wr.writerows(rows)
    if json_path is not None:
        with open(json_path, "w", encoding="utf-8") as f:
            json.dump(rows, f, indent=1, sort_keys=True)
            f.write("\n")


def write_sweep(result: SweepResult, csv_path, json_path=None) -> None:
    rows = result.rows()
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        wr = csv.DictWriter(f, fieldnames=list(rows[0]) if rows else ["performance"])
        wr.writeheader()
        wr.writerows(rows)
    if json_path is not None:
        best_w, best_p = result.best()
        data = {"folds": result.fold_count, "points": rows, "best": {"config": best_w.label(), "performance": best_p}}
        with open(json_path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=1, sort_keys=True)
            f.write("\n")


def gnuplot_series(result: SweepResult, x: str = "omega", series: str = "metric") -> str:
    """Blank-line separated ``x performance`` blocks, one per value of ``series``."""
    blocks: dict = {}
    for row in result.rows():
        blocks.setdefault(row[series], []).append((row[x], row["performance"]))
    out = []
    for key, pts in blocks.items():
        out.append(f"# {series}={key}")
        out.extend(f"{a:g} {b:.10g}" for a, b in pts)
        out.append("")
        out.append("")
    return "\n".join(out)
