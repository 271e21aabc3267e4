"""Command-line entry point: ``lgol <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .baselines import full_tsp, nearest_neighbor
from .cost import TransitionMatrix, WeightConfig, to_transition_matrix
from .errors import LgolError
from .experiments import (
    BEST_STRUCTURED,
    benchmark_table,
    fit_models,
    gnuplot_series,
    omega_l_sensitivity,
    omega_sweep,
    predict_corpus,
    score_predictions,
    station_weight_grid,
    table_rows,
    write_sweep,
    write_table,
)
from .geojson import write_geojson
from .ingestion import (
    Corpus,
    load_corpus,
    load_corpus_dir,
    read_predictions,
    split_corpus,
    write_corpus,
    write_predictions,
)
from .metrics import write_reports_csv, write_score_json
from .synth import GeneratorConfig, generate
from .tsp import DEFAULT_EXACT_THRESHOLD
from .zones import CountMatrix, learn

log = logging.getLogger("lgol")


def _weights(args, parser) -> WeightConfig:
    structured = [args.omega_f, args.omega_z, args.omega_l]
    if args.omega is not None and any(v is not None for v in structured):
        parser.error("--omega cannot be combined with --omega-f/--omega-z/--omega-l")
    if any(v is not None for v in structured) or args.structured:
        f, z, l = (d if v is None else v for v, d in zip(structured, BEST_STRUCTURED))
        return WeightConfig.structured(f, z, l, args.metric)
    return WeightConfig.scalar(0.9 if args.omega is None else args.omega, args.metric)


def _load(path, travel_times=None, sequences=None) -> Corpus:
    p = Path(path)
    if p.is_dir():
        corpus = load_corpus_dir(p)
    else:
        if travel_times is None:
            raise LgolError("--travel-times is required when --routes is a file")
        corpus = load_corpus(p, sequences, travel_times)
    for rej in corpus.rejected:
        print(f"rejected {rej.route_id}: {rej.reason}", file=sys.stderr)
    return corpus.imputed()


def _manifest(out, args, started, seeds=None) -> None:
    out = Path(out)
    target = out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")
    config = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k != "func"}
    data = {
        "command": args.command,
        "config": config,
        "seeds": seeds or {},
        "tool_version": __version__,
        "wall_clock_seconds": round(time.time() - started, 3),
    }
    with open(target, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=1, sort_keys=True)
        f.write("\n")


def _load_models(model_dir) -> dict[str, TransitionMatrix]:
    models = {}
    for p in sorted(Path(model_dir).glob("*.json")):
        if p.name.endswith("manifest.json"):
            continue
        cm = CountMatrix.load(p)
        models[cm.station] = to_transition_matrix(cm)
    if not models:
        raise LgolError(f"no model files in {model_dir}")
    return models


def cmd_generate(args, parser):
    cfg = GeneratorConfig(
        station_count=args.stations,
        zones_per_station=args.zones,
        route_count=args.routes,
        habit_strength=args.habit,
        within_zone_policy=args.policy,
        noise_seed=args.seed,
        noise_level=args.noise,
        stops_per_zone_range=tuple(args.stops_per_zone),
        zones_per_route_range=tuple(args.zones_per_route),
    )
    corpus = generate(cfg)
    write_corpus(corpus, args.out)
    print(f"wrote {len(corpus)} routes to {args.out}")
    return {"generator": args.seed}


def cmd_learn(args, parser):
    corpus = _load(args.inp)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for station, cm in learn(corpus).items():
        cm.save(out / f"{station}.json")
    print(f"learned {len(corpus.stations)} station models from {len(corpus)} routes")


def cmd_predict(args, parser):
    w = _weights(args, parser)
    corpus = _load(args.routes, args.travel_times)
    if args.method == "lgol":
        models = _load_models(args.model)
        preds = predict_corpus(corpus, models, w, args.exact_threshold, args.jobs)
    elif args.method == "nn":
        preds = {r.route_id: nearest_neighbor(r) for r in corpus}
    else:
        preds = {r.route_id: full_tsp(r, args.exact_threshold) for r in corpus}
    write_predictions(preds, args.out, {r.route_id: r for r in corpus})
    print(f"wrote {len(preds)} predictions to {args.out}")


def cmd_score(args, parser):
    corpus = _load(args.actual)
    preds = read_predictions(args.pred)
    routes = [r for r in corpus if r.route_id in preds]
    missing = sorted(set(preds) - {r.route_id for r in routes})
    if missing:
        raise LgolError(f"predictions for unknown routes: {missing[:5]}")
    score = score_predictions(routes, preds)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_reports_csv(score.per_route, out / "routes.csv")
        write_score_json(score, out / "score.json")
    s = score.summary()
    print(f"Performance {s['performance']:.6f}  SD_stop {s['sd_stop']:.4f}  SD_zone {s['sd_zone']:.4f}  routes {s['routes']}")


def cmd_cv(args, parser):
    corpus = _load(args.inp)
    metrics = ("traveltime", "euclid") if args.metric == "both" else (args.metric,)
    res = omega_sweep(corpus, metrics, args.k, args.seed, args.step, args.exact_threshold, args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep(res, out / "omega_sweep.csv", out / "omega_sweep.json")
    (out / "omega_sweep.dat").write_text(gnuplot_series(res), encoding="utf-8")
    for row in res.rows():
        print(f"{row['metric']:>10} omega={row['omega']:.2f} performance={row['performance']:.6f}")
    return {"folds": args.seed}


def cmd_contour(args, parser):
    corpus = _load(args.inp)
    metric = args.metric
    res = station_weight_grid(corpus, None, None, args.omega_l, args.k, args.seed, metric,
                              args.exact_threshold, args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep(res, out / "contour.csv", out / "contour.json")
    best, perf = res.best()
    print(f"best {best.label()} performance={perf:.6f}")
    if args.sensitivity:
        pairs = [tuple(p) for p in args.pairs] if args.pairs else [(best.omega_f, best.omega_z)]
        sens = omega_l_sensitivity(corpus, pairs, None, args.k, args.seed, metric, args.exact_threshold, args.jobs)
        write_sweep(sens, out / "omega_l.csv", out / "omega_l.json")
        (out / "omega_l.dat").write_text(gnuplot_series(sens, x="omega_l", series="omega_f"), encoding="utf-8")
    return {"folds": args.seed}


def cmd_bench(args, parser):
    w = _weights(args, parser)
    corpus = _load(args.inp)
    split = split_corpus(corpus, args.test_fraction, args.seed)
    models = fit_models(split.train, corpus.stations)
    table = benchmark_table(split.test, models, w, args.exact_threshold, args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_table(table, out / "benchmark.csv", out / "benchmark.json")
    print(f"{'model':<22}{'SD_zone':>9}{'SD_stop':>9}{'ERP_ratio':>10}{'Time':>10}{'Perf':>9}")
    for row in table_rows(table):
        print(f"{row['model']:<22}{row['sd_zone']:9.4f}{row['sd_stop']:9.4f}{row['erp_ratio']:10.4f}"
              f"{row['time']:10.0f}{row['performance']:9.4f}")
    return {"split": args.seed}


def cmd_export_geojson(args, parser):
    corpus = _load(args.routes, args.travel_times)
    routes = {r.route_id: r for r in corpus}
    if args.pred:
        orders = read_predictions(args.pred)
    else:
        orders = {rid: r.actual_sequence for rid, r in routes.items() if r.actual_sequence}
    if args.route_id:
        orders = {rid: orders[rid] for rid in args.route_id if rid in orders}
    write_geojson(routes, orders, args.out)
    print(f"wrote {len(orders)} routes to {args.out}")


def _add_weights(p):
    g = p.add_argument_group("weights")
    g.add_argument("--omega", type=float, help="scalar weight (default 0.9)")
    g.add_argument("--omega-f", type=float, help="station-to-first-zone weight")
    g.add_argument("--omega-z", type=float, help="zone-to-zone weight")
    g.add_argument("--omega-l", type=float, help="last-zone-to-station weight")
    g.add_argument("--structured", action="store_true", help="structured weights (0.2, 0.8, 1) unless overridden")
    g.add_argument("--metric", choices=["euclid", "traveltime"], default="traveltime")


def _add_common(p, jobs=True):
    p.add_argument("--exact-threshold", type=int, default=DEFAULT_EXACT_THRESHOLD)
    p.add_argument("--seed", type=int, default=0)
    if jobs:
        p.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lgol", description="Zone-learning route prediction toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic corpus directory")
    p.add_argument("--out", required=True)
    p.add_argument("--stations", type=int, default=5)
    p.add_argument("--zones", type=int, default=20)
    p.add_argument("--routes", type=int, default=300, help="routes per station")
    p.add_argument("--habit", type=float, default=0.8)
    p.add_argument("--policy", choices=["shortest_path", "random"], default="shortest_path")
    p.add_argument("--noise", type=float, default=30.0)
    p.add_argument("--stops-per-zone", type=int, nargs=2, default=[2, 6])
    p.add_argument("--zones-per-route", type=int, nargs=2, default=[5, 10])
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("learn", help="learn per-station count matrices")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("predict", help="predict stop sequences")
    p.add_argument("--model", help="directory written by 'learn' (required for --method lgol)")
    p.add_argument("--routes", required=True, help="corpus directory or route_data.json")
    p.add_argument("--travel-times", help="travel-time file when --routes is a file")
    p.add_argument("--method", choices=["lgol", "nn", "tsp"], default="lgol")
    p.add_argument("--out", required=True)
    _add_weights(p)
    _add_common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("score", help="score predictions against actual sequences")
    p.add_argument("--pred", required=True)
    p.add_argument("--actual", required=True, help="corpus directory with actual sequences")
    p.add_argument("--out", help="directory for routes.csv and score.json")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("cv", help="cross-validated omega sweep")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--metric", choices=["euclid", "traveltime", "both"], default="both")
    _add_common(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("contour", help="cross-validated (omega_F, omega_Z) grid")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--omega-l", type=float, default=1.0)
    p.add_argument("--metric", choices=["euclid", "traveltime"], default="traveltime")
    p.add_argument("--sensitivity", action="store_true", help="also sweep omega_L")
    p.add_argument("--pairs", type=float, nargs=2, action="append", metavar=("F", "Z"))
    _add_common(p)
    p.set_defaults(func=cmd_contour)

    p = sub.add_parser("bench", help="benchmark table on a held-out split")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--test-fraction", type=float, default=0.2)
    _add_weights(p)
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export-geojson", help="write sequences as GeoJSON")
    p.add_argument("--routes", required=True)
    p.add_argument("--travel-times")
    p.add_argument("--pred", help="predictions file (default: actual sequences)")
    p.add_argument("--route-id", action="append")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_geojson)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "predict" and args.method == "lgol" and not args.model:
        parser.error("--model is required with --method lgol")
    started = time.time()
    try:
        seeds = args.func(args, parser)
        if getattr(args, "out", None):
            _manifest(args.out, args, started, seeds)
    except (LgolError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
