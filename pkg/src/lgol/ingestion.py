"""Reading and writing route corpora and prediction files.

On-disk layout follows the Last-Mile Routing challenge files:

* ``route_data.json``: ``{route_id: {"station_code": str, "stops": {stop_id:
  {"lat": float, "lng": float, "type": "Station"|"Dropoff", "zone_id": str|null}}}}``
* ``actual_sequences.json``: ``{route_id: {"actual": {stop_id: order}}}``
* ``travel_times.json``: ``{route_id: {stop_id: {stop_id: seconds}}}``

A corpus directory holds these three files under exactly these names.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .domain import GeoPoint, Route, Stop, impute_missing_zones, validate_route
from .errors import EmptyCorpus, FormatError, LgolError, NotPermutation

log = logging.getLogger(__name__)

ROUTE_FILE = "route_data.json"
SEQUENCE_FILE = "actual_sequences.json"
TRAVEL_TIME_FILE = "travel_times.json"


@dataclass(frozen=True)
class Rejection:
    route_id: str
    file: str
    field: str
    reason: str


@dataclass(frozen=True)
class Corpus:
    routes: tuple[Route, ...]
    stations: frozenset[str] = frozenset()
    rejected: tuple[Rejection, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.stations:
            object.__setattr__(self, "stations", frozenset(r.station for r in self.routes))
        ids = [r.route_id for r in self.routes]
        if len(set(ids)) != len(ids):
            raise FormatError("duplicate route ids in corpus")
        missing = {r.station for r in self.routes} - self.stations
        if missing:
            raise FormatError(f"routes reference unknown stations {sorted(missing)}")

    def __len__(self):
        return len(self.routes)

    def __iter__(self):
        return iter(self.routes)

    def by_station(self) -> dict[str, list[Route]]:
        out: dict[str, list[Route]] = {s: [] for s in sorted(self.stations)}
        for r in self.routes:
            out[r.station].append(r)
        return out

    def subset(self, route_ids: Iterable[str]) -> Corpus:
        keep = set(route_ids)
        return Corpus(tuple(r for r in self.routes if r.route_id in keep), self.stations)

    def imputed(self) -> Corpus:
        """Impute missing zones; routes without any zoned stop are rejected."""
        routes, rejected = [], list(self.rejected)
        for r in self.routes:
            try:
                routes.append(impute_missing_zones(r))
            except LgolError as exc:
                rejected.append(Rejection(r.route_id, "", "stops.zone_id", str(exc)))
        return Corpus(tuple(routes), self.stations, tuple(rejected))


@dataclass(frozen=True)
class TrainTestSplit:
    train: Corpus
    test: Corpus
    seed: int


def _read_json(path) -> dict:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}", file=str(path)) from exc
    if not isinstance(data, dict):
        raise FormatError("top level must be a JSON object", file=str(path))
    return data


def _parse_route(route_id, raw, seq_raw, tt_raw, files) -> Route:
    rfile, sfile, tfile = files
    if not isinstance(raw, dict):
        raise FormatError("route entry must be an object", rfile, route_id)
    station = raw.get("station_code")
    if not isinstance(station, str) or not station:
        raise FormatError("missing station_code", rfile, route_id, "station_code")
    raw_stops = raw.get("stops")
    if not isinstance(raw_stops, dict) or not raw_stops:
        raise FormatError("missing stops", rfile, route_id, "stops")
    stops = []
    for sid, s in raw_stops.items():
        try:
            lat, lng = float(s["lat"]), float(s["lng"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError("bad coordinates", rfile, route_id, f"stops.{sid}") from exc
        zone = s.get("zone_id")
        if isinstance(zone, float) and math.isnan(zone):
            zone = None
        if zone is not None:
            zone = str(zone)
            if not zone:
                zone = None
        is_station = str(s.get("type", "")).lower() == "station"
        stops.append(Stop(str(sid), GeoPoint(lat, lng), None if is_station else zone, is_station))

    if tt_raw is None:
        raise FormatError("no travel times", tfile, route_id)
    if not isinstance(tt_raw, dict):
        raise FormatError("travel times must be an object", tfile, route_id)
    travel_times = {}
    for a, row in tt_raw.items():
        if not isinstance(row, dict):
            raise FormatError("travel-time row must be an object", tfile, route_id, str(a))
        try:
            travel_times[str(a)] = {str(b): float(v) for b, v in row.items()}
        except (TypeError, ValueError) as exc:
            raise FormatError("non-numeric travel time", tfile, route_id, str(a)) from exc

    actual = None
    if seq_raw is not None:
        order = seq_raw.get("actual") if isinstance(seq_raw, dict) else None
        if not isinstance(order, dict):
            raise FormatError("missing 'actual' map", sfile, route_id, "actual")
        try:
            actual = tuple(str(k) for k, _ in sorted(order.items(), key=lambda kv: (int(kv[1]), kv[0])))
        except (TypeError, ValueError) as exc:
            raise FormatError("non-integer visit order", sfile, route_id, "actual") from exc

    route = Route(str(route_id), station, tuple(stops), travel_times, actual)
    problems = validate_route(route)
    if problems:
        field_name = problems[0].split(":", 1)[0]
        file = tfile if field_name == "travel_times" else sfile if field_name == "actual_sequence" else rfile
        raise FormatError("; ".join(problems), file, route_id, field_name)
    return route


def load_corpus(route_data_path, sequence_path=None, travel_time_path=None) -> Corpus:
    """Load a corpus; malformed routes go to ``Corpus.rejected``.

    ``sequence_path`` may be None (no actual sequences known, e.g. routes to
    be predicted). File-level problems raise :class:`FormatError`.
    """
    if travel_time_path is None:
        raise FormatError("a travel-time file is required", file=str(route_data_path))
    routes_raw = _read_json(route_data_path)
    seqs_raw = _read_json(sequence_path) if sequence_path is not None else {}
    tts_raw = _read_json(travel_time_path)
    files = (str(route_data_path), str(sequence_path), str(travel_time_path))

    routes, rejected = [], []
    for rid, raw in routes_raw.items():
        try:
            routes.append(_parse_route(rid, raw, seqs_raw.get(rid), tts_raw.get(rid), files))
        except FormatError as exc:
            rejected.append(Rejection(str(rid), exc.file or "", exc.field or "", str(exc)))
    for rej in rejected:
        log.warning("rejected route %s: %s", rej.route_id, rej.reason)
    return Corpus(tuple(routes), frozenset(r.station for r in routes), tuple(rejected))


def load_corpus_dir(directory) -> Corpus:
    d = Path(directory)
    seq = d / SEQUENCE_FILE
    return load_corpus(d / ROUTE_FILE, seq if seq.exists() else None, d / TRAVEL_TIME_FILE)


def _dump(obj, path, sort_keys=True):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, sort_keys=sort_keys, indent=1)
        f.write("\n")


def write_corpus(corpus: Corpus, directory) -> None:
    """Write ``corpus`` as a corpus directory (inverse of :func:`load_corpus_dir`)."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    route_data, seqs, tts = {}, {}, {}
    for r in corpus.routes:
        route_data[r.route_id] = {
            "station_code": r.station,
            "stops": {
                s.id: {
                    "lat": s.location.lat,
                    "lng": s.location.lng,
                    "type": "Station" if s.is_station else "Dropoff",
                    "zone_id": s.zone,
                }
                for s in r.stops
            },
        }
        tts[r.route_id] = {a: dict(row) for a, row in r.travel_times.items()}
        if r.actual_sequence is not None:
            seqs[r.route_id] = {"actual": {sid: i for i, sid in enumerate(r.actual_sequence)}}
    # stop order is part of a route's identity, so keep insertion order
    _dump(route_data, d / ROUTE_FILE, sort_keys=False)
    _dump(tts, d / TRAVEL_TIME_FILE, sort_keys=False)
    if seqs:
        _dump(seqs, d / SEQUENCE_FILE, sort_keys=False)


def split_corpus(corpus: Corpus, test_fraction: float, seed: int = 0) -> TrainTestSplit:
    """Station-stratified random train/test split.

    Each station contributes ``round(test_fraction * n_station)`` routes
    (halves rounded up) to the test set.
    """
    if not corpus.routes:
        raise EmptyCorpus("cannot split an empty corpus")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    test_ids = set()
    for station, routes in corpus.by_station().items():
        ids = sorted(r.route_id for r in routes)
        n_test = int(math.floor(test_fraction * len(ids) + 0.5))
        perm = rng.permutation(len(ids))
        test_ids.update(ids[i] for i in perm[:n_test])
    train = Corpus(tuple(r for r in corpus.routes if r.route_id not in test_ids), corpus.stations)
    test = Corpus(tuple(r for r in corpus.routes if r.route_id in test_ids), corpus.stations)
    return TrainTestSplit(train, test, seed)


def write_predictions(predictions: Mapping[str, object], path, routes: Mapping[str, Route] | None = None) -> None:
    """Write ``{route_id: {"proposed": {stop_id: order}}}`` with sorted keys.

    Values are either stop-id sequences or objects with a ``stop_order``
    attribute. Every sequence is checked before anything is written.
    """
    out = {}
    for rid, pred in predictions.items():
        order: Sequence[str] = getattr(pred, "stop_order", pred)
        if len(set(order)) != len(order):
            raise NotPermutation(f"route {rid}: repeated stop in prediction")
        if routes is not None:
            route = routes[rid]
            if set(order) != set(route.stop_ids):
                raise NotPermutation(f"route {rid}: prediction does not cover the route's stops")
            if order and order[0] != route.station_stop.id:
                raise NotPermutation(f"route {rid}: prediction does not start at the station")
        out[rid] = {"proposed": {sid: i for i, sid in enumerate(order)}}
    _dump(out, path)


def read_predictions(path) -> dict[str, tuple[str, ...]]:
    data = _read_json(path)
    out = {}
    for rid, entry in data.items():
        proposed = entry.get("proposed") if isinstance(entry, dict) else None
        if not isinstance(proposed, dict):
            raise FormatError("missing 'proposed' map", str(path), rid, "proposed")
        out[rid] = tuple(k for k, _ in sorted(proposed.items(), key=lambda kv: (int(kv[1]), kv[0])))
    return out
