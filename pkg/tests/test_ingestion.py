import json

import pytest

from lgol.errors import EmptyCorpus, NotPermutation
from lgol.ingestion import (
    Corpus,
    load_corpus,
    load_corpus_dir,
    read_predictions,
    split_corpus,
    write_corpus,
    write_predictions,
)
from lgol.synth import GeneratorConfig, generate


def _write(tmp_path, routes, seqs, tts):
    paths = []
    for name, obj in (("route_data.json", routes), ("actual_sequences.json", seqs), ("travel_times.json", tts)):
        p = tmp_path / name
        p.write_text(json.dumps(obj), encoding="utf-8")
        paths.append(p)
    return paths


ROUTE = {
    "station_code": "DLA3",
    "stops": {
        "ST": {"lat": 34.0, "lng": -118.0, "type": "Station", "zone_id": None},
        "AA": {"lat": 34.01, "lng": -118.01, "type": "Dropoff", "zone_id": "A-1.1A"},
        "BB": {"lat": 34.02, "lng": -118.02, "type": "Dropoff", "zone_id": "A-1.2B"},
    },
}
TT = {a: {b: 0 if a == b else 60 for b in ("ST", "AA", "BB")} for a in ("ST", "AA", "BB")}
SEQ = {"actual": {"ST": 0, "BB": 1, "AA": 2}}


def test_empty_route_map(tmp_path):
    c = load_corpus(*_write(tmp_path, {}, {}, {}))
    assert len(c) == 0 and c.rejected == ()


def test_single_route(tmp_path):
    c = load_corpus(*_write(tmp_path, {"r1": ROUTE}, {"r1": SEQ}, {"r1": TT}))
    (r,) = c.routes
    assert r.station == "DLA3" and c.stations == {"DLA3"}
    assert r.actual_sequence == ("ST", "BB", "AA")
    assert r.station_stop.id == "ST"
    assert r.by_id["AA"].zone == "A-1.1A"


def test_incomplete_travel_times_rejected(tmp_path):
    tt = {a: {b: v for b, v in row.items() if b != "BB"} for a, row in TT.items() if a != "BB"}
    c = load_corpus(*_write(tmp_path, {"r1": ROUTE, "r2": ROUTE}, {}, {"r1": TT, "r2": tt}))
    assert [r.route_id for r in c.routes] == ["r1"]
    (rej,) = c.rejected
    assert rej.route_id == "r2" and rej.field == "travel_times"


def test_missing_sequence_is_allowed(tmp_path):
    c = load_corpus(*_write(tmp_path, {"r1": ROUTE}, {}, {"r1": TT}))
    assert c.routes[0].actual_sequence is None


def test_round_trip(tmp_path):
    corpus = generate(GeneratorConfig(station_count=2, route_count=3, zones_per_station=6))
    write_corpus(corpus, tmp_path / "c")
    again = load_corpus_dir(tmp_path / "c")
    assert again == corpus
    write_corpus(again, tmp_path / "d")
    for name in ("route_data.json", "actual_sequences.json", "travel_times.json"):
        assert (tmp_path / "c" / name).read_bytes() == (tmp_path / "d" / name).read_bytes()


def _corpus(n_per_station):
    corpus = generate(GeneratorConfig(station_count=len(n_per_station), route_count=max(n_per_station),
                                      zones_per_station=4, zones_per_route_range=(1, 2)))
    keep = []
    for s, n in enumerate(n_per_station):
        keep += [r.route_id for r in corpus if r.station == f"ST{s}"][:n]
    return corpus.subset(keep)


def test_split_sizes_and_determinism():
    c = _corpus([10])
    a, b = split_corpus(c, 0.2, 7), split_corpus(c, 0.2, 7)
    assert (len(a.train), len(a.test)) == (8, 2)
    assert [r.route_id for r in a.test] == [r.route_id for r in b.test]


def test_split_half_of_two():
    sp = split_corpus(_corpus([2]), 0.5, 0)
    assert (len(sp.train), len(sp.test)) == (1, 1)


def test_split_seeds_keep_sizes_and_partition():
    c = _corpus([7, 5, 12])
    expected = sum(int(f * 0.3 + 0.5) for f in (7, 5, 12))
    seen = set()
    for seed in range(6):
        sp = split_corpus(c, 0.3, seed)
        assert len(sp.test) == expected
        ids_tr = {r.route_id for r in sp.train}
        ids_te = {r.route_id for r in sp.test}
        assert not ids_tr & ids_te and ids_tr | ids_te == {r.route_id for r in c}
        seen.add(frozenset(ids_te))
    assert len(seen) > 1


def test_split_empty():
    with pytest.raises(EmptyCorpus):
        split_corpus(Corpus(()), 0.2, 0)


def test_write_predictions_format(tmp_path):
    p = tmp_path / "out.json"
    write_predictions({"r1": ["stn", "a", "b"]}, p)
    assert json.loads(p.read_text()) == {"r1": {"proposed": {"stn": 0, "a": 1, "b": 2}}}
    assert read_predictions(p) == {"r1": ("stn", "a", "b")}
    first = p.read_bytes()
    write_predictions({"r1": ["stn", "a", "b"]}, p)
    assert p.read_bytes() == first


def test_write_predictions_empty(tmp_path):
    p = tmp_path / "out.json"
    write_predictions({}, p)
    assert json.loads(p.read_text()) == {}


def test_write_predictions_rejects_non_permutation(tmp_path):
    p = tmp_path / "out.json"
    with pytest.raises(NotPermutation):
        write_predictions({"r1": ["stn", "a", "a"]}, p)
    assert not p.exists()
