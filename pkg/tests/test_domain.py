import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import make_route
from lgol.domain import impute_missing_zones, validate_route
from lgol.errors import NoZonedStops

PTS = {"STN": (0, 0), "a": (100, 0), "b": (200, 0), "c": (210, 0), "d": (500, 0)}


def test_impute_noop_when_all_zoned():
    r = make_route(PTS, {"a": "A", "b": "B", "c": "B", "d": "C"})
    assert impute_missing_zones(r) is r


def test_impute_takes_nearest_by_travel_time():
    r = make_route(PTS, {"a": "A", "b": "B", "d": "C"})
    out = impute_missing_zones(r)
    # linear-scan oracle over c's row
    row = r.travel_times["c"]
    donors = [s for s in ("a", "b", "d")]
    best = min(donors, key=lambda s: row[s])
    assert out.by_id["c"].zone == r.by_id[best].zone == "B"


def test_impute_uses_outbound_row_for_asymmetric_times():
    r = make_route(PTS, {"a": "A", "b": "B", "d": "C"})
    tt = {k: dict(v) for k, v in r.travel_times.items()}
    tt["c"]["d"] = 1.0  # c -> d is quick, d -> c is not
    r = dataclasses.replace(r, travel_times=tt)
    assert impute_missing_zones(r).by_id["c"].zone == "C"


def test_impute_tie_goes_to_smaller_stop_id():
    pts = {"STN": (0, 0), "x": (100, 0), "m": (50, 0), "y": (0, 0)}
    times = {a: {b: 0.0 if a == b else 10.0 for b in pts} for a in pts}
    r = make_route(pts, {"x": "X", "y": "Y"}, times)
    assert impute_missing_zones(r).by_id["m"].zone == "X"


def test_impute_without_donors_raises():
    r = make_route({"STN": (0, 0), "a": (1, 0)}, {})
    with pytest.raises(NoZonedStops):
        impute_missing_zones(r)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(["A", "B", None]), min_size=2, max_size=7), st.randoms())
def test_impute_idempotent_and_conservative(zs, rnd):
    if all(z is None for z in zs):
        zs[0] = "A"
    pts = {"STN": (0, 0), **{f"s{i}": (rnd.uniform(0, 1000), rnd.uniform(0, 1000)) for i in range(len(zs))}}
    zones = {f"s{i}": z for i, z in enumerate(zs) if z is not None}
    r = make_route(pts, zones)
    once = impute_missing_zones(r)
    assert impute_missing_zones(once) == once
    assert once.travel_times == r.travel_times
    for s0, s1 in zip(r.stops, once.stops):
        assert (s0.id, s0.location, s0.is_station) == (s1.id, s1.location, s1.is_station)
        if s0.zone is not None:
            assert s1.zone == s0.zone
        elif not s0.is_station:
            assert s1.zone is not None


def test_validate_well_formed():
    r = make_route(PTS, {"a": "A", "b": "B", "c": "B", "d": "C"}, actual=["STN", "a", "b", "c", "d"])
    assert validate_route(r) == []


def test_validate_two_stations():
    r = make_route(PTS, {"a": "A"})
    stops = tuple(dataclasses.replace(s, is_station=True) if s.id == "a" else s for s in r.stops)
    v = validate_route(dataclasses.replace(r, stops=stops))
    assert len(v) == 1 and "station uniqueness" in v[0]


def test_validate_missing_row():
    r = make_route(PTS, {"a": "A"})
    tt = {k: v for k, v in r.travel_times.items() if k != "d"}
    v = validate_route(dataclasses.replace(r, travel_times=tt))
    assert len(v) == 1 and "completeness" in v[0]


def test_validate_sequence_not_starting_at_station():
    r = make_route(PTS, {"a": "A"}, actual=["a", "STN", "b", "c", "d"])
    assert any("station" in p for p in validate_route(r))


def test_sequence_time_optionally_closes_loop():
    r = make_route({"STN": (0, 0), "a": (3, 4)}, {"a": "A"})
    assert r.sequence_time(["STN", "a"]) == 5.0
    assert r.sequence_time(["STN", "a"], include_return=True) == 10.0
