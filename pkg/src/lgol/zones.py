"""Turning realized stop sequences into zone sequences and transition counts."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from itertools import groupby
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np

from .domain import Route
from .errors import EmptyInput, MissingActualSequence, StationMismatch


def run_lengths(zones: Sequence[Hashable]) -> list[tuple[Hashable, int]]:
    return [(z, sum(1 for _ in grp)) for z, grp in groupby(zones)]


def _merge(pairs):
    out = []
    for z, n in pairs:
        if out and out[-1][0] == z:
            out[-1] = (z, out[-1][1] + n)
        else:
            out.append((z, n))
    return out


def to_zone_sequence(zones: Sequence[Hashable]) -> tuple:
    """Reduce a per-stop zone list to an order of distinct zones.

    Consecutive repeats are collapsed into (zone, count) runs. While a zone
    still owns several runs, only its longest run survives (earliest on a
    tie), after which newly adjacent runs of one zone are merged. The zone
    with the most runs is resolved first, ties by earliest appearance.

    >>> to_zone_sequence(["Z3", "Z1", "Z1", "Z2", "Z3", "Z3"])
    ('Z1', 'Z2', 'Z3')
    """
    if len(zones) == 0:
        raise EmptyInput("zone list is empty")
    pairs = run_lengths(zones)
    while True:
        runs = Counter(z for z, _ in pairs)
        dup = [z for z, c in runs.items() if c > 1]
        if not dup:
            break
        first_seen = {}
        for i, (z, _) in enumerate(pairs):
            first_seen.setdefault(z, i)
        target = min(dup, key=lambda z: (-runs[z], first_seen[z]))
        idx = [i for i, (z, _) in enumerate(pairs) if z == target]
        keep = max(idx, key=lambda i: (pairs[i][1], -i))
        pairs = _merge(p for i, p in enumerate(pairs) if i == keep or pairs[i][0] != target)
    return tuple(z for z, _ in pairs)


def route_zone_sequence(route: Route, order: Sequence[str] | None = None) -> tuple[str, ...]:
    """Zone sequence of ``order`` (default: the route's actual sequence)."""
    if order is None:
        order = route.actual_sequence
        if order is None:
            raise MissingActualSequence(f"route {route.route_id} has no actual sequence")
    by_id = route.by_id
    zs = [by_id[s].zone for s in order if not by_id[s].is_station and by_id[s].zone is not None]
    return to_zone_sequence(zs) if zs else ()


@dataclass(frozen=True, eq=False)
class CountMatrix:
    """Zone-transition tallies for one station.

    Row/column 0 is the station, rows 1..M are ``zones`` in order.
    """

    station: str
    zones: tuple[str, ...]
    counts: np.ndarray

    @property
    def index(self) -> list[str]:
        return [self.station, *self.zones]

    def __eq__(self, other):
        return (
            isinstance(other, CountMatrix)
            and self.station == other.station
            and self.zones == other.zones
            and np.array_equal(self.counts, other.counts)
        )

    def to_json(self) -> dict:
        return {"station": self.station, "index": self.index, "counts": self.counts.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> CountMatrix:
        index = list(data["index"])
        counts = np.asarray(data["counts"], dtype=np.int64).reshape(len(index), len(index))
        return cls(str(data["station"]), tuple(index[1:]), counts)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path) -> CountMatrix:
        with open(Path(path), encoding="utf-8") as f:
            return cls.from_json(json.load(f))


def accumulate_counts(routes: Iterable[Route], station: str | None = None) -> CountMatrix:
    """Tally station->first, zone->zone and last->station transitions."""
    routes = list(routes)
    if station is None:
        if not routes:
            raise EmptyInput("no routes and no station given")
        station = routes[0].station
    seqs = []
    for r in routes:
        if r.station != station:
            raise StationMismatch(f"route {r.route_id} belongs to {r.station}, not {station}")
        seqs.append(route_zone_sequence(r))
    zones = tuple(sorted({z for seq in seqs for z in seq}))
    pos = {z: i + 1 for i, z in enumerate(zones)}
    counts = np.zeros((len(zones) + 1, len(zones) + 1), dtype=np.int64)
    for seq in seqs:
        if not seq:
            continue
        path = [0, *(pos[z] for z in seq), 0]
        np.add.at(counts, (path[:-1], path[1:]), 1)
    return CountMatrix(station, zones, counts)


def learn(corpus) -> dict[str, CountMatrix]:
    """One count matrix per station of ``corpus``."""
    return {s: accumulate_counts(rs, s) for s, rs in corpus.by_station().items()}
