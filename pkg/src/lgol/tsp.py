"""Closed tours and open paths over asymmetric cost matrices.

Up to ``exact_threshold`` nodes the answer comes from Held-Karp subset
dynamic programming and is optimal. Larger instances get a nearest
neighbour start improved by 2-opt and Or-opt until no move helps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleAnchors

DEFAULT_EXACT_THRESHOLD = 16
_EPS = 1e-12


@dataclass(frozen=True)
class TourInstance:
    cost: np.ndarray
    start_index: int = 0

    def __post_init__(self):
        c = np.asarray(self.cost, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("cost matrix must be square")
        object.__setattr__(self, "cost", c)


@dataclass(frozen=True)
class PathInstance:
    cost: np.ndarray
    start_index: int = 0
    end_index: int | None = None

    def __post_init__(self):
        c = np.asarray(self.cost, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("cost matrix must be square")
        object.__setattr__(self, "cost", c)


@dataclass(frozen=True)
class SolveReport:
    order: tuple[int, ...]
    objective: float
    optimal: bool
    method: str  # "exact" or "local_search"
    seed: int = 0


def path_cost(cost: np.ndarray, order, closed: bool = False) -> float:
    order = list(order)
    total = float(sum(cost[a, b] for a, b in zip(order, order[1:])))
    if closed and len(order) > 1:
        total += float(cost[order[-1], order[0]])
    return total


def _held_karp(C: np.ndarray, start: int, end: int) -> list[int]:
    """Optimal start -> ... -> end Hamiltonian path (``end == start`` closes a tour)."""
    n = len(C)
    inner = np.array([v for v in range(n) if v != start and v != end])
    k = len(inner)
    if k == 0:
        return [start] if end == start else [start, end]
    full = (1 << k) - 1
    masks = np.arange(1 << k)
    bits = ((masks[:, None] >> np.arange(k)) & 1).astype(bool)
    size = bits.sum(axis=1)
    Cin = C[np.ix_(inner, inner)]
    dp = np.full((1 << k, k), np.inf)
    parent = np.full((1 << k, k), -1, dtype=np.int16)
    one = 1 << np.arange(k)
    dp[one, np.arange(k)] = C[start, inner]
    for layer in range(2, k + 1):
        m = masks[size == layer]
        prev = dp[m[:, None] ^ one[None, :]]  # [mask, j, i]: path ending at i before adding j
        cand = prev + Cin.T[None, :, :]
        best = cand.argmin(axis=2)
        val = np.take_along_axis(cand, best[..., None], axis=2)[..., 0]
        val[~bits[m]] = np.inf
        dp[m] = val
        parent[m] = best
    final = dp[full] + C[inner, end]
    j = int(final.argmin())
    mask, rev = full, []
    while j >= 0:
        rev.append(int(inner[j]))
        pj = int(parent[mask, j])
        mask ^= 1 << j
        j = pj if mask else -1
    order = [start, *reversed(rev)]
    return order if end == start else order + [end]


def _nearest_neighbor(C: np.ndarray, start: int, end: int) -> list[int]:
    free = [v for v in range(len(C)) if v != start and v != end]
    seq = [start]
    while free:
        cur = seq[-1]
        nxt = min(free, key=lambda v: (C[cur, v], v))
        seq.append(nxt)
        free.remove(nxt)
    seq.append(end)
    return seq


def _two_opt_move(C, s):
    m = len(s) - 1
    if m < 3:
        return None
    fwd = np.concatenate([[0.0], np.cumsum(C[s[:-1], s[1:]])])
    bwd = np.concatenate([[0.0], np.cumsum(C[s[1:], s[:-1]])])
    I, J = np.triu_indices(m - 1, k=1)
    I = I + 1
    J = J + 1
    delta = (
        C[s[I - 1], s[J]] + C[s[I], s[J + 1]] + (bwd[J] - bwd[I])
        - C[s[I - 1], s[I]] - C[s[J], s[J + 1]] - (fwd[J] - fwd[I])
    )
    b = int(delta.argmin())
    if delta[b] < -_EPS:
        return int(I[b]), int(J[b]), float(delta[b])
    return None


def _or_opt_move(C, s, max_len=3):
    m = len(s) - 1
    best = None
    positions = np.arange(m)
    for L in range(1, max_len + 1):
        for i in range(1, m - L + 1):
            a, b = s[i], s[i + L - 1]
            gain = C[s[i - 1], a] + C[b, s[i + L]] - C[s[i - 1], s[i + L]]
            ins = C[s[positions], a] + C[b, s[positions + 1]] - C[s[positions], s[positions + 1]]
            ins[i - 1 : i + L] = np.inf
            p = int(ins.argmin())
            delta = ins[p] - gain
            if delta < -_EPS and (best is None or delta < best[3]):
                best = (i, L, p, float(delta))
    return best


def _local_search(C: np.ndarray, seq: list[int]) -> list[int]:
    s = np.array(seq)
    while True:
        improved = False
        while (mv := _two_opt_move(C, s)) is not None:
            i, j, _ = mv
            s[i : j + 1] = s[i : j + 1][::-1]
            improved = True
        mv = _or_opt_move(C, s)
        if mv is not None:
            i, L, p, _ = mv
            seg = s[i : i + L].tolist()
            rest = np.delete(s, np.arange(i, i + L)).tolist()
            at = p + 1 if p < i else p + 1 - L
            s = np.array(rest[:at] + seg + rest[at:])
            improved = True
        if not improved:
            return s.tolist()


def solve_tour(instance: TourInstance | np.ndarray, exact_threshold: int = DEFAULT_EXACT_THRESHOLD, seed: int = 0) -> SolveReport:
    """Minimum-cost closed tour; ``order`` starts at the anchor and omits the return."""
    if not isinstance(instance, TourInstance):
        instance = TourInstance(instance)
    C, start = instance.cost, instance.start_index
    n = len(C)
    if n <= 1:
        return SolveReport((start,), 0.0, True, "exact", seed)
    if n <= exact_threshold:
        order, optimal, method = _held_karp(C, start, start), True, "exact"
    else:
        closed = _local_search(C, _nearest_neighbor(C, start, start))
        order, optimal, method = closed[:-1], False, "local_search"
    return SolveReport(tuple(order), path_cost(C, order, closed=True), optimal, method, seed)


def solve_path(instance: PathInstance | np.ndarray, exact_threshold: int = DEFAULT_EXACT_THRESHOLD, seed: int = 0) -> SolveReport:
    """Minimum-cost Hamiltonian path from ``start_index`` (to ``end_index`` if set).

    A free end is modelled by a virtual terminal that every node reaches at
    zero cost and that cannot be left.
    """
    if not isinstance(instance, PathInstance):
        instance = PathInstance(instance)
    C, start, end = instance.cost, instance.start_index, instance.end_index
    n = len(C)
    if end is not None and end == start and n > 1:
        raise InfeasibleAnchors("path start and end coincide")
    if n == 1:
        return SolveReport((start,), 0.0, True, "exact", seed)
    if end is None:
        big = (np.abs(C).max() + 1.0) * (n + 1)
        A = np.zeros((n + 1, n + 1))
        A[:n, :n] = C
        A[n, :n] = big
        work, stop = A, n
    else:
        work, stop = C, end
    if n <= exact_threshold:
        order, optimal, method = _held_karp(work, start, stop), True, "exact"
    else:
        order = _local_search(work, _nearest_neighbor(work, start, stop))
        optimal, method = False, "local_search"
    if end is None:
        order = order[:-1]
    return SolveReport(tuple(order), path_cost(C, order), optimal, method, seed)


def nearest_neighbor_objective(C: np.ndarray, start: int = 0, end: int | None = None, closed: bool = False) -> float:
    """Objective of the greedy construction the local search starts from."""
    C = np.asarray(C, dtype=float)
    if closed:
        return path_cost(C, _nearest_neighbor(C, start, start))
    if end is None:
        free = [v for v in range(len(C)) if v != start]
        seq = [start]
        while free:
            nxt = min(free, key=lambda v: (C[seq[-1], v], v))
            seq.append(nxt)
            free.remove(nxt)
        return path_cost(C, seq)
    return path_cost(C, _nearest_neighbor(C, start, end))
