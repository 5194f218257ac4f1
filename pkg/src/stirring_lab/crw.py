"""Cyclic random walk (CRW) over bars and bridges.

The walker moves up its bar at unit speed, jumps across every bridge it meets
(strictly above its current height) and wraps from height ``t`` to ``0``.
Its trace in discovery order gives ``X_1, X_2, ...`` and the vertices where it
passes the top of a bar are the cycle of the start vertex under sigma_t.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import lattice
from .bridges import BridgeSet, sample_bridges
from .errors import InvalidParameter, InvariantViolation


@dataclass(frozen=True)
class SpaceTimePoint:
    vertex: int
    height: float = 0.0


@dataclass
class CrwRun:
    n: int
    start: SpaceTimePoint
    discovery_order: list[int]
    closed: bool
    top_crossings: list[int]
    bridge_log: list[tuple[int, int, float]] = field(repr=False)
    budget: int

    @property
    def trace_size(self) -> int:
        return len(self.discovery_order)

    def trace(self, k: int | None = None) -> lattice.VertexSet:
        order = self.discovery_order if k is None else self.discovery_order[:k]
        return lattice.VertexSet.from_indices(self.n, order)

    def to_json(self) -> str:
        n = self.n
        xy = lambda i: [i % n, i // n]  # noqa: E731
        return json.dumps({
            "start": {"vertex": xy(self.start.vertex), "height": self.start.height},
            "discovery_order": [xy(i) for i in self.discovery_order],
            "closed": self.closed,
            "top_crossings": [xy(i) for i in self.top_crossings],
        })


@dataclass(frozen=True)
class LineProfile:
    rows: np.ndarray
    columns: np.ndarray

    @property
    def iota(self) -> int:
        return int(max(self.rows.max(), self.columns.max()))


def run_crw(B: BridgeSet, start: SpaceTimePoint, budget: int | None = None,
            log_bridges: bool = True, timelines=None) -> CrwRun:
    """Run the CRW from ``start`` until it closes or its trace holds ``budget`` vertices.

    With ``budget >= n^2`` (the default) the walk always runs to closure.
    """
    n, t = B.n, B.horizon
    N = n * n
    budget = N if budget is None else budget
    if budget < 1:
        raise InvalidParameter("budget must be >= 1")
    v0, z0 = int(start.vertex), float(start.height)
    if not 0 <= z0 <= t or not 0 <= v0 < N:
        raise InvalidParameter(f"start {start} outside V x [0, {t}]")
    stop_early = budget < N
    succ = (timelines or B.walker()).successor

    order = [v0]
    seen = {v0}
    tops: list[int] = []
    log: list[tuple[int, int, float]] = []
    # a closed loop crosses each bridge at most twice and each bar top at most once
    guard = 2 * (len(B) + N) + 2
    cur, h = v0, z0
    closed = False
    for _ in range(guard):
        if stop_early and len(order) >= budget:
            break
        nxt = succ(cur, h)
        if cur == v0 and h < z0 and (nxt is None or nxt[0] > z0):
            closed = True
            break
        if nxt is None:
            tops.append(cur)
            h = 0.0
            if cur == v0 and z0 == 0.0:
                closed = True
                break
            continue
        hb, w = nxt
        if log_bridges:
            log.append((cur, w, hb))
        cur, h = w, hb
        if cur == v0 and h == z0:
            closed = True
            break
        if cur not in seen:
            seen.add(cur)
            order.append(cur)
    else:
        raise InvariantViolation(f"CRW from {start} did not close within {guard} events")
    return CrwRun(n, SpaceTimePoint(v0, z0), order, closed, tops, log, budget)


def t_k_realized(run: CrwRun, k: int) -> bool:
    """Whether the trace reached ``k`` vertices (``T_k < inf``)."""
    if k < 1:
        raise InvalidParameter("k must be >= 1")
    if run.trace_size >= k:
        return True
    if not run.closed:
        raise InvalidParameter(f"run stopped at budget {run.budget} < k={k}; T_k undetermined")
    return False


def line_profile(run: CrwRun, k: int) -> LineProfile:
    """Row and column counts of the first ``k`` discovered vertices."""
    if not 1 <= k <= run.trace_size:
        raise InvalidParameter(f"k={k} exceeds realized trace of size {run.trace_size}")
    n = run.n
    pts = np.asarray(run.discovery_order[:k])
    return LineProfile(np.bincount(pts // n, minlength=n), np.bincount(pts % n, minlength=n))


def row_hits(run: CrwRun, k: int, row: int = 0) -> int:
    """``|Z_k ∩ L_row|``, taking ``Z_k`` as the whole trace when ``T_k`` is infinite."""
    n = run.n
    return sum(1 for i in run.discovery_order[:k] if i // n == row)


def detect_L_jumps(run: CrwRun, B: BridgeSet) -> set[int]:
    """Positions ``l`` (0-based in ``discovery_order``) where an L-shaped jump starts.

    ``X_l, X_{l+1}`` share a row, ``X_{l+1}, X_{l+2}`` share a column, and both
    ``X_l`` and ``X_{l+1}`` carry exactly two bridges, exactly one of which goes
    to the next discovered vertex.
    """
    n = B.n
    xs = run.discovery_order
    found = set()
    for l in range(len(xs) - 2):
        a, b, c = xs[l], xs[l + 1], xs[l + 2]
        if a // n != b // n or b % n != c % n:
            continue
        if B.incident_count(a) != 2 or B.incident_count(b) != 2:
            continue
        if B.edge_multiplicity(a, b) == 1 and B.edge_multiplicity(b, c) == 1:
            found.add(l)
    return found


def binomial_ci(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Normal-approximation (Wald) interval, clipped to [0, 1]."""
    p = successes / trials
    half = z * math.sqrt(p * (1 - p) / trials)
    return max(0.0, p - half), min(1.0, p + half)


@dataclass(frozen=True)
class Estimate:
    p_hat: float
    ci95: tuple[float, float]
    successes: int
    trials: int


def estimate_t_k(n: int, t: float, k: int, replicas: int,
                 rng: np.random.Generator | Iterable[np.random.Generator]) -> Estimate:
    """Monte Carlo estimate of ``P(T_k < inf)`` from a uniform vertex at height 0.

    Each replica draws a fresh bridge configuration from its own child stream.
    """
    if replicas < 1:
        raise InvalidParameter("replicas must be >= 1")
    streams = rng.spawn(replicas) if isinstance(rng, np.random.Generator) else list(rng)
    hits = 0
    for g in streams:
        B = sample_bridges(n, t, g)
        v = int(g.integers(0, n * n))
        run = run_crw(B, SpaceTimePoint(v, 0.0), budget=k, log_bridges=False)
        hits += t_k_realized(run, k)
    return Estimate(hits / replicas, binomial_ci(hits, replicas), hits, replicas)


def dump_runs(runs: Iterable[CrwRun]) -> str:
    return "".join(r.to_json() + "\n" for r in runs)
