"""Poisson bridges on ``E x [0, t]`` and per-vertex bar timelines.

Each edge carries an independent Poisson process of rate ``1/|E|``, so the
whole configuration has ``Poisson(t)`` bridges at i.i.d. uniform heights on
uniform edges.  A :class:`BridgeSet` keeps the bridges sorted by height and a
CSR index (``offsets``) listing, for each vertex, the bridges touching its bar
in increasing height.
"""
from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import lattice
from .errors import InvalidParameter


@dataclass(frozen=True)
class Bridge:
    edge: lattice.Edge
    height: float


@dataclass(frozen=True, eq=False)
class BridgeSet:
    """Immutable bridge configuration on H(2, n) up to ``horizon``.

    ``a``, ``b`` and ``heights`` are parallel arrays sorted by height.  The
    timeline of vertex ``v`` is ``tl_heights[offsets[v]:offsets[v+1]]`` with the
    matching far endpoints in ``tl_neighbors``.
    """

    n: int
    horizon: float
    a: np.ndarray
    b: np.ndarray
    heights: np.ndarray
    offsets: np.ndarray = field(repr=False)
    tl_heights: np.ndarray = field(repr=False)
    tl_neighbors: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, n: int, horizon: float, a, b, heights) -> "BridgeSet":
        n = lattice.check_n(n)
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        heights = np.asarray(heights, dtype=float)
        if not (a.shape == b.shape == heights.shape):
            raise InvalidParameter("endpoint and height arrays differ in length")
        if heights.size:
            if heights.min() < 0 or heights.max() > horizon:
                raise InvalidParameter("bridge heights must lie in [0, horizon]")
            if np.unique(heights).size != heights.size:
                raise InvalidParameter("bridge heights must be pairwise distinct")
            same_row = (a // n) == (b // n)
            same_col = (a % n) == (b % n)
            if np.any(a == b) or not np.all(same_row | same_col):
                raise InvalidParameter("every bridge must sit on an edge of H(2, n)")
        order = np.argsort(heights, kind="stable")
        a, b, heights = a[order], b[order], heights[order]

        ends = np.concatenate([a, b])
        far = np.concatenate([b, a])
        hh = np.concatenate([heights, heights])
        order = np.lexsort((hh, ends))
        counts = np.bincount(ends, minlength=n * n)
        offsets = np.zeros(n * n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return cls(n, float(horizon), a, b, heights, offsets, hh[order], far[order])

    @classmethod
    def empty(cls, n: int, horizon: float = 0.0) -> "BridgeSet":
        z = np.zeros(0, dtype=np.int64)
        return cls.build(n, horizon, z, z, np.zeros(0))

    def __len__(self) -> int:
        return int(self.heights.size)

    def __iter__(self):
        n = self.n
        for a, b, h in zip(self.a.tolist(), self.b.tolist(), self.heights.tolist()):
            yield Bridge(lattice.Edge.of(lattice.vertex(a, n), lattice.vertex(b, n)), h)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BridgeSet):
            return NotImplemented
        return (
            self.n == other.n
            and self.horizon == other.horizon
            and np.array_equal(self.heights, other.heights)
            and np.array_equal(np.minimum(self.a, self.b), np.minimum(other.a, other.b))
            and np.array_equal(np.maximum(self.a, self.b), np.maximum(other.a, other.b))
        )

    def timeline(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.offsets[v], self.offsets[v + 1]
        return self.tl_heights[lo:hi], self.tl_neighbors[lo:hi]

    def incident_count(self, v: int) -> int:
        """``|B(v, V)|``: bridges touching the bar of ``v``."""
        return int(self.offsets[v + 1] - self.offsets[v])

    def edge_multiplicity(self, v: int, w: int) -> int:
        """``|B(v, w)|``: bridges on the edge ``{v, w}``."""
        _, nb = self.timeline(v)
        return int(np.count_nonzero(nb == w))

    def walker(self) -> "Timelines":
        return Timelines(self)


class Timelines:
    """Plain-list view of a :class:`BridgeSet` for fast successor queries in loops."""

    __slots__ = ("offsets", "heights", "neighbors")

    def __init__(self, bridges: BridgeSet):
        self.offsets = bridges.offsets.tolist()
        self.heights = bridges.tl_heights.tolist()
        self.neighbors = bridges.tl_neighbors.tolist()

    def successor(self, v: int, z: float):
        """Lowest bridge on the bar of ``v`` strictly above ``z`` as ``(height, neighbour)``."""
        hi = self.offsets[v + 1]
        i = bisect_right(self.heights, z, self.offsets[v], hi)
        if i == hi:
            return None
        return self.heights[i], self.neighbors[i]


def successor(B: BridgeSet, v, z: float):
    """Lowest bridge on ``v``'s timeline with height strictly above ``z``, or ``None``."""
    if not 0 <= z <= B.horizon:
        raise InvalidParameter(f"z={z} outside [0, {B.horizon}]")
    i = v if isinstance(v, (int, np.integer)) else lattice.index(v, B.n)
    hs, nb = B.timeline(int(i))
    j = int(np.searchsorted(hs, z, side="right"))
    if j == hs.size:
        return None
    return float(hs[j]), lattice.vertex(int(nb[j]), B.n)


def _fresh_heights(lo: float, hi: float, count: int, taken: np.ndarray,
                   rng: np.random.Generator) -> np.ndarray:
    """``count`` uniform heights in ``(lo, hi]`` distinct from each other and ``taken``."""
    h = hi - rng.uniform(0.0, hi - lo, size=count)
    while True:
        # collisions are a floating point artefact; redraw only the offending entries
        _, first, inverse, counts = np.unique(h, return_index=True, return_inverse=True,
                                              return_counts=True)
        dup = counts[inverse.reshape(-1)] > 1
        dup[first[counts > 1]] = False
        dup |= np.isin(h, taken) | (h <= lo)
        if not dup.any():
            return h
        h[dup] = hi - rng.uniform(0.0, hi - lo, size=int(dup.sum()))


def sample_bridges(n: int, t: float, rng: np.random.Generator) -> BridgeSet:
    """Poisson bridge configuration on ``E x [0, t]`` with intensity ``|E|^{-1} # ⊗ Leb``."""
    n = lattice.check_n(n)
    if t < 0:
        raise InvalidParameter(f"t must be >= 0, got {t}")
    count = int(rng.poisson(t))
    a, b = lattice.sample_uniform_edges(n, count, rng)
    heights = _fresh_heights(0.0, float(t), count, np.zeros(0), rng)
    return BridgeSet.build(n, t, a, b, heights)


def restrict(B: BridgeSet, s: float) -> BridgeSet:
    """Bridges of height ``<= s``, with horizon ``s``."""
    if not 0 <= s <= B.horizon:
        raise InvalidParameter(f"s={s} outside [0, {B.horizon}]")
    if s == B.horizon:
        return B
    m = int(np.searchsorted(B.heights, s, side="right"))
    return BridgeSet.build(B.n, s, B.a[:m], B.b[:m], B.heights[:m])


def extend(B: BridgeSet, t_new: float, rng: np.random.Generator) -> BridgeSet:
    """Add independent Poisson bridges on ``(horizon, t_new]``; the old ones are kept."""
    if t_new < B.horizon:
        raise InvalidParameter(f"t_new={t_new} below horizon {B.horizon}")
    if t_new == B.horizon:
        return B
    count = int(rng.poisson(t_new - B.horizon))
    a, b = lattice.sample_uniform_edges(B.n, count, rng)
    heights = _fresh_heights(B.horizon, float(t_new), count, B.heights, rng)
    return BridgeSet.build(B.n, t_new,
                           np.concatenate([B.a, a]), np.concatenate([B.b, b]),
                           np.concatenate([B.heights, heights]))


def to_records(B: BridgeSet) -> list[dict]:
    """Dump as ``{x1, y1, x2, y2, height}`` records in ascending height."""
    n = B.n
    return [
        {"x1": a % n, "y1": a // n, "x2": b % n, "y2": b // n, "height": h}
        for a, b, h in zip(B.a.tolist(), B.b.tolist(), B.heights.tolist())
    ]


def from_records(n: int, horizon: float, records: list[dict]) -> BridgeSet:
    a = [r["x1"] + n * r["y1"] for r in records]
    b = [r["x2"] + n * r["y2"] for r in records]
    return BridgeSet.build(n, horizon, a, b, [r["height"] for r in records])


def dump(B: BridgeSet, path: str | Path) -> None:
    doc = {"n": B.n, "horizon": B.horizon, "bridges": to_records(B)}
    Path(path).write_text(json.dumps(doc))


def load(path: str | Path) -> BridgeSet:
    doc = json.loads(Path(path).read_text())
    return from_records(doc["n"], doc["horizon"], doc["bridges"])
