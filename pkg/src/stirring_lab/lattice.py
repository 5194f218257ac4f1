"""Geometry of the Hamming graph H(2, n).

Vertices are points ``(x, y)`` of ``{0..n-1}^2`` and are linearized as
``x + n*y`` wherever arrays are indexed by vertex.  Row ``L_i`` is the set
``{(x, i)}`` and column ``D_i`` is ``{(i, y)}``.  Two distinct vertices are
adjacent iff they share a row or a column.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import InvalidParameter


class Vertex(NamedTuple):
    x: int
    y: int


class Edge(NamedTuple):
    """Unordered edge; endpoints stored in linear-index order."""

    a: Vertex
    b: Vertex

    @classmethod
    def of(cls, u: Vertex, v: Vertex) -> "Edge":
        if u == v:
            raise InvalidParameter(f"loop at {u} is not an edge")
        if u.x != v.x and u.y != v.y:
            raise InvalidParameter(f"{u} and {v} share neither row nor column")
        return cls(u, v) if (u.y, u.x) < (v.y, v.x) else cls(v, u)


def check_n(n: int) -> int:
    if int(n) != n or n < 2:
        raise InvalidParameter(f"n must be an integer >= 2, got {n!r}")
    return int(n)


def vertex_count(n: int) -> int:
    return check_n(n) ** 2


def edge_count(n: int) -> int:
    n = check_n(n)
    return n * n * (n - 1)


def index(v: Vertex, n: int) -> int:
    return v[0] % n + n * (v[1] % n)


def vertex(i: int, n: int) -> Vertex:
    return Vertex(int(i) % n, int(i) // n)


def degree(n: int) -> int:
    return 2 * (n - 1)


def neighbors(i: int, n: int) -> np.ndarray:
    """Linear indices of the ``2(n-1)`` neighbours of vertex ``i``, row first."""
    x, y = i % n, i // n
    others = np.arange(n)
    others = others[others != x]
    row = others + n * y
    others = np.arange(n)
    others = others[others != y]
    col = x + n * others
    return np.concatenate([row, col])


@lru_cache(maxsize=8)
def neighbor_table(n: int) -> np.ndarray:
    """``(n^2, 2(n-1))`` table whose row ``i`` is :func:`neighbors` of ``i``."""
    n = check_n(n)
    i = np.arange(n * n)[:, None]
    x, y = i % n, i // n
    shift = np.arange(1, n)[None, :]
    # sort each half so the order matches neighbors()
    row = np.sort((x + shift) % n, axis=1) + n * y
    col = x + n * np.sort((y + shift) % n, axis=1)
    table = np.concatenate([row, col], axis=1)
    table.flags.writeable = False
    return table


def all_edges(n: int) -> list[tuple[int, int]]:
    """Every edge once, as linear-index pairs ``(i, j)`` with ``i < j``."""
    n = check_n(n)
    out = []
    for i in range(n * n):
        for j in neighbors(i, n):
            if i < j:
                out.append((i, int(j)))
    return out


class VertexSet:
    """Subset of ``{0..n-1}^2`` stored as a dense boolean mask of length ``n^2``."""

    __slots__ = ("n", "mask")

    def __init__(self, n: int, mask: np.ndarray | None = None):
        self.n = check_n(n)
        if mask is None:
            mask = np.zeros(self.n * self.n, dtype=bool)
        else:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != (self.n * self.n,):
                raise InvalidParameter("mask must have length n^2")
        self.mask = mask

    @classmethod
    def from_indices(cls, n: int, indices: Iterable[int]) -> "VertexSet":
        s = cls(n)
        idx = np.fromiter((int(i) for i in indices), dtype=np.int64)
        s.mask[idx] = True
        return s

    @classmethod
    def from_points(cls, n: int, points: Iterable[tuple[int, int]]) -> "VertexSet":
        return cls.from_indices(n, (index(p, n) for p in points))

    @classmethod
    def row(cls, n: int, i: int) -> "VertexSet":
        s = cls(n)
        s.mask.reshape(n, n)[i, :] = True
        return s

    @classmethod
    def column(cls, n: int, i: int) -> "VertexSet":
        s = cls(n)
        s.mask.reshape(n, n)[:, i] = True
        return s

    @classmethod
    def full(cls, n: int) -> "VertexSet":
        return cls(n, np.ones(n * n, dtype=bool))

    @property
    def size(self) -> int:
        return int(self.mask.sum())

    def __len__(self) -> int:
        return self.size

    def __contains__(self, v) -> bool:
        i = v if isinstance(v, (int, np.integer)) else index(v, self.n)
        return bool(self.mask[i])

    def __iter__(self) -> Iterator[Vertex]:
        for i in np.flatnonzero(self.mask):
            yield vertex(i, self.n)

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def grid(self) -> np.ndarray:
        """Mask as an ``(n, n)`` array indexed ``[y, x]``."""
        return self.mask.reshape(self.n, self.n)

    def row_counts(self) -> np.ndarray:
        """``|A ∩ L_i|`` for each row ``i``."""
        return self.grid().sum(axis=1)

    def column_counts(self) -> np.ndarray:
        """``|A ∩ D_i|`` for each column ``i``."""
        return self.grid().sum(axis=0)

    def _same_n(self, other: "VertexSet") -> None:
        if other.n != self.n:
            raise InvalidParameter("vertex sets live on different lattices")

    def __or__(self, other: "VertexSet") -> "VertexSet":
        self._same_n(other)
        return VertexSet(self.n, self.mask | other.mask)

    def __and__(self, other: "VertexSet") -> "VertexSet":
        self._same_n(other)
        return VertexSet(self.n, self.mask & other.mask)

    def __sub__(self, other: "VertexSet") -> "VertexSet":
        self._same_n(other)
        return VertexSet(self.n, self.mask & ~other.mask)

    def __le__(self, other: "VertexSet") -> bool:
        self._same_n(other)
        return not bool(np.any(self.mask & ~other.mask))

    def __eq__(self, other) -> bool:
        if not isinstance(other, VertexSet):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.mask, other.mask))

    def __hash__(self):
        return hash((self.n, self.mask.tobytes()))

    def __repr__(self) -> str:
        pts = ", ".join(f"({v.x},{v.y})" for v in list(self)[:8])
        more = ", ..." if self.size > 8 else ""
        return f"VertexSet(n={self.n}, size={self.size}, {{{pts}{more}}})"


def iota(A: VertexSet) -> int:
    """Largest number of points of ``A`` on a single row or column (0 for empty A)."""
    g = A.grid()
    return int(max(g.sum(axis=1).max(), g.sum(axis=0).max()))


def _line_edges(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> int:
    # per line: ordered pairs (a*b - c) minus unordered pairs inside A∩B counted twice
    return int(np.sum(a * b - c - c * (c - 1) // 2))


def edges_between(A: VertexSet, B: VertexSet) -> int:
    """``|E(A, B)|``: edges with one endpoint in A and the other in B, each counted once."""
    A._same_n(B)
    ga = A.grid().astype(np.int64)
    gb = B.grid().astype(np.int64)
    gc = ga & gb
    rows = _line_edges(ga.sum(axis=1), gb.sum(axis=1), gc.sum(axis=1))
    cols = _line_edges(ga.sum(axis=0), gb.sum(axis=0), gc.sum(axis=0))
    return rows + cols


def translate(v: Vertex, A: VertexSet) -> VertexSet:
    """``v + A`` with component-wise addition modulo n (a bijection of V)."""
    n = A.n
    g = np.roll(A.grid(), shift=(v[1] % n, v[0] % n), axis=(0, 1))
    return VertexSet(n, g.reshape(-1).copy())


def sample_uniform_edges(n: int, size: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``size`` independent uniform edges as arrays of linear endpoint indices.

    A uniform vertex, a uniform axis and a uniform other coordinate on that axis
    hit each unordered edge with probability ``2 / (n^2 * 2(n-1)) = 1/|E|``.
    """
    n = check_n(n)
    u = rng.integers(0, n * n, size=size)
    horizontal = rng.integers(0, 2, size=size).astype(bool)
    shift = rng.integers(1, n, size=size)
    x, y = u % n, u // n
    x2 = np.where(horizontal, (x + shift) % n, x)
    y2 = np.where(horizontal, y, (y + shift) % n)
    return u, x2 + n * y2


def sample_uniform_edge(n: int, rng: np.random.Generator) -> Edge:
    u, w = sample_uniform_edges(n, 1, rng)
    return Edge.of(vertex(u[0], n), vertex(w[0], n))
