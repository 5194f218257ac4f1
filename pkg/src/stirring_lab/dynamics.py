"""The permutation sigma_t, its cycle decomposition and swap bookkeeping.

Composition convention: a swap across ``(v, w)`` acting on the current
permutation produces ``(v w) ∘ sigma``, i.e. the new transposition acts
after sigma.  Following bars upward from height 0 realises exactly this
left-to-right product of bridge transpositions in increasing height.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .bridges import BridgeSet
from .errors import InvalidParameter, InvariantViolation
from .lattice import VertexSet, index, neighbor_table


class Permutation:
    """Bijection of the ``n^2`` vertices, kept with its inverse as plain lists."""

    __slots__ = ("n", "image", "inverse")

    def __init__(self, n: int, image):
        self.n = n
        self.image = [int(i) for i in image]
        if len(self.image) != n * n:
            raise InvalidParameter("image table must have n^2 entries")
        inv = [-1] * (n * n)
        for x, y in enumerate(self.image):
            if not 0 <= y < n * n or inv[y] != -1:
                raise InvalidParameter("image table is not a bijection")
            inv[y] = x
        self.inverse = inv

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(n, range(n * n))

    def __call__(self, v: int) -> int:
        return self.image[v]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.n == other.n and self.image == other.image

    def __repr__(self) -> str:
        return f"Permutation(n={self.n}, moved={sum(i != x for i, x in enumerate(self.image))})"

    def copy(self) -> "Permutation":
        p = Permutation.__new__(Permutation)
        p.n, p.image, p.inverse = self.n, list(self.image), list(self.inverse)
        return p

    def as_array(self) -> np.ndarray:
        return np.asarray(self.image, dtype=np.int64)

    def transpose_left(self, v: int, w: int) -> None:
        """In place ``sigma <- (v w) ∘ sigma``."""
        inv = self.inverse
        a, b = inv[v], inv[w]
        self.image[a], self.image[b] = w, v
        inv[v], inv[w] = b, a

    def check(self) -> None:
        inv = self.inverse
        if any(inv[y] != x for x, y in enumerate(self.image)):
            raise InvariantViolation("permutation and inverse tables disagree")


class CycleIndex:
    """Cycle id per vertex and size per cycle id.

    Ids are recycled through a free list so they always fit in ``[0, n^2)``.
    """

    __slots__ = ("cycle_id", "sizes", "_free")

    def __init__(self, cycle_id: list[int], sizes: list[int]):
        self.cycle_id = cycle_id
        self.sizes = sizes
        self._free = [c for c in range(len(sizes) - 1, -1, -1) if sizes[c] == 0]

    @classmethod
    def of(cls, perm: Permutation) -> "CycleIndex":
        N = perm.n * perm.n
        image = perm.image
        cid = [-1] * N
        sizes = [0] * N
        c = 0
        for v in range(N):
            if cid[v] != -1:
                continue
            x, m = v, 0
            while cid[x] == -1:
                cid[x] = c
                x = image[x]
                m += 1
            sizes[c] = m
            c += 1
        return cls(cid, sizes)

    def copy(self) -> "CycleIndex":
        return CycleIndex(list(self.cycle_id), list(self.sizes))

    def size_of(self, v: int) -> int:
        return self.sizes[self.cycle_id[v]]

    def cycle_sizes(self) -> list[int]:
        """All cycle sizes in descending order."""
        return sorted((s for s in self.sizes if s), reverse=True)

    def vertex_sizes(self) -> np.ndarray:
        """Size of the cycle through each vertex."""
        return np.asarray(self.sizes, dtype=np.int64)[np.asarray(self.cycle_id)]

    def new_id(self) -> int:
        return self._free.pop()

    def release(self, c: int) -> None:
        self.sizes[c] = 0
        self._free.append(c)


class Kind(enum.Enum):
    MERGE = "merge"
    SPLIT = "split"


@dataclass(frozen=True)
class SwapOutcome:
    """``sizes`` is ``(size through v, size through w)`` for a split, ``(merged,)`` for a merge."""

    kind: Kind
    sizes: tuple[int, ...]
    before: tuple[int, ...]

    @property
    def smaller(self) -> int:
        return min(self.sizes)


def permutation_from_bridges(B: BridgeSet) -> Permutation:
    """sigma_t by following each bar upward from height 0, crossing every bridge met."""
    n, t = B.n, B.horizon
    tl = B.walker()
    succ = tl.successor
    image = [0] * (n * n)
    for v in range(n * n):
        cur, h = v, -1.0
        while True:
            nxt = succ(cur, h)
            if nxt is None:
                break
            h, cur = nxt
        image[v] = cur
    return Permutation(n, image)


def compose_transpositions(B: BridgeSet) -> Permutation:
    """sigma_t by applying the bridge transpositions left to right in height order."""
    perm = Permutation.identity(B.n)
    for a, b in zip(B.a.tolist(), B.b.tolist()):
        perm.transpose_left(a, b)
    return perm


def _relabel(perm: Permutation, idx: CycleIndex, start: int, c: int) -> None:
    image, cid = perm.image, idx.cycle_id
    x = start
    while cid[x] != c:
        cid[x] = c
        x = image[x]


def apply_swap(perm: Permutation, idx: CycleIndex, v: int, w: int) -> SwapOutcome:
    """Apply ``(v w) ∘ sigma`` in place and report whether a cycle merged or split."""
    if v == w:
        raise InvalidParameter("swap endpoints must differ")
    cid, sizes = idx.cycle_id, idx.sizes
    cv, cw = cid[v], cid[w]
    perm.transpose_left(v, w)
    image = perm.image
    if cv != cw:
        sv, sw = sizes[cv], sizes[cw]
        keep, drop, start = (cv, cw, w) if sv >= sw else (cw, cv, v)
        _relabel(perm, idx, start, keep)
        sizes[keep] = sv + sw
        idx.release(drop)
        return SwapOutcome(Kind.MERGE, (sv + sw,), (sv, sw))

    # walk both new cycles in lockstep; the first to close is the smaller piece
    total = sizes[cv]
    x, y, steps = image[v], image[w], 1
    while x != v and y != w:
        x, y = image[x], image[y]
        steps += 1
    c = idx.new_id()
    if x == v:
        sv, sw = steps, total - steps
        _relabel(perm, idx, v, c)
        sizes[c], sizes[cv] = sv, sw
    else:
        sv, sw = total - steps, steps
        _relabel(perm, idx, w, c)
        sizes[c], sizes[cv] = sw, sv
    return SwapOutcome(Kind.SPLIT, (sv, sw), (total,))


def orbit_prefix(perm: Permutation, v, k: int, forward: bool = True) -> VertexSet:
    """``{sigma^l(v) : l = 0..k}`` (or with sigma^{-1} when ``forward`` is false)."""
    if k < 0:
        raise InvalidParameter("k must be >= 0")
    n = perm.n
    v = v if isinstance(v, (int, np.integer)) else index(v, n)
    table = perm.image if forward else perm.inverse
    out = [v]
    x = table[v]
    for _ in range(k):
        if x == v:
            break
        out.append(x)
        x = table[x]
    return VertexSet.from_indices(n, out)


def orbit(perm: Permutation, v) -> VertexSet:
    return orbit_prefix(perm, v, perm.n * perm.n)


def long_cycle_vertices(idx: CycleIndex, k: int, n: int) -> VertexSet:
    """Vertices whose cycle has at least ``k`` elements."""
    if k < 1:
        raise InvalidParameter("k must be >= 1")
    return VertexSet(n, idx.vertex_sizes() >= k)


def long_cycle_mass(idx: CycleIndex, k: int) -> int:
    return sum(s for s in idx.sizes if s >= k)


def cycle_record(n: int, t: float, idx: CycleIndex) -> dict:
    return {"n": n, "t": t, "cycle_sizes": idx.cycle_sizes()}


def dump_cycle_record(n: int, t: float, idx: CycleIndex) -> str:
    return json.dumps(cycle_record(n, t, idx))


def cycle_positions(perm: Permutation, idx: CycleIndex) -> np.ndarray:
    """Position of each vertex along its cycle, counted from the cycle's first-visited vertex."""
    N = perm.n * perm.n
    image = perm.image
    pos = [-1] * N
    for v in range(N):
        if pos[v] != -1:
            continue
        x, j = v, 0
        while pos[x] == -1:
            pos[x] = j
            x = image[x]
            j += 1
    return np.asarray(pos, dtype=np.int64)


def max_prefix_iota(perm: Permutation, idx: CycleIndex, k: int) -> int:
    """``max_v iota(orb^k(v))`` over all start vertices at once."""
    if k < 0:
        raise InvalidParameter("k must be >= 0")
    n = perm.n
    N = n * n
    image = perm.as_array()
    sizes = idx.vertex_sizes()
    walk = np.empty((N, k + 1), dtype=np.int64)
    walk[:, 0] = np.arange(N)
    for j in range(1, k + 1):
        walk[:, j] = image[walk[:, j - 1]]
    valid = np.arange(k + 1)[None, :] < sizes[:, None]
    owner = np.broadcast_to(np.arange(N)[:, None], walk.shape)[valid]
    best = 0
    for line in (walk // n, walk % n):
        counts = np.bincount(owner * n + line[valid], minlength=N * n)
        best = max(best, int(counts.max()))
    return best


def split_to_small_probability(perm: Permutation, idx: CycleIndex, ell: int) -> float:
    """Exact probability that a uniform edge swap splits a cycle leaving a piece ``< ell``.

    If ``w = sigma^j(v)`` on a cycle of length ``L``, then ``(v w) ∘ sigma``
    splits it into pieces of sizes ``j`` and ``L - j``.
    """
    n = perm.n
    nb = neighbor_table(n)
    cid = np.asarray(idx.cycle_id)
    pos = cycle_positions(perm, idx)
    L = idx.vertex_sizes()[:, None]
    same = cid[nb] == cid[:, None]
    j = (pos[nb] - pos[:, None]) % L
    small = same & (np.minimum(j, L - j) < ell)
    # every unordered edge appears twice in the table
    return float(small.sum()) / 2 / (n * n * (n - 1))
