"""Random graph process G^t_s coupled to the interchange process.

G^t_0 has the cycles of sigma_t as components; every later swap across an edge
adds that edge.  Only the vertex partition matters, so the graph is a
union-find (union by size, path halving) and never stores edges.  Since
components only coarsen while cycles may split, every cycle of sigma_{t+s}
stays inside one component of G^t_s.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .bridges import BridgeSet, restrict
from .dynamics import CycleIndex, Kind, Permutation, apply_swap, permutation_from_bridges
from .errors import InvalidParameter, InvariantViolation

EVENT_GRID_MAX_N = 64
FIXED_GRID_POINTS = 512


class GraphProcess:
    def __init__(self, n: int, t: float, parent: list[int], size: list[int]):
        self.n = n
        self.base = t
        self.elapsed = 0.0
        self.parent = parent
        self.size = size
        self.fragmentations: list[tuple[float, tuple[int, int]]] = []

    @property
    def now(self) -> float:
        return self.base + self.elapsed

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> int:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return rx
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        self.size[ry] = 0
        return rx

    def roots(self) -> np.ndarray:
        """Root of every vertex, by vectorised pointer jumping (leaves the tables as is)."""
        p = np.asarray(self.parent, dtype=np.int64)
        while True:
            q = p[p]
            if np.array_equal(q, p):
                return p
            p = q

    def component_sizes(self) -> list[int]:
        return sorted((s for s in self.size if s), reverse=True)

    def largest(self) -> int:
        return max(self.size)

    def advance(self, perm: Permutation, idx: CycleIndex, v: int, w: int, u: float,
                ell_threshold: int):
        """Swap across ``(v, w)`` at time ``u``: merge components, update sigma, log small splits."""
        if u < self.now:
            raise InvalidParameter(f"time {u} precedes current time {self.now}")
        self.elapsed = u - self.base
        self.union(v, w)
        out = apply_swap(perm, idx, v, w)
        if out.kind is Kind.SPLIT and out.smaller < ell_threshold:
            self.fragmentations.append((u, out.sizes))
        return out


def init_graph_process(idx: CycleIndex, n: int, t: float) -> GraphProcess:
    """One union-find component per cycle of sigma_t, rooted at the cycle id's first vertex."""
    N = n * n
    root_of: dict[int, int] = {}
    parent = [0] * N
    size = [0] * N
    for v, c in enumerate(idx.cycle_id):
        r = root_of.setdefault(c, v)
        parent[v] = r
        size[r] += 1
    return GraphProcess(n, t, parent, size)


def component_mass(G: GraphProcess, ell: int) -> int:
    """Number of vertices in components of size ``>= ell``."""
    if ell < 1:
        raise InvalidParameter("ell must be >= 1")
    return sum(s for s in G.size if s >= ell)


@dataclass(frozen=True)
class Snapshot:
    u: float
    mass_sigma: int
    mass_graph: int
    discrepancy: int
    frag_count: int
    largest_sigma: int
    largest_graph: int


@dataclass
class CoupledSeries:
    n: int
    t: float
    delta: float
    ell: int
    k: int
    samples: list[Snapshot] = field(default_factory=list)
    fragmentations: list[tuple[float, tuple[int, int]]] = field(default_factory=list)

    @property
    def sup_discrepancy(self) -> int:
        return max(s.discrepancy for s in self.samples)

    def discrepancy_bound(self) -> float:
        """Explicit bound ``4 ell^2 Delta log^2 n / (k n)`` on the mean sup discrepancy."""
        n = self.n
        return 4 * self.ell ** 2 * self.delta * math.log(n) ** 2 / (self.k * n)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u", "mass_sigma", "mass_graph", "discrepancy", "frag_count"])
        for s in self.samples:
            w.writerow([repr(s.u), s.mass_sigma, s.mass_graph, s.discrepancy, s.frag_count])
        return buf.getvalue()


def snapshot(G: GraphProcess, perm: Permutation, idx: CycleIndex, ell: int) -> Snapshot:
    """Masses of both sides at threshold ``ell``, after checking cycle containment exactly."""
    roots = G.roots()
    image = np.asarray(perm.image, dtype=np.int64)
    if not np.array_equal(roots, roots[image]):
        raise InvariantViolation(f"a cycle of sigma left its component at u={G.now}")
    comp_size = np.asarray(G.size, dtype=np.int64)[roots]
    cyc_size = idx.vertex_sizes()
    in_graph = comp_size >= ell
    in_sigma = cyc_size >= ell
    if np.any(in_sigma & ~in_graph):
        raise InvariantViolation(f"V_u(ell) not contained in V^G(ell) at u={G.now}")
    return Snapshot(G.now, int(in_sigma.sum()), int(in_graph.sum()),
                    int(np.count_nonzero(in_graph & ~in_sigma)), len(G.fragmentations),
                    int(cyc_size.max()), int(comp_size.max()))


def default_grid(n: int, t: float, delta: float, B: BridgeSet | None = None) -> np.ndarray | None:
    """``None`` (sample at every event) for ``n <= 64``, else 512 evenly spaced times."""
    if n <= EVENT_GRID_MAX_N:
        return None
    return np.linspace(t, t + delta, FIXED_GRID_POINTS)


def run_coupled(B: BridgeSet, t: float, delta: float, ell: int, k: int | None = None,
                grid=None, sigma: tuple[Permutation, CycleIndex] | None = None) -> CoupledSeries:
    """Couple sigma_{t+s} and G^t_s over ``s in [0, delta]`` using the bridges of ``B``.

    ``grid=None`` samples at ``t`` and right after every swap in ``(t, t+delta]``;
    otherwise at each grid time (after every swap at or below it).  ``B`` must
    reach ``t + delta``.
    """
    if delta < 0 or t < 0:
        raise InvalidParameter("t and delta must be >= 0")
    if B.horizon < t + delta:
        raise InvalidParameter(f"bridges reach {B.horizon} < t + delta = {t + delta}")
    n = B.n
    k = ell if k is None else k
    if sigma is None:
        perm = permutation_from_bridges(restrict(B, t))
        idx = CycleIndex.of(perm)
    else:
        perm, idx = sigma
    G = init_graph_process(idx, n, t)
    series = CoupledSeries(n, t, delta, ell, k)

    lo = int(np.searchsorted(B.heights, t, side="right"))
    hi = int(np.searchsorted(B.heights, t + delta, side="right"))
    a, b, h = B.a[lo:hi].tolist(), B.b[lo:hi].tolist(), B.heights[lo:hi].tolist()

    if grid is None:
        series.samples.append(snapshot(G, perm, idx, ell))
        for v, w, u in zip(a, b, h):
            G.advance(perm, idx, v, w, u, ell)
            series.samples.append(snapshot(G, perm, idx, ell))
    else:
        grid = np.asarray(grid, dtype=float)
        if grid.size and (grid.min() < t or grid.max() > t + delta or np.any(np.diff(grid) < 0)):
            raise InvalidParameter("grid must be non-decreasing inside [t, t + delta]")
        j = 0
        for g in grid.tolist():
            while j < len(h) and h[j] <= g:
                G.advance(perm, idx, a[j], b[j], h[j], ell)
                j += 1
            G.elapsed = g - t
            series.samples.append(snapshot(G, perm, idx, ell))
    series.fragmentations = list(G.fragmentations)
    return series


def sprinkling_time(series: CoupledSeries, delta_frac: float) -> float | None:
    """First sampled ``s`` where components of size ``>= delta n^2 / 8`` hold ``>= delta n^2 / 8`` vertices.

    That mass is positive only if some component reaches the threshold, and is
    then at least the threshold, so the test reduces to the largest component.
    """
    thr = delta_frac * series.n ** 2 / 8
    for s in series.samples:
        if s.largest_graph >= thr:
            return s.u - series.t
    return None
