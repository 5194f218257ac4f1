"""Exact-identity checks that must hold for every seed; any violation is a defect."""
from __future__ import annotations

from collections import Counter

import numpy as np

from .. import lattice
from ..bridges import sample_bridges
from ..coupling import run_coupled
from ..crw import SpaceTimePoint, run_crw
from ..dynamics import (
    CycleIndex,
    Kind,
    apply_swap,
    compose_transpositions,
    orbit,
    permutation_from_bridges,
)


def random_set(n: int, rng: np.random.Generator, max_size: int | None = None) -> lattice.VertexSet:
    N = n * n
    size = int(rng.integers(0, (max_size or N) + 1))
    return lattice.VertexSet.from_indices(n, rng.choice(N, size=min(size, N), replace=False))


def combinatorial_violations(n: int, A: lattice.VertexSet, B: lattice.VertexSet) -> list[str]:
    bad = []
    total = sum((lattice.translate(v, A) & B).size for v in lattice.VertexSet.full(n))
    if total != A.size * B.size:
        bad.append("translation sum over V")
    row0 = sum((lattice.translate(v, A) & B).size for v in lattice.VertexSet.row(n, 0))
    if row0 != int(np.dot(A.row_counts(), B.row_counts())):
        bad.append("translation sum over L_0")
    if lattice.edges_between(A, A) > A.size * lattice.iota(A):
        bad.append("|E(A,A)| <= |A| iota(A)")
    if lattice.iota(A | B) > lattice.iota(A) + lattice.iota(B):
        bad.append("iota subadditivity")
    return bad


def oracle_violations(n: int, t: float, rng: np.random.Generator) -> list[str]:
    B = sample_bridges(n, t, rng)
    perm = permutation_from_bridges(B)
    bad = []
    if perm != compose_transpositions(B):
        bad.append("bar following vs transposition product")
    tl = B.walker()
    for v in range(n * n):
        run = run_crw(B, SpaceTimePoint(v, 0.0), log_bridges=False, timelines=tl)
        if not run.closed or lattice.VertexSet.from_indices(n, run.top_crossings) != orbit(perm, v):
            bad.append(f"CRW top crossings vs orbit at v={v}")
            break
    return bad


def swap_violations(n: int, swaps: int, rng: np.random.Generator) -> list[str]:
    perm = permutation_from_bridges(sample_bridges(n, n * n, rng))
    idx = CycleIndex.of(perm)
    for _ in range(swaps):
        a, b = lattice.sample_uniform_edges(n, 1, rng)
        before = CycleIndex.of(perm)
        out = apply_swap(perm, idx, int(a[0]), int(b[0]))
        fresh = CycleIndex.of(perm)
        same = before.cycle_id[int(a[0])] == before.cycle_id[int(b[0])]
        if (out.kind is Kind.SPLIT) != same:
            return ["swap classification"]
        if Counter(idx.cycle_sizes()) != Counter(fresh.cycle_sizes()):
            return ["incremental cycle sizes"]
    return []


def coupling_violations(n: int, beta: float, rng: np.random.Generator) -> list[str]:
    t = beta * n * n
    B = sample_bridges(n, t + n * np.log(n), rng)
    try:
        run_coupled(B, t, n * np.log(n), n)
    except Exception as exc:  # InvariantViolation is the expected failure mode
        return [f"coupling: {exc}"]
    return []


def run_selftest(seed: int, rounds: int = 20) -> dict:
    rng = np.random.default_rng(seed)
    checks: dict[str, list[str]] = {"combinatorial": [], "oracle": [], "swap": [], "coupling": []}
    for _ in range(rounds):
        n = int(rng.integers(3, 9))
        checks["combinatorial"] += combinatorial_violations(n, random_set(n, rng), random_set(n, rng))
        checks["oracle"] += oracle_violations(n, float(rng.uniform(0, n * n)), rng)
        checks["swap"] += swap_violations(n, 50, rng)
        checks["coupling"] += coupling_violations(n, 0.8, rng)
    return {name: {"violations": len(v), "details": v[:5]} for name, v in checks.items()}
