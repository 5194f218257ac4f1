import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cycles, sequential_swaps
from stirring_lab import lattice
from stirring_lab.bridges import BridgeSet, restrict, sample_bridges
from stirring_lab.dynamics import (
    CycleIndex,
    Kind,
    Permutation,
    apply_swap,
    compose_transpositions,
    cycle_record,
    long_cycle_vertices,
    max_prefix_iota,
    orbit,
    orbit_prefix,
    permutation_from_bridges,
    split_to_small_probability,
)
from stirring_lab.errors import InvalidParameter
from stirring_lab.lattice import VertexSet


def perm_from_cycles(n, cycle_list):
    image = list(range(n * n))
    for cyc in cycle_list:
        for i, v in enumerate(cyc):
            image[v] = cyc[(i + 1) % len(cyc)]
    return Permutation(n, image)


def test_no_bridges_gives_identity():
    assert permutation_from_bridges(BridgeSet.empty(4, 3.0)) == Permutation.identity(4)


def test_single_bridge_gives_transposition():
    B = BridgeSet.build(3, 2.0, [1], [7], [0.7])
    image = list(range(9))
    image[1], image[7] = 7, 1
    assert permutation_from_bridges(B) == Permutation(3, image)


def test_matches_sequential_swap_oracle(rng):
    for _ in range(60):
        n = int(rng.integers(2, 9))
        B = sample_bridges(n, float(rng.uniform(0, n * n)), rng)
        expected = sequential_swaps(n * n, zip(B.a.tolist(), B.b.tolist()))
        assert permutation_from_bridges(B).image == expected
        assert compose_transpositions(B).image == expected


def test_replay_reproduces_sigma_at_every_bridge_height(rng):
    for n in (3, 5, 8):
        B = sample_bridges(n, 1.5 * n * n, rng)
        perm = Permutation.identity(n)
        idx = CycleIndex.of(perm)
        for a, b, h in zip(B.a.tolist(), B.b.tolist(), B.heights.tolist()):
            apply_swap(perm, idx, a, b)
            assert perm == permutation_from_bridges(restrict(B, h))


def test_swap_on_identity_merges():
    perm = Permutation.identity(4)
    idx = CycleIndex.of(perm)
    out = apply_swap(perm, idx, 0, 3)
    assert out.kind is Kind.MERGE and out.sizes == (2,)


def test_swap_twice_splits_back():
    perm = Permutation.identity(4)
    idx = CycleIndex.of(perm)
    apply_swap(perm, idx, 5, 6)
    out = apply_swap(perm, idx, 5, 6)
    assert out.kind is Kind.SPLIT and sorted(out.sizes) == [1, 1]
    assert perm == Permutation.identity(4)


def test_swap_against_recomputation(rng):
    n = 6
    perm = Permutation(n, rng.permutation(n * n))
    idx = CycleIndex.of(perm)
    for _ in range(1000):
        a, b = lattice.sample_uniform_edges(n, 1, rng)
        v, w = int(a[0]), int(b[0])
        old = cycles(perm.image)
        cyc_of = {x: tuple(c) for c in old for x in c}
        out = apply_swap(perm, idx, v, w)
        new = cycles(perm.image)
        new_of = {x: c for c in new for x in c}
        if cyc_of[v] == cyc_of[w]:
            assert out.kind is Kind.SPLIT
            assert out.sizes == (len(new_of[v]), len(new_of[w]))
            assert sum(out.sizes) == len(cyc_of[v])
        else:
            assert out.kind is Kind.MERGE
            assert out.sizes == (len(cyc_of[v]) + len(cyc_of[w]),) == (len(new_of[v]),)
        assert Counter(idx.cycle_sizes()) == Counter(len(c) for c in new)
        for c in new:
            assert len({idx.cycle_id[x] for x in c}) == 1
    perm.check()
    assert sorted(perm.image) == list(range(n * n))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.randoms(use_true_random=False), st.integers(0, 80))
def test_swaps_preserve_bijection_and_partition(n, rnd, m):
    image = list(range(n * n))
    rnd.shuffle(image)
    perm = Permutation(n, image)
    idx = CycleIndex.of(perm)
    edges = lattice.all_edges(n)
    for _ in range(m):
        v, w = rnd.choice(edges)
        apply_swap(perm, idx, v, w)
    perm.check()
    assert sum(idx.cycle_sizes()) == n * n
    assert Counter(idx.cycle_sizes()) == Counter(len(c) for c in cycles(perm.image))


def test_orbit_prefix_examples():
    n = 3
    ident = Permutation.identity(n)
    assert orbit_prefix(ident, 4, 0) == VertexSet.from_indices(n, [4])
    assert orbit_prefix(ident, 4, 7) == VertexSet.from_indices(n, [4])
    order = [0, 4, 8, 2, 6, 1, 5, 3, 7]
    big = perm_from_cycles(n, [order])
    assert orbit_prefix(big, 0, 5) == VertexSet.from_indices(n, order[:6])
    assert orbit_prefix(big, 0, 5, forward=False) == VertexSet.from_indices(n, [0, 7, 3, 5, 1, 6])
    assert orbit(big, 2).size == 9
    with pytest.raises(InvalidParameter):
        orbit_prefix(big, 0, -1)


def test_orbit_prefix_iterates_image_table(rng):
    n = 5
    perm = perm_from_cycles(n, [list(rng.permutation(n * n))])
    v, x, expected = 3, 3, []
    for _ in range(6):
        expected.append(x)
        x = perm.image[x]
    assert orbit_prefix(perm, v, 5) == VertexSet.from_indices(n, expected)
    assert orbit_prefix(perm, v, 5).size == 6


def test_forward_and_backward_prefixes_cover_cycle(rng):
    n = 6
    perm = Permutation(n, rng.permutation(n * n))
    for c in cycles(perm.image):
        k = len(c) // 2
        both = orbit_prefix(perm, c[0], k) | orbit_prefix(perm, c[0], k, forward=False)
        assert both == VertexSet.from_indices(n, c)


def test_long_cycle_vertices():
    n = 3
    ident = CycleIndex.of(Permutation.identity(n))
    assert long_cycle_vertices(ident, 1, n) == VertexSet.full(n)
    assert long_cycle_vertices(ident, 2, n).size == 0
    perm = perm_from_cycles(n, [[0, 1, 2, 3], [4, 5, 6], [7, 8]])
    idx = CycleIndex.of(perm)
    assert long_cycle_vertices(idx, 3, n) == VertexSet.from_indices(n, range(7))
    with pytest.raises(InvalidParameter):
        long_cycle_vertices(idx, 0, n)


def test_cycle_record():
    perm = perm_from_cycles(3, [[0, 1, 2, 3], [4, 5, 6], [7, 8]])
    rec = cycle_record(3, 1.5, CycleIndex.of(perm))
    assert json.loads(json.dumps(rec)) == {"n": 3, "t": 1.5, "cycle_sizes": [4, 3, 2]}


def test_max_prefix_iota_against_direct(rng):
    for n in (3, 5, 8):
        perm = permutation_from_bridges(sample_bridges(n, 0.9 * n * n, rng))
        idx = CycleIndex.of(perm)
        for k in (0, 1, 3, 6):
            direct = max(lattice.iota(orbit_prefix(perm, v, k)) for v in range(n * n))
            assert max_prefix_iota(perm, idx, k) == direct


def test_split_probability_identity_is_zero():
    perm = Permutation.identity(5)
    assert split_to_small_probability(perm, CycleIndex.of(perm), 3) == 0.0


def exhaustive_split_probability(perm, ell):
    n = perm.n
    hits = 0
    for v, w in lattice.all_edges(n):
        p = perm.copy()
        out = apply_swap(p, CycleIndex.of(p), v, w)
        hits += out.kind is Kind.SPLIT and out.smaller < ell
    return hits / lattice.edge_count(n)


def test_split_probability_big_cycle_n4():
    n = 4
    perm = perm_from_cycles(n, [[0, 5, 10, 15, 1, 6, 11, 12, 2, 7, 8, 13, 3, 4, 9, 14]])
    exact = exhaustive_split_probability(perm, 2)
    # ell=2: a piece of size 1 arises iff w is the image or preimage of v
    assert exact == pytest.approx(sum(1 for v in range(16)
                                      if perm.image[v] in set(map(int, lattice.neighbors(v, n)))) / 48)
    assert split_to_small_probability(perm, CycleIndex.of(perm), 2) == exact


def test_split_probability_random_sigma(rng):
    for n in (3, 4, 5):
        perm = permutation_from_bridges(sample_bridges(n, n * n, rng))
        for ell in (1, 2, 4, 30):
            assert split_to_small_probability(perm, CycleIndex.of(perm), ell) == pytest.approx(
                exhaustive_split_probability(perm, ell))
