"""Experiment drivers.

Every replica draws from its own stream ``SeedSequence(seed, spawn_key=(group, r))``
so per-replica statistics do not depend on how replicas are spread over
workers.  Replica functions are module level so a process pool can pickle them.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

import numpy as np

from .. import __version__
from ..bridges import extend, sample_bridges
from ..coupling import default_grid, run_coupled, sprinkling_time
from ..crw import SpaceTimePoint, dump_runs, row_hits, run_crw
from ..dynamics import (
    CycleIndex,
    long_cycle_mass,
    max_prefix_iota,
    permutation_from_bridges,
    split_to_small_probability,
)
from ..errors import InvalidParameter
from .config import ExperimentConfig
from .records import RunRecord, mean_ci, proportion_ci


def replica_rng(seed: int, group: int, r: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(group, r)))


def ceil_power(n: int, exponent: float) -> int:
    return math.ceil(n ** exponent - 1e-9)


def default_k(n: int) -> int:
    """``ceil(n / log n)``."""
    return math.ceil(n / math.log(n))


def _sigma(n: int, t: float, rng):
    perm = permutation_from_bridges(sample_bridges(n, t, rng))
    return perm, CycleIndex.of(perm)


def _map(fn: Callable, tasks: list, threads: int) -> list:
    if threads <= 1 or len(tasks) < 2:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


# --- replica functions: one task tuple in, one flat dict of statistics out ---

def phase_replica(task) -> dict:
    n, beta, threshold, seed, group, r = task
    perm, idx = _sigma(n, beta * n * n, replica_rng(seed, group, r))
    sizes = idx.cycle_sizes()
    return {"beta": beta, "replica": r,
            "long_fraction": long_cycle_mass(idx, threshold) / (n * n),
            "max_cycle": sizes[0], "cycles": len(sizes)}


def line_tail_replica(task) -> dict:
    n, t, k, seed, r = task
    rng = replica_rng(seed, 0, r)
    B = sample_bridges(n, t, rng)
    v = int(rng.integers(0, n * n))
    run = run_crw(B, SpaceTimePoint(v, 0.0), budget=k, log_bridges=False)
    return {"replica": r, "start": v, "realized": run.trace_size >= k,
            "hits": row_hits(run, k, 0)}


def iota_replica(task) -> dict:
    n, t, k, seed, r = task
    perm, idx = _sigma(n, t, replica_rng(seed, 0, r))
    return {"replica": r, "max_iota": max_prefix_iota(perm, idx, k)}


def split_replica(task) -> dict:
    n, t, k, ell, seed, r = task
    perm, idx = _sigma(n, t, replica_rng(seed, 0, r))
    m = max_prefix_iota(perm, idx, k)
    return {"replica": r, "max_iota": m,
            "good_iota": m <= math.log(n) ** 2,
            "split_prob": split_to_small_probability(perm, idx, ell)}


def containment_replica(task) -> dict:
    n, t, threshold, grid_policy, seed, r = task
    B = sample_bridges(n, t, replica_rng(seed, 0, r))
    series = run_coupled(B, 0.0, t, threshold, grid=_grid(grid_policy, n, 0.0, t))
    last = series.samples[-1]
    return {"replica": r, "largest_sigma": last.largest_sigma,
            "largest_graph": last.largest_graph, "mass_sigma": last.mass_sigma,
            "mass_graph": last.mass_graph, "sup_discrepancy": series.sup_discrepancy,
            "samples": len(series.samples)}


def coupling_replica(task) -> dict:
    n, t, delta, ell, k, delta_frac, grid_policy, seed, r = task
    rng = replica_rng(seed, 0, r)
    B = extend(sample_bridges(n, t, rng), t + delta, rng)
    series = run_coupled(B, t, delta, ell, k, grid=_grid(grid_policy, n, t, delta))
    first = series.samples[0]
    return {"replica": r, "sup_discrepancy": series.sup_discrepancy,
            "fragmentations": len(series.fragmentations),
            "mass_sigma_0": first.mass_sigma, "mass_graph_0": first.mass_graph,
            "largest_graph_end": series.samples[-1].largest_graph,
            "sprinkling_time": sprinkling_time(series, delta_frac) if delta_frac else None}


def _grid(policy: str, n: int, t: float, delta: float):
    if policy == "event":
        return None
    if policy == "fixed":
        return np.linspace(t, t + delta, 512)
    return default_grid(n, t, delta)


# --- experiments ---

def _record(cfg: ExperimentConfig, rows: list[dict], aggregate: dict, started: float,
            warnings: list[str] | None = None) -> RunRecord:
    return RunRecord(cfg.experiment, cfg.echo(), rows, aggregate, cfg.seed, __version__,
                     warnings or [],
                     {"wall_clock_s": time.perf_counter() - started, "threads": cfg.threads})


def phase_sweep(cfg: ExperimentConfig) -> RunRecord:
    """Long-cycle fraction ``|V_t(ceil(n^{3/2}))| / n^2`` and max cycle for each beta."""
    started = time.perf_counter()
    n = cfg.n
    threshold = cfg.ell or ceil_power(n, 1.5)
    tasks = [(n, b, threshold, cfg.seed, g, r)
             for g, b in enumerate(cfg.beta) for r in range(cfg.replicas)]
    rows = _map(phase_replica, tasks, cfg.threads)
    agg = {"threshold": threshold, "per_beta": []}
    for b in cfg.beta:
        sub = [row for row in rows if row["beta"] == b]
        agg["per_beta"].append({
            "beta": b,
            "long_fraction": mean_ci([x["long_fraction"] for x in sub]),
            "max_cycle": mean_ci([x["max_cycle"] for x in sub]),
            "median_max_cycle": float(np.median([x["max_cycle"] for x in sub])),
        })
    return _record(cfg, rows, agg, started)


def survival_table(hits: list[int], m_max: int) -> list[dict]:
    h = np.asarray(hits)
    R = h.size
    return [{"M": M, **proportion_ci(int(np.count_nonzero(h >= M)), R)} for M in range(1, m_max + 1)]


def fit_two_step_ratio(table: list[dict], min_survival: float) -> dict:
    """Smallest single ``r`` with ``S(M+2) <= r S(M)`` over every ``M`` with ``S(M) >= min_survival``.

    Also reports the least-squares slope of ``log S(M)`` against ``M`` on the same range.
    """
    S = {row["M"]: row["p"] for row in table}
    usable = [M for M in sorted(S) if S[M] >= min_survival and M + 2 in S]
    ratios = {M: S[M + 2] / S[M] for M in usable}
    r = max(ratios.values()) if ratios else None
    pos = [M for M in sorted(S) if S[M] >= min_survival]
    slope = None
    if len(pos) >= 2:
        slope = float(np.polyfit(pos, np.log([S[M] for M in pos]), 1)[0])
    return {"r": r, "ratios": {str(M): v for M, v in ratios.items()}, "M_range": usable,
            "log_slope": slope}


def line_tail(cfg: ExperimentConfig, min_count: int = 100) -> RunRecord:
    """Survival function of ``|Z_k ∩ L_0|`` for CRWs from a uniform vertex at height 0."""
    started = time.perf_counter()
    n, beta = cfg.n, cfg.beta[0]
    k = cfg.k if cfg.k is not None else n // 2
    if k < 1:
        raise InvalidParameter("k must be >= 1")
    warnings = [] if k <= n / 2 else [f"k={k} > n/2: outside the line-tail hypothesis"]
    m_max = cfg.M if cfg.M is not None else k
    tasks = [(n, beta * n * n, k, cfg.seed, r) for r in range(cfg.replicas)]
    rows = _map(line_tail_replica, tasks, cfg.threads)
    table = survival_table([x["hits"] for x in rows], m_max)
    agg = {"k": k, "t": beta * n * n,
           "p_T_k": proportion_ci(sum(x["realized"] for x in rows), len(rows)),
           "survival": table,
           "fit": fit_two_step_ratio(table, min_count / cfg.replicas)}
    return _record(cfg, rows, agg, started, warnings)


def iota_orbit(cfg: ExperimentConfig) -> RunRecord:
    """``max_v iota(orb^k_t(v))`` per replica and the frequency of exceeding ``log^2 n``."""
    started = time.perf_counter()
    n, t = cfg.n, cfg.beta[0] * cfg.n ** 2
    k = cfg.k if cfg.k is not None else round(n / math.log(n))
    rows = _map(iota_replica, [(n, t, k, cfg.seed, r) for r in range(cfg.replicas)], cfg.threads)
    level = math.log(n) ** 2
    agg = {"k": k, "level": level,
           "max_iota": mean_ci([x["max_iota"] for x in rows]),
           "p_exceed": proportion_ci(sum(x["max_iota"] >= level for x in rows), len(rows))}
    return _record(cfg, rows, agg, started)


def split_bound(n: int, k: int, ell: int) -> float:
    return 4 * ell * math.log(n) ** 2 / (k * n)


def split_rate(cfg: ExperimentConfig) -> RunRecord:
    """Exact uniform-edge split-to-small probability of sigma_t against ``4 ell log^2 n / (k n)``."""
    started = time.perf_counter()
    n, t = cfg.n, cfg.beta[0] * cfg.n ** 2
    k = cfg.k if cfg.k is not None else default_k(n)
    ell = cfg.ell if cfg.ell is not None else k
    warnings = [] if ell >= k else [f"ell={ell} < k={k}: outside the split-rate hypothesis"]
    rows = _map(split_replica, [(n, t, k, ell, cfg.seed, r) for r in range(cfg.replicas)],
                cfg.threads)
    bound = split_bound(n, k, ell)
    for x in rows:
        x["within_bound"] = x["split_prob"] <= bound
    good = [x for x in rows if x["good_iota"]]
    agg = {"k": k, "ell": ell, "bound": bound,
           "split_prob": mean_ci([x["split_prob"] for x in rows]),
           "conditioned": len(good),
           "within_bound": proportion_ci(sum(x["within_bound"] for x in good), len(good))
           if good else None}
    return _record(cfg, rows, agg, started, warnings)


def subcritical_containment(cfg: ExperimentConfig) -> RunRecord:
    """Coupling from the identity over ``[0, t]``; containment is checked at every sample."""
    started = time.perf_counter()
    n, beta = cfg.n, cfg.beta[0]
    warnings = [] if beta < 0.5 else [f"beta={beta} is not subcritical"]
    threshold = cfg.ell if cfg.ell is not None else math.ceil(cfg.C * math.log(n))
    tasks = [(n, beta * n * n, threshold, cfg.grid, cfg.seed, r) for r in range(cfg.replicas)]
    rows = _map(containment_replica, tasks, cfg.threads)
    agg = {"threshold": threshold,
           "largest_sigma": mean_ci([x["largest_sigma"] for x in rows]),
           "largest_graph": mean_ci([x["largest_graph"] for x in rows]),
           "median_largest_sigma": float(np.median([x["largest_sigma"] for x in rows])),
           "median_largest_graph": float(np.median([x["largest_graph"] for x in rows])),
           "containment_violations": 0}
    return _record(cfg, rows, agg, started, warnings)


def coupling(cfg: ExperimentConfig) -> RunRecord:
    """Sup discrepancy ``|V^G_{t,s}(ell) \\ V_{t+s}(ell)|`` over ``[0, Delta]`` and sprinkling times."""
    started = time.perf_counter()
    n, t = cfg.n, cfg.beta[0] * cfg.n ** 2
    ell = cfg.ell if cfg.ell is not None else n
    delta = cfg.delta if cfg.delta is not None else (n * n / ell) * math.log(n)
    k = cfg.k if cfg.k is not None else math.ceil(min(ell, n / math.log(n)))
    warnings = [] if k <= ell else [f"k={k} > ell={ell}: outside the discrepancy hypothesis"]
    tasks = [(n, t, delta, ell, k, cfg.delta_frac, cfg.grid, cfg.seed, r)
             for r in range(cfg.replicas)]
    rows = _map(coupling_replica, tasks, cfg.threads)
    bound = 4 * ell ** 2 * delta * math.log(n) ** 2 / (k * n)
    agg = {"ell": ell, "k": k, "delta": delta, "bound": bound,
           "sup_discrepancy": mean_ci([x["sup_discrepancy"] for x in rows])}
    if cfg.delta_frac:
        times = [x["sprinkling_time"] for x in rows]
        agg["sprinkled_within_delta"] = proportion_ci(
            sum(s is not None and s <= delta for s in times), len(times))
    return _record(cfg, rows, agg, started, warnings)


def crw_trace(cfg: ExperimentConfig) -> tuple[RunRecord, str]:
    """Full CRW runs from uniform starts at height 0; returns the record and JSON-lines traces."""
    started = time.perf_counter()
    n, t = cfg.n, cfg.beta[0] * cfg.n ** 2
    rows, runs = [], []
    for r in range(cfg.replicas):
        rng = replica_rng(cfg.seed, 0, r)
        B = sample_bridges(n, t, rng)
        v = int(rng.integers(0, n * n))
        run = run_crw(B, SpaceTimePoint(v, 0.0), budget=cfg.k)
        runs.append(run)
        rows.append({"replica": r, "start": v, "trace_size": run.trace_size,
                     "closed": run.closed, "cycle_length": len(run.top_crossings)})
    agg = {"trace_size": mean_ci([x["trace_size"] for x in rows])}
    return _record(cfg, rows, agg, started), dump_runs(runs)


EXPERIMENTS = {
    "phase-sweep": phase_sweep,
    "line-tail": line_tail,
    "iota-orbit": iota_orbit,
    "split-rate": split_rate,
    "coupling": coupling,
    "subcritical": subcritical_containment,
}
