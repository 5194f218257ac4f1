import csv
import json
import math

import pytest

from stirring_lab.errors import InvalidParameter
from stirring_lab.harness import cli
from stirring_lab.harness.config import DEFAULT_SEED, ExperimentConfig, load_config, merge
from stirring_lab.harness.experiments import (
    coupling,
    crw_trace,
    fit_two_step_ratio,
    iota_orbit,
    line_tail,
    phase_sweep,
    split_rate,
    subcritical_containment,
    survival_table,
)
from stirring_lab.harness.records import SCHEMA, mean_ci, proportion_ci


def cfg(experiment, **kw):
    kw.setdefault("seed", 11)
    return ExperimentConfig(experiment, **kw).validate()


def test_selftest_exits_zero(capsys):
    assert cli.main(["selftest", "--seed", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert all(c["violations"] == 0 for c in doc["aggregate"].values())


def test_phase_sweep_is_reproducible(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.json"
        assert cli.main(["phase-sweep", "--n", "8", "--beta", "0.3,0.8", "--replicas", "10",
                         "--seed", "5", "--out", str(path)]) == 0
        doc = json.loads(path.read_text())
        doc.pop("runtime")
        outs.append(json.dumps(doc, sort_keys=True))
        assert (tmp_path / f"run{i}.replicas.csv").read_text() == (
            tmp_path / "run0.replicas.csv").read_text()
    assert outs[0] == outs[1]


def test_missing_n_is_a_config_error(capsys):
    assert cli.main(["phase-sweep"]) == 2
    err = capsys.readouterr().err
    assert "usage" in err and "n is required" in err


def test_bad_config_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 8, "colour": "red"}')
    assert cli.main(["phase-sweep", "--config", str(bad)]) == 2
    bad.write_text("{not json")
    assert cli.main(["phase-sweep", "--config", str(bad)]) == 2
    assert cli.main(["phase-sweep", "--config", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["phase-sweep", "--n", "1"]) == 2


def test_config_merge_and_seed_default(tmp_path, monkeypatch):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n": 16, "beta": 0.5, "replicas": 7}))
    values = load_config(path)
    assert values["beta"] == [0.5]
    c = merge("coupling", values, {"n": 12, "replicas": None})
    assert (c.n, c.beta, c.replicas) == (12, [0.5], 7)
    monkeypatch.delenv("STIRRING_LAB_SEED", raising=False)
    assert merge("coupling", values, {}).seed == DEFAULT_SEED
    monkeypatch.setenv("STIRRING_LAB_SEED", "99")
    assert merge("coupling", values, {}).seed == 99
    assert merge("coupling", values, {"seed": 4}).seed == 4
    with pytest.raises(InvalidParameter):
        ExperimentConfig("coupling").validate()


def test_echo_omits_runtime_fields():
    echo = cfg("phase-sweep", n=8, threads=3, out="x.json").echo()
    assert "threads" not in echo and "out" not in echo and echo["n"] == 8


def test_ci_helpers():
    m = mean_ci([1.0, 2.0, 3.0])
    assert m["mean"] == 2.0 and m["var"] == 1.0
    assert m["ci95"][1] - 2.0 == pytest.approx(1.959963984540054 / math.sqrt(3))
    p = proportion_ci(0, 10)
    assert p["p"] == 0.0 and p["ci95"] == [0.0, 0.0]


def test_phase_sweep_beta_zero():
    rec = phase_sweep(cfg("phase-sweep", n=8, beta=[0.0], replicas=5))
    row = rec.aggregate["per_beta"][0]
    assert row["max_cycle"]["mean"] == 1 and row["long_fraction"]["mean"] == 0
    assert rec.aggregate["threshold"] == math.ceil(8 ** 1.5)
    assert rec.to_dict()["schema"] == SCHEMA


def test_phase_sweep_aggregate_recomputes_from_replicas():
    rec = phase_sweep(cfg("phase-sweep", n=8, beta=[0.4, 0.9], replicas=12))
    for b, agg in zip([0.4, 0.9], rec.aggregate["per_beta"]):
        vals = [r["long_fraction"] for r in rec.replicas if r["beta"] == b]
        assert agg["long_fraction"] == mean_ci(vals)


def test_line_tail_k1_survival_is_row_probability():
    n, R = 16, 4000
    rec = line_tail(cfg("line-tail", n=n, k=1, replicas=R))
    S1 = rec.aggregate["survival"][0]
    assert S1["M"] == 1
    assert abs(S1["p"] - 1 / n) <= 3 * math.sqrt((1 / n) * (1 - 1 / n) / R)


def test_line_tail_at_time_zero():
    rec = line_tail(cfg("line-tail", n=8, beta=[0.0], k=4, replicas=50))
    surv = {row["M"]: row["p"] for row in rec.aggregate["survival"]}
    assert all(surv[M] == 0.0 for M in surv if M >= 2)
    assert rec.aggregate["p_T_k"]["p"] == 0.0


def test_line_tail_warns_beyond_half():
    rec = line_tail(cfg("line-tail", n=8, k=6, replicas=5))
    assert rec.warnings


def test_survival_fit():
    table = survival_table([0, 1, 1, 2, 3, 4, 4, 5], 5)
    assert [row["p"] for row in table] == [7 / 8, 5 / 8, 4 / 8, 3 / 8, 1 / 8]
    fit = fit_two_step_ratio(table, 0.3)
    assert fit["M_range"] == [1, 2, 3]
    assert fit["r"] == pytest.approx(max(4 / 7, 3 / 5, 1 / 4))


def test_iota_orbit_trivial_cases():
    assert iota_orbit(cfg("iota-orbit", n=8, k=0, replicas=5)).aggregate["max_iota"]["mean"] == 1
    assert iota_orbit(cfg("iota-orbit", n=8, beta=[0.0], replicas=5)).aggregate["max_iota"]["mean"] == 1


def test_split_rate_identity_is_zero():
    rec = split_rate(cfg("split-rate", n=8, beta=[0.0], replicas=5))
    assert rec.aggregate["split_prob"]["mean"] == 0.0
    assert rec.aggregate["within_bound"]["p"] == 1.0


def test_subcritical_at_time_zero():
    rec = subcritical_containment(cfg("subcritical", n=8, beta=[0.0], replicas=3))
    assert rec.aggregate["largest_graph"]["mean"] == 1


def test_coupling_record_and_sprinkling():
    rec = coupling(cfg("coupling", n=10, replicas=5, delta_frac=0.2))
    agg = rec.aggregate
    assert agg["ell"] == 10 and agg["delta"] == pytest.approx(10 * math.log(10))
    assert all(r["sup_discrepancy"] >= 0 for r in rec.replicas)
    assert 0.0 <= agg["sprinkled_within_delta"]["p"] <= 1.0


def test_replicas_csv(tmp_path):
    rec = coupling(cfg("coupling", n=8, replicas=4))
    _, table = rec.write(tmp_path / "c.json")
    rows = list(csv.DictReader(table.open()))
    assert len(rows) == 4 and "sup_discrepancy" in rows[0]


def test_crw_trace_cli(tmp_path, monkeypatch):
    monkeypatch.delenv("STIRRING_LAB_SEED", raising=False)
    out = tmp_path / "trace.json"
    assert cli.main(["crw-trace", "--n", "6", "--replicas", "4", "--out", str(out)]) == 0
    lines = (tmp_path / "trace.traces.jsonl").read_text().splitlines()
    assert len(lines) == 4
    doc = json.loads(lines[0])
    assert doc["closed"] and set(doc) == {"start", "discovery_order", "closed", "top_crossings"}
    rec, _ = crw_trace(cfg("crw-trace", n=6, replicas=4, seed=DEFAULT_SEED))
    assert json.loads(out.read_text())["replicas"] == rec.replicas


def test_threads_do_not_change_results():
    one = phase_sweep(cfg("phase-sweep", n=8, beta=[0.5], replicas=8, threads=1))
    two = phase_sweep(cfg("phase-sweep", n=8, beta=[0.5], replicas=8, threads=2))
    assert one.to_json(with_runtime=False) == two.to_json(with_runtime=False)
