import json

import numpy as np
import pytest

from mis_lca.graph import Graph, generate_graph, save_edge_list
from mis_lca.harness import (CSV_HEADER, TOP_LEVEL_KEYS, ConfigError, ExperimentConfig, question_set,
                             report_csv, report_json, run_experiment, verify_mis)
from mis_lca.tape import Params, rho

from oracles import small_graphs


def p3():
    return generate_graph("path", n=3)


def test_verify_mis_examples():
    assert verify_mis(p3(), [True, False, True]).passed
    v = verify_mis(p3(), [True, False, False])
    assert not v.passed and v.reason == "maximality violated at vertex 2"
    v = verify_mis(generate_graph("complete", n=3), [True, True, False])
    assert not v.passed and v.reason == "independence violated on edge (0,1)"


def test_verify_mis_region_and_dict():
    g = generate_graph("path", n=6)
    assert verify_mis(g, {0: True, 1: False, 2: True}, region=[0, 1]).passed
    v = verify_mis(g, {0: True, 1: False}, region=[1])
    assert not v.passed and "unknown" in v.reason
    assert not verify_mis(g, [True, False]).passed


def test_question_specs():
    assert question_set("all", 4, 0).tolist() == [0, 1, 2, 3]
    assert question_set("none", 4, 0).size == 0
    assert question_set("vertex:2", 4, 0).tolist() == [2]
    s = question_set("sample:10", 100, 3)
    assert s.size == 10 and (np.diff(s) > 0).all()
    assert (s == question_set("sample:10", 100, 3)).all()
    for bad in ("sample:0", "vertex:x", "most"):
        with pytest.raises(ConfigError):
            ExperimentConfig(mode="lca", gen="cycle:n=5", questions=bad)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(mode="nope", gen="cycle:n=5")
    with pytest.raises(ConfigError):
        ExperimentConfig(mode="lca")
    with pytest.raises(ConfigError):
        ExperimentConfig(mode="sweep", gen="cycle:n=5")
    with pytest.raises(ConfigError):
        ExperimentConfig(mode="lca", gen="cycle:n=5", seeds=())


def test_global_on_empty_graph_matches_tape():
    seed = 21
    rep = run_experiment(ExperimentConfig(mode="global", gen="gnp:n=300,p=0", seeds=(seed,)))
    p = Params.build(0, seed=seed)
    never = sum(all(rho(p, v, t) > 2 ** (p.bits - 1) for t in range(1, p.T + 1)) for v in range(300))
    assert rep.runs[0]["metrics"]["residual_fraction"] == never / 300
    assert rep.passed


def test_verify_mode_on_small_graph_files(tmp_path):
    for i, G in enumerate(small_graphs(4, connected_only=True)):
        path = tmp_path / f"g{i}.txt"
        save_edge_list(Graph.from_networkx(G), path)
        rep = run_experiment(ExperimentConfig(mode="verify", graph_path=str(path), seeds=tuple(range(4))))
        assert rep.passed, rep.verdicts


def test_lca_mode_verdicts():
    rep = run_experiment(ExperimentConfig(mode="lca", gen="gnp:n=1500,dmax=12", seeds=(0, 1), ct=2))
    assert set(rep.verdicts) == {"batch_equals_single", "mis_certified_region"}
    assert rep.passed


def test_cap_aborts_are_counted_not_fatal():
    rep = run_experiment(ExperimentConfig(mode="lca", gen="gnp:n=2000,dmax=12", seeds=(0, 1), ct=1, cap=1))
    m = rep.runs[0]["metrics"]
    assert m["shattering_failures"] > 0 and len(rep.runs) == 2
    assert m["shattering_failure_events"][0]["cap"] == 1
    assert rep.aggregate["null"]["shattering_failures"] == sum(r["metrics"]["shattering_failures"] for r in rep.runs)
    # the region around an aborted question cannot be certified
    cert = rep.verdicts["mis_certified_region"]
    assert cert["verdict"] == "Fail" and cert["reason"].startswith("seed 0: cannot certify")


def test_bench_sweep_table_grows_with_degree():
    rep = run_experiment(ExperimentConfig(mode="sweep", gen="d_regular_random:n=2000", sweep_param="d",
                                          sweep_values=(4, 8, 16), questions="sample:100"))
    maxima = [rep.aggregate[json.dumps(d)]["phase1_probes_max"] for d in (4, 8, 16)]
    assert maxima == sorted(maxima)


def test_baseline_modes():
    rg = run_experiment(ExperimentConfig(mode="baseline-rg", gen="gnp:n=500,dmax=8", questions="all"))
    assert rg.verdicts["mis"]["verdict"] == "Pass"
    ball = run_experiment(ExperimentConfig(mode="baseline-ball", gen="cycle:n=30", ct=1, questions="all"))
    assert ball.passed and ball.runs[0]["metrics"]["probes"]["count"] == 30
    bench = run_experiment(ExperimentConfig(mode="bench", gen="cycle:n=30", ct=1, questions="sample:5"))
    m = bench.runs[0]["metrics"]
    assert int(m["ball_estimate_unbounded"]) >= m["ball_estimate"]


def test_empty_sweep_gives_header_only_csv():
    rep = run_experiment(ExperimentConfig(mode="sweep", gen="cycle:n=10", sweep_param="ct", sweep_values=()))
    assert rep.runs == []
    assert report_csv(rep) == ",".join(CSV_HEADER) + "\n"


def test_one_seed_json_keys():
    rep = run_experiment(ExperimentConfig(mode="global", gen="cycle:n=10"))
    d = json.loads(report_json(rep))
    assert tuple(sorted(d)) == tuple(sorted(TOP_LEVEL_KEYS))
    assert d["schema"] == "mis-lca-report/1"
    assert len(d["runs"]) == 1


def test_two_runs_are_byte_identical():
    cfg = ExperimentConfig(mode="lca", gen="gnp:n=800,dmax=10", seeds=(3, 1), questions="sample:50")
    assert report_json(run_experiment(cfg)) == report_json(run_experiment(cfg))
    assert report_csv(run_experiment(cfg)) == report_csv(run_experiment(cfg))


def test_timing_is_opt_in():
    rep = run_experiment(ExperimentConfig(mode="global", gen="cycle:n=10", timing=True))
    assert "seconds" in rep.runs[0]
    assert "seconds" not in run_experiment(ExperimentConfig(mode="global", gen="cycle:n=10")).runs[0]

