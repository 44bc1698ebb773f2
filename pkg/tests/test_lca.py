from dataclasses import astuple

import networkx as nx
import numpy as np
import pytest

from mis_lca.graph import Graph, Oracle, generate_graph
from mis_lca.harness import complete_from_outcome, verify_mis
from mis_lca.lca import (ComponentCapExceeded, QuestionContext, SimulationError, answer, answer_all,
                         default_cap, greedy_complete, phase1_status, residual_component, simulate_node)
from mis_lca.reference import run
from mis_lca.states import Phase1Status, Status
from mis_lca.tape import ParamError, Params, rho

from oracles import lex_first_mis, small_graphs


def ctx_for(g, p):
    return QuestionContext(Oracle(g), p)


def first_seed(g, pred, **kw):
    for seed in range(2000):
        p = Params.build(g.max_degree, seed=seed, **kw)
        if pred(run(g, p), p):
            return p
    raise AssertionError("no seed found")


def test_isolated_vertex_one_probe():
    g = Graph.from_edges(1, [])
    for seed in range(5):
        p = Params.build(0, seed=seed)
        ctx = ctx_for(g, p)
        out = run(g, p)
        for t in range(p.T + 1):
            assert simulate_node(ctx, 0, t) == out.state(0, t)
        assert ctx.oracle.probe_counter == 1
        assert answer(g, p, 0).in_mis


def test_path3_middle_probe_count():
    g = generate_graph("path", n=3)
    for seed in range(20):
        a = answer(g, Params.build(2, seed=seed), 1)
        if a.phase1.kind is not Status.RESIDUAL:
            assert a.probes_used <= 7


def test_single_edge_first_joiner():
    g = Graph.from_edges(2, [(0, 1)])
    p = first_seed(g, lambda out, p: out.join_round[0] > 0)
    ctx = ctx_for(g, p)
    assert phase1_status(ctx, 0) == Phase1Status.in_mis()
    assert phase1_status(ctx, 1) == Phase1Status.dominated(0)
    assert str(phase1_status(ctx, 1)) == "dominated(0)"


def test_never_marked_vertex_never_joins():
    g = generate_graph("path", n=3)
    found = 0
    for seed in range(100):
        p = Params.build(2, ct=1, seed=seed)
        if all(rho(p, 1, t) > 2 ** (p.bits - 1) for t in range(1, p.T + 1)):
            assert phase1_status(ctx_for(g, p), 1).kind is not Status.IN_MIS
            found += 1
    assert found


def test_tiny_horizon_leaves_edge_residual():
    g = Graph.from_edges(2, [(0, 1)])
    p = first_seed(g, lambda out, p: all(rho(p, v, 1) > 2 ** (p.bits - 1) for v in (0, 1)), ct=1)
    assert p.T == 1
    ctx = ctx_for(g, p)
    assert phase1_status(ctx, 0).kind is Status.RESIDUAL
    assert phase1_status(ctx, 1).kind is Status.RESIDUAL
    assert residual_component(ctx, 0) == [0, 1]
    assert [answer(g, p, v).in_mis for v in (0, 1)] == [True, False]


def test_path3_fully_residual_component():
    g = generate_graph("path", n=3)
    for seed in range(500):
        p = Params.build(2, ct=1, seed=seed)
        out = run(g, p)
        if out.residual.size == 3:
            for v in range(3):
                assert residual_component(ctx_for(g, p), v) == [0, 1, 2]
            return
    pytest.fail("no fully residual seed")


def test_residual_with_dominated_neighbors_is_singleton():
    g = generate_graph("gnp", seed=8, n=400, dmax=10)
    p = Params.build(g.max_degree, ct=1, seed=8)
    out = run(g, p)
    res = set(out.residual.tolist())
    lone = [v for v in res if not (set(g.adjacency[v]) & res)]
    assert lone
    ctx = ctx_for(g, p)
    for v in lone[:10]:
        assert residual_component(ctx, v) == [v]


def test_component_of_non_residual_vertex_is_an_error():
    g = Graph.from_edges(1, [])
    p = next(Params.build(0, seed=s) for s in range(50) if run(g, Params.build(0, seed=s)).join_round[0])
    with pytest.raises(SimulationError):
        residual_component(ctx_for(g, p), 0)


@pytest.mark.parametrize("k_override", [None, 0, 2])
def test_matches_reference_on_small_graphs(k_override):
    for G in small_graphs(5):
        g = Graph.from_networkx(G)
        for seed in range(3):
            p = Params.build(g.max_degree, seed=seed, k_override=k_override)
            out = run(g, p)
            for v in range(g.n):
                ctx = ctx_for(g, p)
                for t in range(p.T + 1):
                    assert simulate_node(ctx, v, t) == out.state(v, t)
                assert phase1_status(ctx_for(g, p), v) == out.status(v)


@pytest.mark.parametrize("k_override, ct", [(None, 8), (0, 2), (1, 4)])
def test_matches_reference_on_gnp(k_override, ct):
    g = generate_graph("gnp", seed=9, n=300, dmax=12)
    p = Params.build(g.max_degree, ct=ct, seed=9, k_override=k_override)
    out = run(g, p)
    for v in range(0, g.n, 3):
        ctx = ctx_for(g, p)
        assert ctx.status(v) == out.status(v)
        assert astuple(ctx.state(v, p.T)) == astuple(out.state(v, p.T))


def test_triangle_exactly_one_member():
    g = generate_graph("complete", n=3)
    for seed in range(30):
        p = Params.build(2, seed=seed)
        assert sum(answer(g, p, v).in_mis for v in range(3)) == 1


def test_answers_form_mis_on_gnp():
    g = generate_graph("gnp", seed=10, n=2000, dmax=16)
    for ct in (1, 8):
        p = Params.build(g.max_degree, ct=ct, seed=10)
        res = answer_all(g, p, shared_cache=True)
        member = np.array([res.membership[v] for v in range(g.n)])
        assert verify_mis(g, member).passed
        assert (member == complete_from_outcome(run(g, p))).all()


def test_batch_equals_single():
    g = generate_graph("gnp", seed=12, n=600, dmax=12)
    p = Params.build(g.max_degree, ct=2, seed=12)
    single = answer_all(g, p)
    shared = answer_all(g, p, shared_cache=True)
    assert single.membership == shared.membership
    assert sum(shared.probes) <= sum(single.probes)


def test_probes_used_is_counter_delta():
    g = generate_graph("cycle", n=40)
    p = Params.build(2, seed=1)
    ctx = ctx_for(g, p)
    from mis_lca.lca import _answer_in

    a = _answer_in(ctx, 5, None, None)
    assert a.probes_used == ctx.oracle.probe_counter
    b = _answer_in(ctx, 5, None, None)
    assert b.probes_used == 0 and b.in_mis == a.in_mis


def test_state_round_range():
    g = generate_graph("cycle", n=5)
    ctx = ctx_for(g, Params.build(2))
    with pytest.raises(ParamError):
        ctx.state(0, -1)


def test_greedy_complete_examples():
    assert greedy_complete([0, 1, 2], {0: [1], 1: [0, 2], 2: [1]}) == {0, 2}
    assert greedy_complete([3, 5, 9], {3: [5, 9], 5: [3, 9], 9: [3, 5]}) == {3}


def test_greedy_complete_matches_lex_first_on_small_graphs():
    for G in small_graphs(7):
        adj = {v: set(G[v]) for v in G}
        assert greedy_complete(list(G), adj) == lex_first_mis(G, adj)


def test_residual_answers_follow_lex_first_per_component():
    for G in small_graphs(7, connected_only=True):
        g = Graph.from_networkx(G)
        p = Params.build(g.max_degree, ct=1, seed=len(G.edges()))
        out = run(g, p)
        res = set(out.residual.tolist())
        if not res:
            continue
        H = nx.Graph(G.subgraph(res))
        adj = {v: set(H[v]) for v in H}
        want = lex_first_mis(H, adj)
        for v in res:
            assert answer(g, p, v).in_mis == (v in want)


def test_cap_abort():
    g = generate_graph("path", n=60)
    for seed in range(200):
        p = Params.build(2, ct=1, seed=seed)
        out = run(g, p)
        comp = [v for v in out.residual.tolist() if v + 1 in set(out.residual.tolist())]
        if comp:
            with pytest.raises(ComponentCapExceeded) as exc:
                answer(g, p, comp[0], cap=1)
            assert exc.value.cap == 1
            return
    pytest.fail("no residual edge found")


def test_default_cap():
    assert default_cap(16, 50_000) == int(np.ceil(10 * 16**4 * np.log(50_000)))
    assert default_cap(0, 1) >= 1
