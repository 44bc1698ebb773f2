import pytest

from mis_lca.baselines import (NGUYEN_ONAK, YOSHIDA, BallBudgetExceeded, GreedyQuestion, ball_radius,
                               ball_simulate_answer, estimate_ball_probes, rank, rgmis_answer,
                               rgmis_answer_all)
from mis_lca.graph import Graph, Oracle, generate_graph
from mis_lca.lca import QuestionContext
from mis_lca.reference import run
from mis_lca.tape import Params

from oracles import sequential_greedy, small_graphs


def test_isolated_vertex_in_greedy_set():
    g = Graph.from_edges(1, [])
    assert all(rgmis_answer(Oracle(g), s, 0) for s in range(5))


def test_single_edge_smaller_rank_wins():
    g = Graph.from_edges(2, [(0, 1)])
    for seed in range(20):
        first = min((0, 1), key=lambda v: rank(seed, v))
        assert rgmis_answer(Oracle(g), seed, first)
        assert not rgmis_answer(Oracle(g), seed, 1 - first)


@pytest.mark.parametrize("order", [YOSHIDA, NGUYEN_ONAK])
def test_matches_sequential_greedy(order):
    for G in small_graphs(5):
        g = Graph.from_networkx(G)
        adj = [list(a) for a in g.adjacency]
        for seed in range(5):
            want = sequential_greedy(g.n, adj, seed)
            got = rgmis_answer_all(g, seed, order=order).membership
            assert {v for v, m in got.items() if m} == want


def test_memo_shared_within_question():
    g = generate_graph("gnp", seed=1, n=500, dmax=10)
    q = GreedyQuestion(Oracle(g), 3)
    ans = [q(v) for v in range(g.n)]
    assert {v for v in range(g.n) if ans[v]} == sequential_greedy(g.n, g.adjacency, 3)
    with pytest.raises(ValueError):
        GreedyQuestion(Oracle(g), 3, order="random")


def test_ball_isolated_vertex():
    g = Graph.from_edges(1, [])
    p = Params.build(0, seed=2)
    assert ball_simulate_answer(Oracle(g), p, 0) == run(g, p).status(0)


@pytest.mark.parametrize("naive", [False, True])
def test_ball_matches_lca_on_cycle(naive):
    g = generate_graph("cycle", n=20)
    for seed in range(3):
        p = Params.build(2, ct=1, seed=seed)
        for v in range(20):
            lca = QuestionContext(Oracle(g), p).status(v)
            assert ball_simulate_answer(Oracle(g), p, v, naive=naive) == lca


@pytest.mark.parametrize("kind, kw", [("grid2d", {"rows": 6, "cols": 7}), ("gnp", {"n": 80, "p": 0.05}),
                                      ("path", {"n": 30})])
def test_ball_matches_reference(kind, kw):
    g = generate_graph(kind, seed=5, **kw)
    for k in (None, 0):
        p = Params.build(g.max_degree, ct=1, seed=5, k_override=k)
        out = run(g, p)
        for v in range(g.n):
            assert ball_simulate_answer(Oracle(g), p, v) == out.status(v)


def test_star_probe_comparison():
    g = generate_graph("star", leaves=8)
    p = Params.build(8, seed=0)
    o = Oracle(g)
    ball_simulate_answer(o, p, 0)
    ctx = QuestionContext(Oracle(g), p)
    ctx.status(0)
    # the ball reveals every vertex of the star
    assert o.probe_counter == (8 + 1) + 8 * 2
    assert ctx.oracle.probe_counter <= o.probe_counter


def test_budget_refusal():
    g = generate_graph("d_regular_random", seed=0, n=2000, d=8)
    p = Params.build(8)
    o = Oracle(g)
    with pytest.raises(BallBudgetExceeded) as exc:
        ball_simulate_answer(o, p, 0, budget=1000)
    assert exc.value.estimate > 1000
    assert o.probe_counter == 0


def test_ball_estimates():
    assert ball_radius(Params.build(4)) == 2 * Params.build(4).T
    assert estimate_ball_probes(10**9, 3, 2) == (1 + 3 + 6) * 4
    assert estimate_ball_probes(100, 3, 50) == 100 * 4
