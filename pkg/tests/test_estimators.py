import networkx as nx
import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from mis_lca.estimators import GreedyMIS, LocalMIS, MarkingSimulator
from mis_lca.graph import GraphError, generate_graph
from mis_lca.harness import verify_mis


@pytest.fixture(scope="module")
def graph():
    return generate_graph("gnp", seed=2, n=400, dmax=10)


def test_params_round_trip():
    est = LocalMIS(ct=4, seed=9)
    assert est.get_params()["ct"] == 4
    c = clone(est)
    assert c.get_params() == est.get_params() and c is not est
    est.set_params(seed=1)
    assert est.seed == 1


def test_local_mis_predicts_valid_set(graph):
    est = LocalMIS(seed=3, shared_cache=True).fit(graph)
    member = est.predict()
    assert member.dtype == bool and member.shape == (graph.n,)
    assert verify_mis(graph, member).passed
    assert est.probes_.shape == (graph.n,)
    assert (LocalMIS(seed=3).fit(graph).predict([5, 7]) == member[[5, 7]]).all()


def test_phase1_codes_match_simulator(graph):
    a = LocalMIS(ct=2, seed=4).fit(graph).phase1()
    sim = MarkingSimulator(ct=2, seed=4).fit(graph)
    assert (a == sim.predict()).all()
    assert sim.residual_fraction_ == np.mean(a == 2)


def test_accepts_networkx_and_edge_tuples():
    G = nx.path_graph(5)
    x = GreedyMIS(seed=1).fit(G).predict()
    y = GreedyMIS(seed=1).fit((5, list(G.edges()))).predict()
    assert (x == y).all()


def test_not_fitted_and_bad_input(graph):
    with pytest.raises(NotFittedError):
        LocalMIS().predict()
    with pytest.raises(GraphError):
        LocalMIS().fit(graph).predict([graph.n])
    with pytest.raises((ValueError, TypeError)):
        GreedyMIS(seed=-1).fit(graph)
