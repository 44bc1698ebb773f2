"""scikit-learn style wrappers: fit on a graph, predict membership per vertex."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .baselines import YOSHIDA, rgmis_answer_all
from .lca import answer_all
from .reference import run
from .states import Status
from .tape import DEFAULT_CT, DEFAULT_DELTA, Params
from .validation import check_graph, check_seed, check_vertices

STATUS_CODES = {Status.IN_MIS: 0, Status.DOMINATED: 1, Status.RESIDUAL: 2}


class _GraphEstimator(BaseEstimator):
    def _fit_graph(self, X):
        self.graph_ = check_graph(X)
        self.n_vertices_ = self.graph_.n
        return self.graph_

    def _params(self):
        return Params.build(self.graph_.max_degree, ct=self.ct, delta=self.delta,
                            seed=check_seed(self.seed), k_override=self.k_override)


class LocalMIS(_GraphEstimator):
    """Maximal independent set answered one vertex at a time by the LCA.

    ``predict`` returns a boolean membership array for the requested
    vertices; probe counts of the last call are in ``probes_``.
    """

    def __init__(self, ct=DEFAULT_CT, delta=DEFAULT_DELTA, k_override=None, seed=0, cap=None,
                 shared_cache=False):
        self.ct = ct
        self.delta = delta
        self.k_override = k_override
        self.seed = seed
        self.cap = cap
        self.shared_cache = shared_cache

    def fit(self, X, y=None):
        self._fit_graph(X)
        self.params_ = self._params()
        return self

    def predict(self, vertices=None):
        check_is_fitted(self, "params_")
        vs = check_vertices(vertices, self.n_vertices_)
        res = answer_all(self.graph_, self.params_, vs, shared_cache=self.shared_cache, cap=self.cap)
        self.answers_ = res.answers
        self.probes_ = np.array(res.probes, dtype=np.int64)
        return np.array([a.in_mis for a in res.answers], dtype=bool)

    def phase1(self, vertices=None):
        """Status codes 0 (in set), 1 (dominated), 2 (residual) after phase 1."""
        self.predict(vertices)
        return np.array([STATUS_CODES[a.phase1.kind] for a in self.answers_], dtype=np.int8)


class MarkingSimulator(_GraphEstimator):
    """Global run of the marking phase; ``predict`` gives phase-1 status codes."""

    def __init__(self, ct=DEFAULT_CT, delta=DEFAULT_DELTA, k_override=None, seed=0):
        self.ct = ct
        self.delta = delta
        self.k_override = k_override
        self.seed = seed

    def fit(self, X, y=None):
        self._fit_graph(X)
        self.params_ = self._params()
        self.outcome_ = run(self.graph_, self.params_)
        self.residual_fraction_ = self.outcome_.residual_fraction()
        return self

    def predict(self, vertices=None):
        check_is_fitted(self, "outcome_")
        vs = check_vertices(vertices, self.n_vertices_)
        codes = np.full(self.n_vertices_, STATUS_CODES[Status.RESIDUAL], dtype=np.int8)
        codes[self.outcome_.dominated] = STATUS_CODES[Status.DOMINATED]
        codes[self.outcome_.independent_set] = STATUS_CODES[Status.IN_MIS]
        return codes[vs]


class GreedyMIS(_GraphEstimator):
    """Randomized greedy MIS answered by local recursion."""

    def __init__(self, seed=0, order=YOSHIDA):
        self.seed = seed
        self.order = order

    def fit(self, X, y=None):
        self._fit_graph(X)
        check_seed(self.seed)
        return self

    def predict(self, vertices=None):
        check_is_fitted(self, "graph_")
        vs = check_vertices(vertices, self.n_vertices_)
        res = rgmis_answer_all(self.graph_, check_seed(self.seed), vs.tolist(), order=self.order)
        self.probes_ = np.array(res.probes, dtype=np.int64)
        return np.array([res.membership[int(v)] for v in vs], dtype=bool)
