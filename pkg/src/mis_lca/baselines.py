"""Reference LCAs for comparison: randomized greedy and full ball simulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, Oracle
from .reference import run
from .states import Phase1Status
from .tape import Params, priority

YOSHIDA = "yoshida"
NGUYEN_ONAK = "nguyen_onak"
DEFAULT_BALL_BUDGET = 5_000_000


def rank(seed: int, v: int) -> tuple[int, int]:
    """Position of ``v`` in the random order; ties broken by id."""
    return priority(seed, v), v


class GreedyQuestion:
    """Memoized randomized-greedy membership queries sharing one oracle."""

    def __init__(self, oracle: Oracle, seed: int, order: str = YOSHIDA):
        if order not in (YOSHIDA, NGUYEN_ONAK):
            raise ValueError(f"unknown neighbour order {order!r}")
        self.oracle = oracle
        self.seed = seed
        self.order = order
        self.memo: dict[int, bool] = {}
        self._earlier: dict[int, list[int]] = {}

    def _earlier_neighbors(self, x: int) -> list[int]:
        lst = self._earlier.get(x)
        if lst is None:
            kx = rank(self.seed, x)
            lst = [u for u in self.oracle.reveal_neighbors(x) if rank(self.seed, u) < kx]
            if self.order == YOSHIDA:
                lst.sort(key=lambda u: rank(self.seed, u))
            self._earlier[x] = lst
        return lst

    def __call__(self, v: int) -> bool:
        memo = self.memo
        if v in memo:
            return memo[v]
        stack = [(v, self._earlier_neighbors(v))]
        idx = [0]
        while stack:
            x, lst = stack[-1]
            i = idx[-1]
            decided = None
            while i < len(lst):
                r = memo.get(lst[i])
                if r is None:
                    break
                if r:
                    decided = False
                    break
                i += 1
            else:
                decided = True
            idx[-1] = i
            if decided is None:
                u = lst[i]
                assert rank(self.seed, u) < rank(self.seed, x)
                stack.append((u, self._earlier_neighbors(u)))
                idx.append(0)
                continue
            memo[x] = decided
            stack.pop()
            idx.pop()
        return memo[v]


def rgmis_answer(oracle: Oracle, seed: int, v: int, *, order: str = YOSHIDA) -> bool:
    """Is ``v`` in the greedy MIS over the seeded random order?"""
    return GreedyQuestion(oracle, seed, order)(int(v))


@dataclass
class BaselineBatch:
    membership: dict[int, bool]
    probes: list[int]


def rgmis_answer_all(graph: Graph, seed: int, vertices=None, *, order: str = YOSHIDA) -> BaselineBatch:
    vertices = range(graph.n) if vertices is None else vertices
    mem, probes = {}, []
    for v in vertices:
        o = Oracle(graph)
        mem[int(v)] = rgmis_answer(o, seed, v, order=order)
        probes.append(o.probe_counter)
    return BaselineBatch(mem, probes)


class BallBudgetExceeded(RuntimeError):
    def __init__(self, estimate: int, budget: int):
        super().__init__(f"estimated ball cost {estimate} probes exceeds budget {budget}")
        self.estimate, self.budget = estimate, budget


def ball_radius(params: Params) -> int:
    # two message exchanges per round: marks, then join announcements
    return 2 * params.T


def estimate_ball_probes(n: int, delta_max_degree: int, radius: int) -> int:
    """Upper estimate of the probes needed to reveal every vertex within ``radius``."""
    D = max(delta_max_degree, 1)
    count, layer = 1, 1
    for d in range(1, radius + 1):
        layer = D if d == 1 else layer * (D - 1)
        count += layer
        if count >= n or layer == 0:
            break
    return min(n, count) * (D + 1)


def ball_simulate_answer(oracle: Oracle, params: Params, v: int, *, naive: bool = False,
                         budget: int = DEFAULT_BALL_BUDGET) -> Phase1Status:
    """Phase-1 status of ``v`` from a global run restricted to its ball.

    Vertices within ``2T`` hops are revealed; their neighbours one hop further
    are kept as leaves, which is all ``v``'s final state can depend on.
    ``naive`` also reveals the leaves.
    """
    v = int(v)
    R = ball_radius(params) + (1 if naive else 0)
    est = estimate_ball_probes(oracle.n, params.delta_max_degree, R)
    if est > budget:
        raise BallBudgetExceeded(est, budget)
    dist = {v: 0}
    frontier = [v]
    adj: dict[int, tuple[int, ...]] = {}
    for d in range(R + 1):
        nxt = []
        for x in frontier:
            nb = oracle.reveal_neighbors(x)
            adj[x] = nb
            if naive and d == R:
                continue
            for y in nb:
                if y not in dist:
                    dist[y] = d + 1
                    nxt.append(y)
        frontier = nxt
        if not frontier:
            break
    ids = np.array(sorted(dist), dtype=np.int64)
    local = {u: i for i, u in enumerate(ids.tolist())}
    edges = [(local[x], local[y]) for x, nb in adj.items() for y in nb
             if y in local and (x < y or y not in adj)]
    sub = Graph.from_edges(len(ids), edges)
    out = run(sub, params, vertex_ids=ids)
    st = out.status(local[v])
    if st.by is not None:
        return Phase1Status.dominated(int(ids[st.by]))
    return st
