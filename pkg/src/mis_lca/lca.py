"""Per-question local simulation of the marking algorithm against the oracle.

A question about ``v`` simulates exactly the part of the global run that
``v``'s output depends on. Each vertex is advanced stage by stage, three
stages per round:

* A: consume missed joins (step 1), refine future relevant sets (step 2), mark
* B: resolve joining and the exponent update (steps 3 and 4)
* C: learn about this round's joins among neighbours

Stage ``(t, B)`` of a vertex only needs stage ``(t, A)`` of its neighbours and
``(t, C)`` only needs their ``(t, B)``, so the recursion always moves to a
strictly earlier stage and terminates.

Relevant sets are never materialized. Every marked, still-active neighbour of
``v`` is provably a member of ``N(v, t)``, so "some member of ``N(v, t)`` is
marked" is the same as "some neighbour is marked", and a neighbour is pruned
as soon as its known exponent shows it cannot be marked in the round asked
about. Set sizes are only computed when they could cross a sleep threshold.
"""

from __future__ import annotations

import math
import sys
from collections import deque
from dataclasses import dataclass

from .graph import Graph, GraphError, Oracle
from .states import NodeRoundState, Phase1Status, Status
from .tape import Params, ParamError, Tape, start_exponent


class ComponentCapExceeded(RuntimeError):
    """Residual component larger than the configured cap (a shattering failure)."""

    def __init__(self, v: int, size: int, cap: int):
        super().__init__(f"residual component of {v} exceeds cap {cap} (reached {size})")
        self.v, self.size, self.cap = v, size, cap


class SimulationError(RuntimeError):
    pass


def threshold(gap: int, K: int) -> int:
    return 2 ** (5 * gap) + K


def default_cap(delta_max_degree: int, n: int) -> int:
    d = max(delta_max_degree, 1)
    return max(1, math.ceil(10 * d**4 * math.log(max(n, 2))))


class _Node:
    __slots__ = ("v", "lev", "pos", "e", "marked", "sleeping", "sched", "lp", "lp_hist", "joined",
                 "died", "dominator", "blocked", "nbound", "maxproc")

    def __init__(self, v, lev, T, e1, bound):
        self.v = v
        self.lev = lev
        self.pos = 2  # last finished stage, encoded 3*t + {0: A, 1: B, 2: C}
        self.e = [e1] * (T + 2)
        self.marked = bytearray(T + 1)
        self.sleeping = bytearray(T + 1)
        self.sched = bytearray(T + 2)
        self.lp = 0
        self.lp_hist = [0] * (T + 1)
        self.joined = 0
        self.died = 0
        self.dominator = -1
        self.blocked = False
        self.nbound = [bound] * (T + 1)
        self.maxproc = [0] * (T + 1)


class QuestionContext:
    """Memoized simulation state for one question (or a shared batch).

    Neighbour lists are revealed at most once per vertex and tape rows are
    free, so the probe cost of a question is ``sum(deg(u) + 1)`` over the
    vertices whose neighbourhood it had to look at.
    """

    def __init__(self, oracle: Oracle, params: Params, tape: Tape | None = None):
        if oracle.graph.max_degree > params.delta_max_degree:
            raise ParamError("graph degree exceeds params.delta_max_degree")
        self.oracle = oracle
        self.params = params
        self.tape = tape if tape is not None else Tape(params)
        self.T = params.T
        self.K = params.K
        self.e1 = start_exponent(params.delta_max_degree)
        self.final = 3 * self.T + 2
        self.revealed: dict[int, tuple[int, ...]] = {}
        self.nodes: dict[int, _Node] = {}
        self._status: dict[int, Phase1Status] = {}
        D = params.delta_max_degree
        self._init_sleep_possible = D > threshold(0, self.K)
        # the smallest gap t'' - r seen in step 2 is 3
        self._step2_possible = D > threshold(3, self.K)
        limit = 60 * self.T + 2000
        if sys.getrecursionlimit() < limit:
            sys.setrecursionlimit(limit)

    # bookkeeping ---------------------------------------------------------

    def neighbors(self, v: int) -> tuple[int, ...]:
        nb = self.revealed.get(v)
        if nb is None:
            nb = self.oracle.reveal_neighbors(v)
            self.revealed[v] = nb
        return nb

    def node(self, v: int) -> _Node:
        x = self.nodes.get(v)
        if x is None:
            if not 0 <= v < self.oracle.n:
                raise GraphError(f"vertex {v!r} out of range [0, {self.oracle.n})")
            x = _Node(v, self.tape.row(v), self.T, self.e1, self.params.delta_max_degree)
            self.nodes[v] = x
            if self._init_sleep_possible:
                self._init_sleep(x)
        return x

    def _init_sleep(self, x: _Node):
        nb = self.neighbors(x.v)
        T, K, e1 = self.T, self.K, self.e1
        for t in range(1, T + 1):
            x.nbound[t] = len(nb)
            if len(nb) <= threshold(t - 1, K):
                continue
            size = sum(1 for u in nb if e1 + 1 - t <= self.tape.row(u)[t])
            x.nbound[t] = size
            if size > threshold(t - 1, K):
                z = 0
                while size > threshold(t + z, K):
                    z += 1
                for s in range(t, min(T, t + z) + 1):
                    x.sched[s] = 1

    def _finish(self, x: _Node, t: int):
        # vertex stopped during round t: freeze everything after it
        T = self.T
        e_next = x.e[t + 1] if x.pos >= 3 * t + 1 or x.joined == t else x.e[t]
        for s in range(t + 1, T + 2):
            x.e[s] = e_next
        for s in range(t, T + 1):
            x.lp_hist[s] = x.lp
        x.pos = self.final

    # stages --------------------------------------------------------------

    def ensure(self, x: _Node, target: int):
        while x.pos < target:
            self._step(x)

    def _step(self, x: _Node):
        t, k = divmod(x.pos + 1, 3)
        if k == 0:
            self._stage_a(x, t)
        elif k == 1:
            self._stage_b(x, t)
        else:
            self._stage_c(x, t)

    def _stage_a(self, x: _Node, t: int):
        awake = not x.sched[t]
        x.sleeping[t] = not awake
        if awake:
            if x.lp < t - 1:
                for r in range(x.lp + 1, t):
                    w = self._joined_neighbor(x, r)
                    if w >= 0:
                        x.lp = t - 1
                        x.died = t
                        x.dominator = w
                        x.e[t + 1] = x.e[t]
                        x.pos = 3 * t
                        self._finish(x, t)
                        return
            x.lp = t - 1
        if self._step2_possible:
            self._refine(x, t)
        x.marked[t] = x.e[t] <= x.lev[t]
        x.pos = 3 * t

    def _stage_b(self, x: _Node, t: int):
        e = x.e[t]
        if x.sched[t]:
            x.e[t + 1] = e + 1
            x.pos = 3 * t + 1
            return
        nb = self.neighbors(x.v)
        blocked = False
        for w in nb:
            if self._maybe_marked(self.node(w), t):
                blocked = True
                break
        x.blocked = blocked
        if x.marked[t] and not blocked:
            x.joined = t
            x.e[t + 1] = e
            x.pos = 3 * t + 1
            self._finish(x, t)
            return
        x.e[t + 1] = e + 1 if blocked else max(1, e - 1)
        x.pos = 3 * t + 1

    def _stage_c(self, x: _Node, t: int):
        if not x.sched[t]:
            if x.blocked:
                w = self._joined_neighbor(x, t)
                if w >= 0:
                    x.died = t
                    x.dominator = w
                    x.lp = t
                    x.pos = 3 * t + 2
                    self._finish(x, t)
                    return
            x.lp = t
        x.lp_hist[t] = x.lp
        x.pos = 3 * t + 2

    def _maybe_marked(self, w: _Node, t: int) -> bool:
        """Whether ``w`` is active and marked in round ``t``, advancing it lazily."""
        lev = w.lev[t]
        if lev == 0:
            return False  # exponents are >= 1
        target = 3 * t
        while w.pos < target:
            s = (w.pos + 2) // 3
            # the exponent can drop by at most one per round
            if w.e[s] - (t - s) > lev:
                return False
            self._step(w)
        return bool(w.marked[t])

    def _joined_neighbor(self, x: _Node, r: int) -> int:
        """Smallest neighbour of ``x`` that joined in round ``r``, or -1."""
        for wv in self.neighbors(x.v):
            w = self.node(wv)
            if self._maybe_marked(w, r):
                self.ensure(w, 3 * r + 1)
                if w.joined == r:
                    return wv
        return -1

    def _refine(self, x: _Node, t: int):
        # step 2, evaluated only where a threshold could be crossed
        T, K = self.T, self.K
        for t2 in range(t + 1, T + 1):
            if x.sched[t2]:
                continue
            d = t2 - t
            for r in range(max(1, t - 2 * d), t - d):
                x.maxproc[t2] = r
                thr = threshold(t2 - r, K)
                if x.nbound[t2] <= thr:
                    continue
                size = 0
                lev_row = self.tape.row
                for uv in self.neighbors(x.v):
                    u = self.node(uv)
                    if u.e[1] - (t2 - 1) > lev_row(uv)[t2]:
                        continue
                    self.ensure(u, 3 * r + 2)
                    if u.died and u.died <= r:
                        continue
                    if u.e[r] - (t2 - r) <= u.lev[t2]:
                        size += 1
                x.nbound[t2] = size
                if size > thr:
                    for s in range(t2, min(T, t2 + (t2 - r)) + 1):
                        x.sched[s] = 1
                    break

    # public --------------------------------------------------------------

    def state(self, v: int, t: int) -> NodeRoundState:
        if not 0 <= t <= self.T:
            raise ParamError(f"round {t} outside [0, {self.T}]")
        x = self.node(v)
        if t == 0:
            return NodeRoundState(self.e1, self.e1, False, False, False, False, 0)
        self.ensure(x, 3 * t + 2)
        return NodeRoundState(
            exponent=x.e[t],
            next_exponent=x.e[t + 1],
            marked=bool(x.marked[t]),
            sleeping=bool(x.sleeping[t]),
            dead=0 < x.died <= t,
            joined=0 < x.joined <= t,
            last_processed=x.lp_hist[t],
        )

    def status(self, v: int) -> Phase1Status:
        st = self._status.get(v)
        if st is not None:
            return st
        x = self.node(v)
        self.ensure(x, self.final)
        if x.joined:
            st = Phase1Status.in_mis()
        elif x.died:
            st = Phase1Status.dominated(x.dominator)
        else:
            # joins the vertex had no chance to hear about before the end
            st = Phase1Status.residual()
            for r in range(x.lp + 1, self.T + 1):
                w = self._joined_neighbor(x, r)
                if w >= 0:
                    st = Phase1Status.dominated(w)
                    break
        self._status[v] = st
        return st


def simulate_node(ctx: QuestionContext, v: int, t: int) -> NodeRoundState:
    return ctx.state(v, t)


def phase1_status(ctx: QuestionContext, v: int) -> Phase1Status:
    return ctx.status(v)


def residual_component(ctx: QuestionContext, v: int, cap: int | None = None) -> list[int]:
    """Vertices of ``v``'s connected component among residual vertices, sorted."""
    if ctx.status(v).kind is not Status.RESIDUAL:
        raise SimulationError(f"vertex {v} is not residual")
    if cap is None:
        cap = default_cap(ctx.params.delta_max_degree, ctx.oracle.n)
    seen = {v}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        for y in ctx.neighbors(x):
            if y not in seen and ctx.status(y).kind is Status.RESIDUAL:
                seen.add(y)
                if len(seen) > cap:
                    raise ComponentCapExceeded(v, len(seen), cap)
                queue.append(y)
    return sorted(seen)


def greedy_complete(component, adjacency) -> set[int]:
    """Lexicographically-first MIS of the subgraph induced on ``component``.

    ``adjacency`` maps each vertex to an iterable of neighbours; neighbours
    outside the component are ignored.
    """
    members = set(component)
    chosen: set[int] = set()
    for v in sorted(members):
        if not any(u in chosen for u in adjacency[v] if u in members):
            chosen.add(v)
    return chosen


@dataclass(frozen=True)
class Answer:
    vertex: int
    in_mis: bool
    phase1: Phase1Status
    probes_used: int
    component_size: int = 0


def _answer_in(ctx: QuestionContext, v: int, cap: int | None, comp_cache: dict | None) -> Answer:
    before = ctx.oracle.probe_counter
    st = ctx.status(v)
    size = 0
    if st.kind is Status.IN_MIS:
        in_mis = True
    elif st.kind is Status.DOMINATED:
        in_mis = False
    else:
        if comp_cache is not None and v in comp_cache:
            chosen, size = comp_cache[v]
        else:
            comp = residual_component(ctx, v, cap)
            chosen = greedy_complete(comp, ctx.revealed)
            size = len(comp)
            if comp_cache is not None:
                for u in comp:
                    comp_cache[u] = (chosen, size)
        in_mis = v in chosen
    return Answer(v, in_mis, st, ctx.oracle.probe_counter - before, size)


def answer(graph: Graph, params: Params, v: int, *, cap: int | None = None, tape: Tape | None = None) -> Answer:
    """Answer one membership question with a fresh context and probe counter."""
    ctx = QuestionContext(Oracle(graph), params, tape)
    return _answer_in(ctx, int(v), cap, None)


@dataclass
class BatchResult:
    answers: list[Answer]
    shared_cache: bool

    @property
    def membership(self) -> dict[int, bool]:
        return {a.vertex: a.in_mis for a in self.answers}

    @property
    def probes(self) -> list[int]:
        return [a.probes_used for a in self.answers]


def answer_all(graph: Graph, params: Params, vertices=None, *, shared_cache: bool = False,
               cap: int | None = None) -> BatchResult:
    """Answer many questions.

    With ``shared_cache`` one context serves every question, so a question
    only pays for probes nobody before it made; answers are unchanged.
    """
    vertices = range(graph.n) if vertices is None else [int(v) for v in vertices]
    tape = Tape(params, graph.n)
    out = []
    if shared_cache:
        ctx = QuestionContext(Oracle(graph), params, tape)
        comp_cache: dict = {}
        for v in vertices:
            out.append(_answer_in(ctx, v, cap, comp_cache))
    else:
        for v in vertices:
            out.append(answer(graph, params, v, cap=cap, tape=tape))
    return BatchResult(out, shared_cache)
