"""Global round-synchronous simulation of the near-MIS marking algorithm.

Every vertex runs the same four steps per round. Relevant-neighbour sets are
kept as one membership byte per (round, directed edge); they only ever
shrink. The per-round kernels are compiled with numba and read the previous
phase's arrays before writing the next, so the result does not depend on
vertex order.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numba
import numpy as np

from .graph import Graph
from .states import PASS, NodeRoundState, Phase1Status, Verdict, fail
from .tape import Params, ParamError, level_table, start_exponent

_INF = np.int64(1) << np.int64(62)


@numba.njit(cache=True, inline="always")
def _threshold(gap, K):
    # 2**(5*gap) + K, saturating
    if 5 * gap >= 61:
        return _INF
    return (np.int64(1) << np.int64(5 * gap)) + K


@numba.njit(cache=True)
def _init_kernel(indptr, indices, lev, e1, T, K, member, nsize, sched, expo, decl, reads_cur):
    n = indptr.shape[0] - 1
    nd = 0
    for v in range(n):
        expo[v, 1] = e1
        lo, hi = indptr[v], indptr[v + 1]
        reads_cur[v, 1] += hi - lo
        for t in range(1, T + 1):
            cnt = 0
            for k in range(lo, hi):
                if e1 + 1 - t <= lev[indices[k], t]:
                    member[t, k] = 1
                    cnt += 1
            nsize[v, t] = cnt
        for t in range(1, T + 1):
            size = nsize[v, t]
            if size > _threshold(t - 1, K):
                z = 0
                while size > _threshold(t + z, K):
                    z += 1
                end = min(T, t + z)
                for s in range(t, end + 1):
                    sched[v, s] = True
                decl[nd, 0] = v
                decl[nd, 1] = 0
                decl[nd, 2] = t
                decl[nd, 3] = 0
                decl[nd, 4] = end
                decl[nd, 5] = z
                nd += 1
    return nd


@numba.njit(cache=True)
def _round_kernel(t, indptr, indices, lev, T, K, member, nsize, sched, expo, marked, sleeping,
                  dead, lp, lp_cur, join_round, death_round, live, decl, nd, reads_cur,
                  max_reads, arg_reads, max_n, arg_n, reads_full, record_full):
    n = indptr.shape[0] - 1
    active = np.zeros(n, dtype=np.bool_)

    # phase A: step 1 (consume missed joins), step 2 (refine future sets), marking
    for v in range(n):
        if join_round[v] != 0 or dead[v, t - 1]:
            live[v] = False
            continue
        active[v] = True
        lo, hi = indptr[v], indptr[v + 1]
        sl = sched[v, t]
        sleeping[v, t] = sl
        died = False
        if not sl:
            for r in range(lp_cur[v] + 1, t):
                cnt = 0
                for k in range(lo, hi):
                    if member[r, k]:
                        cnt += 1
                        if join_round[indices[k]] == r:
                            died = True
                reads_cur[v, r] += cnt
                if died:
                    break
            lp_cur[v] = t - 1
        if died:
            live[v] = False
            dead[v, t] = True
            death_round[v] = t
            expo[v, t + 1] = expo[v, t]
            continue
        for t2 in range(t + 1, T + 1):
            if sched[v, t2]:
                continue
            d = t2 - t
            r_lo = max(1, t - 2 * d)
            r_hi = t - d - 1
            for r in range(r_lo, r_hi + 1):
                reads_cur[v, r] += nsize[v, t2]
                cnt = 0
                for k in range(lo, hi):
                    if member[t2, k]:
                        u = indices[k]
                        if dead[u, r] or expo[u, r] - (t2 - r) > lev[u, t2]:
                            member[t2, k] = 0
                        else:
                            cnt += 1
                nsize[v, t2] = cnt
                if cnt > _threshold(t2 - r, K):
                    end = min(T, t2 + (t2 - r))
                    for s in range(t2, end + 1):
                        sched[v, s] = True
                    decl[nd, 0] = v
                    decl[nd, 1] = t
                    decl[nd, 2] = t2
                    decl[nd, 3] = r
                    decl[nd, 4] = end
                    decl[nd, 5] = t2 - r
                    nd += 1
                    break
        live[v] = True
        marked[v, t] = expo[v, t] <= lev[v, t]

    # phase B: step 3 / step 4
    for v in range(n):
        if not live[v]:
            continue
        if sched[v, t]:
            expo[v, t + 1] = expo[v, t] + 1
            continue
        blocked = False
        cnt = 0
        for k in range(indptr[v], indptr[v + 1]):
            if member[t, k]:
                cnt += 1
                if marked[indices[k], t]:
                    blocked = True
        reads_cur[v, t] += cnt
        if marked[v, t] and not blocked:
            join_round[v] = t
            expo[v, t + 1] = expo[v, t]
        elif blocked:
            expo[v, t + 1] = expo[v, t] + 1
        else:
            expo[v, t + 1] = max(1, expo[v, t] - 1)

    # phase C: awake survivors learn of this round's joins
    for v in range(n):
        if live[v] and not sched[v, t] and join_round[v] != t:
            for k in range(indptr[v], indptr[v + 1]):
                if member[t, k] and join_round[indices[k]] == t:
                    dead[v, t] = True
                    death_round[v] = t
                    break
            lp_cur[v] = t
        if not active[v]:
            expo[v, t + 1] = expo[v, t]
            dead[v, t] = dead[v, t - 1]
        lp[v, t] = lp_cur[v]

    # influence ledger
    for v in range(n):
        if not active[v]:
            continue
        for tp in range(1, t + 1):
            c = reads_cur[v, tp]
            if c > max_reads[t, tp]:
                max_reads[t, tp] = c
                arg_reads[t, tp] = v
            if record_full:
                reads_full[v, t, tp] = c
            reads_cur[v, tp] = 0
        if not live[v]:
            continue  # died in step 1, never refined
        for t2 in range(t + 1, T + 1):
            if not sched[v, t2] and nsize[v, t2] > max_n[t, t2]:
                max_n[t, t2] = nsize[v, t2]
                arg_n[t, t2] = v
    return nd



# python side -------------------------------------------------------------

# columns of the sleep declaration table
# extent is z for initial declarations and t'' - r for in-run ones
DECL_FIELDS = ("vertex", "declared_in_round", "target_round", "message_round", "last_round", "extent")


class SimState:
    """Mutable arrays of a run in progress. Created by :func:`initialize`."""

    def __init__(self, g: Graph, params: Params, record_reads: bool = False, vertex_ids=None):
        if g.max_degree > max(params.delta_max_degree, 0):
            raise ParamError(f"graph has max degree {g.max_degree} > delta_max_degree {params.delta_max_degree}")
        n, T = g.n, params.T
        self.graph = g
        self.params = params
        # tape rows are keyed by original ids when g is a relabelled subgraph
        ids = np.arange(n) if vertex_ids is None else np.asarray(vertex_ids, dtype=np.int64)
        if ids.shape != (n,):
            raise ParamError("vertex_ids must list one id per vertex")
        self.lev = level_table(params, ids)
        self.e1 = start_exponent(params.delta_max_degree)
        E = g.indices.shape[0]
        self.member = np.zeros((T + 2, E), dtype=np.uint8)
        self.nsize = np.zeros((n, T + 2), dtype=np.int64)
        self.sched = np.zeros((n, T + 2), dtype=np.bool_)
        self.expo = np.zeros((n, T + 2), dtype=np.int32)
        self.marked = np.zeros((n, T + 1), dtype=np.bool_)
        self.sleeping = np.zeros((n, T + 1), dtype=np.bool_)
        self.dead = np.zeros((n, T + 1), dtype=np.bool_)
        self.lp = np.zeros((n, T + 1), dtype=np.int32)
        self.lp_cur = np.zeros(n, dtype=np.int32)
        self.join_round = np.zeros(n, dtype=np.int32)
        self.death_round = np.zeros(n, dtype=np.int32)
        self.live = np.zeros(n, dtype=np.bool_)
        self.alive = np.zeros((n, T + 1), dtype=np.bool_)  # active and past step 1
        # every (v, t'') pair is declared at most once
        self.decl = np.zeros((n * T + 1, 6), dtype=np.int32)
        self.reads_cur = np.zeros((n, T + 2), dtype=np.int64)
        self.max_reads = np.zeros((T + 2, T + 2), dtype=np.int64)
        self.arg_reads = np.full((T + 2, T + 2), -1, dtype=np.int64)
        self.max_n = np.zeros((T + 2, T + 2), dtype=np.int64)
        self.arg_n = np.full((T + 2, T + 2), -1, dtype=np.int64)
        self.record_reads = bool(record_reads)
        shape = (n, T + 1, T + 1) if record_reads else (1, 1, 1)
        self.reads_full = np.zeros(shape, dtype=np.int64)
        self.nd = 0
        self.rounds_done = -1

    def relevant_set(self, v: int, t: int) -> list[int]:
        """Current members of N(v, t)."""
        lo, hi = self.graph.indptr[v], self.graph.indptr[v + 1]
        sel = self.member[t, lo:hi].astype(bool)
        return self.graph.indices[lo:hi][sel].tolist()


def initialize(g: Graph, params: Params, record_reads: bool = False, vertex_ids=None) -> SimState:
    """Build every relevant set from the tape and apply the initial sleep rule."""
    st = SimState(g, params, record_reads, vertex_ids)
    st.nd = _init_kernel(g.indptr, g.indices, st.lev, st.e1, params.T, params.K, st.member, st.nsize,
                         st.sched, st.expo, st.decl, st.reads_cur)
    st.rounds_done = 0
    return st


def run_round(st: SimState, t: int) -> SimState:
    """Execute round ``t`` for every vertex; updates ``st`` in place."""
    if t != st.rounds_done + 1 or not 1 <= t <= st.params.T:
        raise ParamError(f"round {t} cannot follow round {st.rounds_done}")
    g = st.graph
    st.nd = _round_kernel(t, g.indptr, g.indices, st.lev, st.params.T, st.params.K, st.member, st.nsize,
                          st.sched, st.expo, st.marked, st.sleeping, st.dead, st.lp, st.lp_cur,
                          st.join_round, st.death_round, st.live, st.decl, st.nd, st.reads_cur,
                          st.max_reads, st.arg_reads, st.max_n, st.arg_n, st.reads_full, st.record_reads)
    st.alive[:, t] = st.live
    st.rounds_done = t
    return st


@dataclass(frozen=True)
class InfluenceLedger:
    """Worst-case read counts and relevant-set sizes, with the vertex attaining each.

    ``max_reads[t, t']`` is the largest number of round-``t'`` messages any
    vertex read during round ``t``; ``max_nsize[t, t'']`` the largest
    ``|N(v, t'')|`` at the end of round ``t`` over vertices not sleeping in
    ``t''``. ``reads`` holds the per-vertex table when it was recorded.
    """

    max_reads: np.ndarray
    argmax_reads: np.ndarray
    max_nsize: np.ndarray
    argmax_nsize: np.ndarray
    reads: np.ndarray | None = None


class Outcome:
    """Result of a full run: the partition of V plus traces and ledger."""

    def __init__(self, st: SimState):
        g, T = st.graph, st.params.T
        self.graph = g
        self.params = st.params
        self.join_round = st.join_round.copy()
        in_i = self.join_round > 0
        self.independent_set = np.flatnonzero(in_i)
        # dominator: smallest id among the neighbours that joined earliest
        n = g.n
        src = np.repeat(np.arange(n), np.diff(g.indptr))
        dst = g.indices
        hit = in_i[dst]
        key = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
        np.minimum.at(key, src[hit], self.join_round[dst[hit]].astype(np.int64) * (n + 1) + dst[hit])
        self.dominator = np.where(key < np.iinfo(np.int64).max, key % (n + 1), -1)
        self.dominator[in_i] = -1
        dom = self.dominator >= 0
        self.dominated = np.flatnonzero(dom)
        self.residual = np.flatnonzero(~in_i & ~dom)
        self.exponent = st.expo.copy()
        self.exponent[:, 0] = st.e1
        self.marked = st.marked.copy()
        self.alive = st.alive.copy()
        self.sleeping = st.sleeping.copy()
        self.dead = st.dead.copy()
        self.last_processed = st.lp.copy()
        self.death_round = st.death_round.copy()
        self.declarations = st.decl[: st.nd].copy()
        self.sleep_schedule = st.sched[:, : T + 1].copy()
        self.ledger = InfluenceLedger(
            st.max_reads.copy(), st.arg_reads.copy(), st.max_n.copy(), st.arg_n.copy(),
            st.reads_full.copy() if st.record_reads else None,
        )

    @property
    def n(self) -> int:
        return self.graph.n

    def state(self, v: int, t: int) -> NodeRoundState:
        T = self.params.T
        if not 0 <= t <= T:
            raise ParamError(f"round {t} outside [0, {T}]")
        if t == 0:
            e = int(self.exponent[v, 0])
            return NodeRoundState(e, e, False, False, False, False, 0)
        jr = int(self.join_round[v])
        return NodeRoundState(
            exponent=int(self.exponent[v, t]),
            next_exponent=int(self.exponent[v, t + 1]),
            marked=bool(self.marked[v, t]),
            sleeping=bool(self.sleeping[v, t]),
            dead=bool(self.dead[v, t]),
            joined=0 < jr <= t,
            last_processed=int(self.last_processed[v, t]),
        )

    def status(self, v: int) -> Phase1Status:
        if self.join_round[v]:
            return Phase1Status.in_mis()
        if self.dominator[v] >= 0:
            return Phase1Status.dominated(int(self.dominator[v]))
        return Phase1Status.residual()

    def residual_graph(self) -> tuple[Graph, np.ndarray]:
        return self.graph.induced_subgraph(self.residual)

    def residual_fraction(self) -> float:
        return self.residual.size / self.n if self.n else 0.0

    def per_round_counts(self) -> list[dict]:
        T = self.params.T
        jr = self.join_round
        rows = []
        for t in range(1, T + 1):
            active = ((jr == 0) | (jr >= t)) & ~self.dead[:, t - 1]
            rows.append({
                "round": t,
                "active": int(active.sum()),
                "sleeping": int(self.sleeping[:, t].sum()),
                "marked": int(self.marked[:, t].sum()),
                "joined": int((jr == t).sum()),
                "died": int((self.death_round == t).sum()),
            })
        return rows

    def to_dict(self) -> dict:
        return {
            "I": self.independent_set.tolist(),
            "dead": self.dominated.tolist(),
            "residual": self.residual.tolist(),
            "params": json.loads(self.params.to_json()),
            "per_round_counts": self.per_round_counts(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def trace_csv(self) -> str:
        """One row per (v, t) with the classification columns filled in."""
        from .diagnostics import classify_rounds

        rec = classify_rounds(self)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["v", "t", "exponent", "marked", "sleeping", "dead", "joined", "d_t", "class", "flags"])
        scale = 1 << self.params.bits
        for v in range(self.n):
            for t in range(1, self.params.T + 1):
                s = self.state(v, t)
                w.writerow([v, t, s.exponent, int(s.marked), int(s.sleeping), int(s.dead), int(s.joined),
                            repr(int(rec.mass[v, t]) / scale), rec.class_name(v, t), rec.flag_string(v, t)])
        return buf.getvalue()


def run(g: Graph, params: Params, record_reads: bool = False, vertex_ids=None) -> Outcome:
    """Initialize and execute all ``T`` rounds.

    ``vertex_ids`` gives the tape identity of each vertex (default: its index).
    """
    st = initialize(g, params, record_reads, vertex_ids)
    for t in range(1, params.T + 1):
        run_round(st, t)
    return Outcome(st)


def nsize_bound(params: Params, t: int, t2: int) -> int:
    return 2 ** (10 * (t2 - t + 1)) + params.K


def reads_bound(params: Params, t: int, tp: int) -> int:
    return 2 ** (25 * (t - tp + 1)) + params.K * (t - tp)


def assert_influence_bounds(ledger: InfluenceLedger, params: Params) -> Verdict:
    """Check the deterministic relevant-set and message-read bounds.

    Returns the first violation found, scanning rounds in order.
    """
    T = params.T
    for t in range(1, T + 1):
        for t2 in range(t + 1, T + 1):
            size = int(ledger.max_nsize[t, t2])
            if size > nsize_bound(params, t, t2):
                v = int(ledger.argmax_nsize[t, t2])
                return fail(f"|N({v},{t2})| = {size} at end of round {t} exceeds {nsize_bound(params, t, t2)}")
        for tp in range(1, t):
            c = int(ledger.max_reads[t, tp])
            if c > reads_bound(params, t, tp):
                v = int(ledger.argmax_reads[t, tp])
                return fail(f"vertex {v} read {c} round-{tp} messages in round {t}, "
                            f"bound {reads_bound(params, t, tp)}")
    return PASS
