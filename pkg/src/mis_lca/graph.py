"""Immutable simple graphs, the probe-counted adjacency oracle, generators and
edge-list I/O."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx
import numpy as np


class GraphError(ValueError):
    """Invalid graph input (bad vertex id, unrealizable parameters, ...)."""


class EdgeListParseError(GraphError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class Graph:
    """Undirected simple graph on vertices ``0..n-1`` in CSR form.

    Adjacency lists are strictly ascending. The object is immutable after
    construction; ``max_degree`` is computed once.
    """

    __slots__ = ("n", "indptr", "indices", "max_degree", "_adj")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray, *, check: bool = True):
        self.n = int(n)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        deg = np.diff(self.indptr)
        self.max_degree = int(deg.max()) if self.n else 0
        self._adj = None
        if check:
            _check_csr(self)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build from an iterable of ``(u, v)`` pairs.

        Self-loops and duplicate edges are rejected rather than silently dropped.
        """
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        if arr.size == 0:
            return cls(n, np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))
        arr = arr.reshape(-1, 2)
        if arr.min() < 0 or arr.max() >= n:
            raise GraphError(f"vertex id out of range [0, {n})")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise GraphError("self-loop")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        key = lo * n + hi
        if np.unique(key).size != key.size:
            raise GraphError("duplicate edge")
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n, indptr, dst, check=False)

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "Graph":
        nodes = sorted(g.nodes())
        if nodes != list(range(len(nodes))):
            g = nx.convert_node_labels_to_integers(g, ordering="sorted")
        return cls.from_edges(g.number_of_nodes(), np.array(list(g.edges()), dtype=np.int64).reshape(-1, 2))

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @property
    def adjacency(self) -> list[tuple[int, ...]]:
        # Python tuples are much faster to iterate than numpy slices in the LCA
        if self._adj is None:
            ind = self.indices.tolist()
            ptr = self.indptr.tolist()
            self._adj = [tuple(ind[ptr[v]:ptr[v + 1]]) for v in range(self.n)]
        return self._adj

    @property
    def num_edges(self) -> int:
        return int(self.indices.size // 2)

    def edges(self) -> np.ndarray:
        """Canonical edge array, each edge once as (smaller, larger), sorted."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        mask = src < self.indices
        return np.stack([src[mask], self.indices[mask]], axis=1)

    def induced_subgraph(self, vertices) -> tuple["Graph", np.ndarray]:
        """Subgraph induced by ``vertices``; returns it with the old-id array."""
        keep = np.unique(np.asarray(list(vertices), dtype=np.int64))
        remap = np.full(self.n, -1, dtype=np.int64)
        remap[keep] = np.arange(keep.size)
        e = self.edges()
        if e.size:
            e = remap[e]
            e = e[(e >= 0).all(axis=1)]
        return Graph.from_edges(int(keep.size), e), keep

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges().tolist())
        return g

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __hash__(self):
        return hash((self.n, self.indices.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.num_edges}, max_degree={self.max_degree})"


def _check_csr(g: Graph) -> None:
    if g.indptr.shape != (g.n + 1,) or g.indptr[0] != 0 or g.indptr[-1] != g.indices.size:
        raise GraphError("malformed CSR offsets")
    if g.indices.size == 0:
        return
    if g.indices.min() < 0 or g.indices.max() >= g.n:
        raise GraphError("neighbor id out of range")
    src = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.indptr))
    if np.any(src == g.indices):
        raise GraphError("self-loop")
    # strictly ascending within each row
    same_row = src[1:] == src[:-1]
    if np.any(same_row & (g.indices[1:] <= g.indices[:-1])):
        raise GraphError("adjacency lists must be strictly ascending")
    fwd = np.sort(src * g.n + g.indices)
    bwd = np.sort(g.indices * g.n + src)
    if not np.array_equal(fwd, bwd):
        raise GraphError("adjacency is not symmetric")


@dataclass
class Oracle:
    """Probe-counted access to a graph, mirroring the (v, i) query model.

    Repeated identical probes are charged every time; callers cache.
    """

    graph: Graph
    probe_counter: int = 0
    log_probes: bool = False
    probe_log: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.graph.n

    def _check(self, v) -> int:
        if not isinstance(v, (int, np.integer)) or not 0 <= v < self.graph.n:
            raise GraphError(f"vertex {v!r} out of range [0, {self.graph.n})")
        return int(v)

    def neighbor_probe(self, v: int, i: int):
        """Return the ``i``-th smallest neighbor of ``v`` (1-based) or None."""
        v = self._check(v)
        if i < 1:
            raise GraphError(f"probe index must be >= 1, got {i}")
        self.probe_counter += 1
        if self.log_probes:
            self.probe_log.append((v, i))
        g = self.graph
        lo = g.indptr[v]
        if i > g.indptr[v + 1] - lo:
            return None
        return int(g.indices[lo + i - 1])

    def reveal_neighbors(self, v: int) -> tuple[int, ...]:
        """All neighbors of ``v``, probing until the oracle answers None.

        Costs exactly ``deg(v) + 1`` probes.
        """
        v = self._check(v)
        if self.log_probes:
            out = []
            i = 1
            while (u := self.neighbor_probe(v, i)) is not None:
                out.append(u)
                i += 1
            return tuple(out)
        nbrs = self.graph.adjacency[v]
        self.probe_counter += len(nbrs) + 1
        return nbrs

    def reset(self) -> None:
        self.probe_counter = 0
        self.probe_log.clear()


# generators -------------------------------------------------------------

GENERATOR_KINDS = ("cycle", "path", "complete", "star", "d_regular_random", "gnp", "grid2d")


def gnp_p_for_max_degree(n: int, target: int) -> float:
    """Edge probability whose expected maximum degree in G(n, p) is about ``target``.

    Picks the mean degree c for which ``n * P[Poisson(c) >= target]`` is closest to 1.
    """
    if target < 1 or n < 2:
        raise GraphError("need n >= 2 and target >= 1")

    def excess(c):
        # P[Poisson(c) >= target]
        term = math.exp(-c)
        cdf = term
        for k in range(1, target):
            term *= c / k
            cdf += term
        return n * max(0.0, 1.0 - cdf) - 1.0

    lo, hi = 1e-9, float(target)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            hi = mid
        else:
            lo = mid
    return min(1.0, lo / (n - 1))


def generate_graph(kind: str, seed: int = 0, **params) -> Graph:
    """Deterministic graph generator.

    ``kind`` is one of cycle(n), path(n), complete(n), star(leaves),
    d_regular_random(n, d), gnp(n, p) or gnp(n, dmax), grid2d(rows, cols).
    """
    seed = int(seed) % (1 << 64)

    def need(*names):
        missing = [k for k in names if k not in params]
        if missing:
            raise GraphError(f"{kind} needs parameters {missing}")
        return [int(params[k]) if k != "p" else float(params[k]) for k in names]

    if kind == "cycle":
        (n,) = need("n")
        if n < 3:
            raise GraphError("cycle needs n >= 3")
        return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])
    if kind == "path":
        (n,) = need("n")
        if n < 1:
            raise GraphError("path needs n >= 1")
        return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    if kind == "complete":
        (n,) = need("n")
        if n < 1:
            raise GraphError("complete needs n >= 1")
        return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
    if kind == "star":
        (leaves,) = need("leaves")
        if leaves < 0:
            raise GraphError("star needs leaves >= 0")
        return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])
    if kind == "grid2d":
        rows, cols = need("rows", "cols")
        if rows < 1 or cols < 1:
            raise GraphError("grid2d needs rows, cols >= 1")
        edges = [(r * cols + c, r * cols + c + 1) for r in range(rows) for c in range(cols - 1)]
        edges += [(r * cols + c, (r + 1) * cols + c) for r in range(rows - 1) for c in range(cols)]
        return Graph.from_edges(rows * cols, edges)
    if kind == "d_regular_random":
        n, d = need("n", "d")
        if n < 1 or d < 0 or d >= n or (n * d) % 2:
            raise GraphError(f"no simple {d}-regular graph on {n} vertices")
        return Graph.from_networkx(nx.random_regular_graph(d, n, seed=seed))
    if kind == "gnp":
        (n,) = need("n")
        if n < 1:
            raise GraphError("gnp needs n >= 1")
        if "p" in params:
            p = float(params["p"])
        elif "dmax" in params:
            p = gnp_p_for_max_degree(n, int(params["dmax"]))
        else:
            raise GraphError("gnp needs p or dmax")
        if not 0.0 <= p <= 1.0:
            raise GraphError("gnp needs 0 <= p <= 1")
        return Graph.from_networkx(nx.fast_gnp_random_graph(n, p, seed=seed))
    raise GraphError(f"unknown generator kind {kind!r}; expected one of {GENERATOR_KINDS}")


def parse_generator_spec(spec: str) -> tuple[str, dict]:
    """Parse ``kind:key=value,key=value`` (e.g. ``gnp:n=1000,p=0.01``)."""
    kind, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise GraphError(f"bad generator parameter {item!r}")
        params[key.strip()] = float(val) if key.strip() == "p" else int(val)
    return kind.strip(), params


# edge-list files ----------------------------------------------------------

def dump_edge_list(g: Graph) -> str:
    """Canonical text: one ``u v`` line per edge, u < v, sorted."""
    return "".join(f"{u} {v}\n" for u, v in g.edges().tolist())


def save_edge_list(g: Graph, path) -> None:
    Path(path).write_text(dump_edge_list(g))


def parse_edge_list(text: str, n: int | None = None) -> Graph:
    edges = []
    seen = set()
    top = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListParseError(lineno, f"expected two vertex ids, got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(lineno, f"non-integer vertex id in {raw!r}") from None
        if u < 0 or v < 0:
            raise EdgeListParseError(lineno, "negative vertex id")
        if u == v:
            raise EdgeListParseError(lineno, f"self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise EdgeListParseError(lineno, f"duplicate edge {key[0]} {key[1]}")
        seen.add(key)
        edges.append(key)
        top = max(top, key[1])
    if n is None:
        n = top + 1
    elif top >= n:
        raise GraphError(f"vertex {top} out of range for n={n}")
    return Graph.from_edges(n, edges)


def load_edge_list(path, n: int | None = None) -> Graph:
    return parse_edge_list(Path(path).read_text(), n=n)
