"""Input checks shared by the estimators and the harness."""

from __future__ import annotations

import networkx as nx
import numpy as np

from .graph import Graph, GraphError


def check_graph(X) -> Graph:
    """Coerce ``X`` to a :class:`Graph`.

    Accepts a Graph, a networkx graph with integer nodes ``0..n-1``, or an
    ``(n, edges)`` pair.
    """
    if isinstance(X, Graph):
        return X
    if isinstance(X, nx.Graph):
        return Graph.from_networkx(X)
    if isinstance(X, tuple) and len(X) == 2:
        n, edges = X
        return Graph.from_edges(int(n), edges)
    raise GraphError(f"cannot interpret {type(X).__name__} as a graph")


def check_vertices(vertices, n: int) -> np.ndarray:
    """Validated 1-d int64 array of vertex ids; ``None`` means all vertices."""
    if vertices is None:
        return np.arange(n, dtype=np.int64)
    arr = np.atleast_1d(np.asarray(vertices))
    if arr.ndim != 1:
        raise GraphError("vertices must be a 1-d sequence")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        raise GraphError("vertex ids must be integers")
    arr = arr.astype(np.int64, copy=False)
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise GraphError(f"vertex id out of range [0, {n})")
    return arr


def check_seed(seed) -> int:
    s = int(seed)
    if not 0 <= s < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return s
