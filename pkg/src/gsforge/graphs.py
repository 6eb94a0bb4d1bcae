"""Target graphs for photonic graph-state generation.

A :class:`Graph` is an undirected simple graph. Builders cover the three
families this toolkit compiles circuits for: rectangular lattices (cluster
states), depth-2 trees, and repeater graph states (a fully connected core
with one leaf per core vertex). Local complementation is provided because
a Pauli-Y measurement on a vertex acts on the underlying graph by
complementing its neighborhood and deleting it; the verifier uses that
rule to relate tree and repeater targets.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .tableau import StabilizerTableau


def _normalize_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices 0..vertex_count-1.

    Parameters
    ----------
    vertex_count : int
        Number of vertices.
    edges : frozenset of (int, int)
        Edge set; each pair stored with the smaller index first.
    labels : dict, optional
        Per-vertex role tags. Not part of equality.
    """

    vertex_count: int
    edges: frozenset
    labels: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.vertex_count < 0:
            raise ValueError("vertex_count must be non-negative")
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u},{v}) out of range")
            if u > v:
                raise ValueError(f"edge ({u},{v}) not normalized")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> list[int]:
        """Sorted neighbor list of vertex v."""
        if not 0 <= v < self.vertex_count:
            raise ValueError(f"vertex {v} out of range")
        out = [b if a == v else a for a, b in self.edges if v in (a, b)]
        return sorted(out)

    def has_edge(self, u: int, v: int) -> bool:
        return _normalize_edge(u, v) in self.edges

    def to_json(self) -> str:
        """Serialize to the canonical JSON form.

        Edge pairs are ascending and the edge list is sorted
        lexicographically, so equal graphs serialize byte-identically.
        """
        edges = sorted(self.edges)
        return json.dumps({"n": self.vertex_count, "edges": [list(e) for e in edges]},
                          separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Graph":
        obj = json.loads(text)
        return from_edges(obj["n"], [tuple(e) for e in obj["edges"]])


def from_edges(vertex_count: int, edges, labels: dict | None = None) -> Graph:
    """Build a Graph from an iterable of (u, v) pairs in any order."""
    norm = frozenset(_normalize_edge(u, v) for u, v in edges)
    return Graph(vertex_count, norm, labels or {})


def build_cluster(k: int, n: int) -> Graph:
    """k x n rectangular lattice; vertex (r, c) has index r*n + c.

    Parameters
    ----------
    k : int
        Rows (photon generation units).
    n : int
        Columns (emission cycles).
    """
    if k < 1 or n < 1:
        raise ValueError("cluster dimensions must be >= 1")
    edges = []
    for r in range(k):
        for c in range(n):
            v = r * n + c
            if c + 1 < n:
                edges.append((v, v + 1))
            if r + 1 < k:
                edges.append((v, v + n))
    return from_edges(k * n, edges)


def build_tree(branching) -> Graph:
    """Rooted tree from a branching vector.

    Vertex 0 is the root; children are numbered breadth-first, so for a
    depth-2 vector [b0, b1] the level-1 vertices are 1..b0 and the leaves
    of level-1 vertex i are contiguous after them.
    """
    branching = list(branching)
    if not branching:
        raise ValueError("branching vector must be nonempty")
    if any(b < 1 for b in branching):
        raise ValueError("branching parameters must be >= 1")
    edges = []
    level = [0]
    next_id = 1
    for b in branching:
        nxt = []
        for parent in level:
            for _ in range(b):
                edges.append((parent, next_id))
                nxt.append(next_id)
                next_id += 1
        level = nxt
    labels = {0: "root"}
    return from_edges(next_id, edges, labels)


def build_rgs(b0: int) -> Graph:
    """Repeater graph state: K_{b0} core, one leaf per core vertex.

    Core vertices are 0..b0-1; the leaf of core vertex i is b0 + i.
    """
    if b0 < 2:
        raise ValueError("rgs requires b0 >= 2")
    edges = list(itertools.combinations(range(b0), 2))
    edges += [(i, b0 + i) for i in range(b0)]
    labels = {i: "core" for i in range(b0)}
    labels.update({b0 + i: "leaf" for i in range(b0)})
    return from_edges(2 * b0, edges, labels)


def local_complement(g: Graph, v: int) -> Graph:
    """Complement the induced subgraph on the neighborhood of v."""
    if not 0 <= v < g.vertex_count:
        raise ValueError(f"vertex {v} out of range")
    nbrs = g.neighbors(v)
    edges = set(g.edges)
    for a, b in itertools.combinations(nbrs, 2):
        e = _normalize_edge(a, b)
        if e in edges:
            edges.remove(e)
        else:
            edges.add(e)
    return Graph(g.vertex_count, frozenset(edges), dict(g.labels))


def stabilizers_of(g: Graph) -> StabilizerTableau:
    """Graph-state generators: one row X_v prod_{u in N(v)} Z_u per vertex."""
    n = g.vertex_count
    adj = np.zeros((n, n), dtype=np.uint8)
    for u, v in g.edges:
        adj[u, v] = 1
        adj[v, u] = 1
    return StabilizerTableau(np.eye(n, dtype=np.uint8), adj, np.zeros(n))


def remove_vertex(g: Graph, v: int) -> Graph:
    """Delete vertex v and reindex vertices above it down by one."""
    if not 0 <= v < g.vertex_count:
        raise ValueError(f"vertex {v} out of range")

    def shift(u):
        return u - 1 if u > v else u

    edges = [(shift(a), shift(b)) for a, b in g.edges if v not in (a, b)]
    labels = {shift(u): tag for u, tag in g.labels.items() if u != v}
    return from_edges(g.vertex_count - 1, edges, labels)
