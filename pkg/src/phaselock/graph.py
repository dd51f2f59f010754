"""Undirected graphs, oriented incidence matrices, and vertex bipartitions.

Conventions used throughout the package:

* Vertices are 0-indexed (the CLI converts from 1-indexed labels at the
  boundary).
* An edge is stored as an ordered pair (tail, head); the orientation is an
  arbitrary bookkeeping choice that fixes signs in the incidence matrix.
* The incidence matrix B has shape (n, n_edges) with B[tail, e] = -1 and
  B[head, e] = +1, so (B.T @ phi)[e] = phi[head] - phi[tail].
* A bipartition (V-, V+) is packed into an integer bitmask: bit i set means
  vertex i is in V+. The signed indicator x_P takes the value -1/2 on V- and
  +1/2 on V+, so the cut vector is c_P = B.T @ x_P with entries in {-1,0,+1}.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateEdgeError,
    EmptySideError,
    IndexOutOfRangeError,
    SelfLoopError,
    TooLargeError,
)

ENUMERATION_LIMIT = 25  # exhaustive partition streams refuse larger graphs


@dataclass(frozen=True)
class Graph:
    """A finite simple undirected graph with a fixed edge orientation."""

    n: int
    edges: tuple = field(default_factory=tuple)

    @property
    def n_edges(self):
        return len(self.edges)

    def tails(self):
        return np.fromiter((e[0] for e in self.edges), dtype=np.int32, count=self.n_edges)

    def heads(self):
        return np.fromiter((e[1] for e in self.edges), dtype=np.int32, count=self.n_edges)

    def neighbors(self, i):
        """Vertices adjacent to i, in edge order."""
        out = []
        for a, b in self.edges:
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return out

    def degree(self, i):
        return len(self.neighbors(i))


def build_graph(n, edges):
    """Validate and construct a Graph.

    Raises IndexOutOfRangeError, SelfLoopError, or DuplicateEdgeError; the
    reverse of an existing edge counts as a duplicate.
    """
    if n < 1:
        raise IndexOutOfRangeError("graph needs at least one vertex, got n=%d" % n)
    seen = set()
    clean = []
    for a, b in edges:
        a, b = int(a), int(b)
        if not (0 <= a < n and 0 <= b < n):
            raise IndexOutOfRangeError("edge (%d, %d) outside 0..%d" % (a, b, n - 1))
        if a == b:
            raise SelfLoopError("self-loop at vertex %d" % a)
        key = (min(a, b), max(a, b))
        if key in seen:
            raise DuplicateEdgeError("duplicate edge (%d, %d)" % (a, b))
        seen.add(key)
        clean.append((a, b))
    return Graph(n=n, edges=tuple(clean))


def complete_graph(n):
    """All-to-all graph on n vertices, edges in lexicographic order."""
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def ring_graph(n):
    """Cycle on n vertices."""
    return circulant_graph(n, (1,))


def path_graph(n):
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def circulant_graph(n, steps):
    """Circulant graph: vertex i is joined to i +/- s (mod n) for each step s.

    Steps are deduplicated against their mirror n - s; each undirected edge
    appears once, oriented from i to (i + s) mod n.
    """
    edges = []
    seen = set()
    for s in steps:
        s = int(s) % n
        if s == 0:
            raise SelfLoopError("circulant step 0 creates self-loops")
        for i in range(n):
            j = (i + s) % n
            key = (min(i, j), max(i, j))
            if key not in seen:
                seen.add(key)
                edges.append((i, j))
    return build_graph(n, edges)


def random_connected_graph(n, p, rng):
    """Erdos-Renyi G(n, p) resampled until connected (seeded, terminates a.s.)."""
    while True:
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
        try:
            g = build_graph(n, edges)
        except Exception:  # pragma: no cover - cannot happen for generated pairs
            continue
        if is_connected(g):
            return g


def incidence(g):
    """Oriented incidence matrix B, shape (n, n_edges), entries in {-1,0,+1}."""
    b = np.zeros((g.n, g.n_edges))
    for e, (tail, head) in enumerate(g.edges):
        b[tail, e] = -1.0
        b[head, e] = 1.0
    return b


def is_connected(g):
    """Breadth-first reachability from vertex 0. A single vertex is connected."""
    if g.n == 1:
        return True
    adj = [[] for _ in range(g.n)]
    for a, b in g.edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = np.zeros(g.n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    return bool(seen.all())


@dataclass(frozen=True)
class Partition:
    """A bipartition (V-, V+) of vertices 0..n-1 as a bitmask over V+."""

    n: int
    mask: int

    def __post_init__(self):
        if not (0 <= self.mask < (1 << self.n)):
            raise IndexOutOfRangeError("partition mask out of range for n=%d" % self.n)

    @classmethod
    def from_side(cls, n, plus_side):
        """Build from an iterable of vertices forming V+."""
        mask = 0
        for v in plus_side:
            if not (0 <= v < n):
                raise IndexOutOfRangeError("vertex %d outside 0..%d" % (v, n - 1))
            mask |= 1 << v
        return cls(n=n, mask=mask)

    def side(self, v):
        """+1 if v is in V+, -1 otherwise."""
        return 1 if (self.mask >> v) & 1 else -1

    @property
    def plus(self):
        return tuple(v for v in range(self.n) if (self.mask >> v) & 1)

    @property
    def minus(self):
        return tuple(v for v in range(self.n) if not (self.mask >> v) & 1)

    def indicator(self):
        """Signed indicator x_P with values -1/2 on V- and +1/2 on V+."""
        x = np.full(self.n, -0.5)
        for v in self.plus:
            x[v] = 0.5
        return x

    def is_proper(self):
        return 0 < self.mask < (1 << self.n) - 1


def enumerate_partitions(n):
    """Yield every proper bipartition of 0..n-1 with vertex 0 pinned to V-.

    Exactly 2**(n-1) - 1 partitions are produced (each unordered bipartition
    once). Refuses n > ENUMERATION_LIMIT.
    """
    if n > ENUMERATION_LIMIT:
        raise TooLargeError(
            "exhaustive enumeration needs n <= %d, got %d" % (ENUMERATION_LIMIT, n)
        )
    if n < 2:
        raise EmptySideError("no proper bipartition exists for n < 2")
    for mask in range(1, 1 << (n - 1)):
        yield Partition(n=n, mask=mask << 1)


def cut_edges(g, p):
    """Edges crossing the bipartition, as (edge_index, sign) pairs.

    The sign is the cut-vector entry (B.T @ x_P)[e]: +1 when the edge is
    oriented from V- to V+, -1 the other way. Both sides must be nonempty.
    """
    if p.n != g.n:
        raise IndexOutOfRangeError("partition is over %d vertices, graph has %d" % (p.n, g.n))
    if not p.is_proper():
        raise EmptySideError("both sides of the bipartition must be nonempty")
    out = []
    for e, (tail, head) in enumerate(g.edges):
        s = (p.side(head) - p.side(tail)) // 2
        if s != 0:
            out.append((e, s))
    return out


# --- plain-text graph files -------------------------------------------------
#
# Format: first non-comment line is the vertex count, then one "i j" pair per
# line, 0-indexed. '#' starts a comment; blank lines are ignored.

def read_graph_file(path):
    n = None
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if n is None:
                if len(parts) != 1:
                    raise IndexOutOfRangeError("first line must be the vertex count")
                n = int(parts[0])
                continue
            if len(parts) != 2:
                raise IndexOutOfRangeError("edge lines must be 'i j', got %r" % raw.strip())
            edges.append((int(parts[0]), int(parts[1])))
    if n is None:
        raise IndexOutOfRangeError("empty graph file %s" % path)
    return build_graph(n, edges)


def write_graph_file(g, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("%d\n" % g.n)
        for a, b in g.edges:
            fh.write("%d %d\n" % (a, b))
