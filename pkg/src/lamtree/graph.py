"""Graphs, cuts, laminar families and the contracted graph of a connectivity triple."""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ContractionCollapse, NotLaminar

log = logging.getLogger(__name__)


class UnionFind:
    def __init__(self, items=()):
        self.parent = {}
        for x in items:
            self.parent[x] = x

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


class Graph:
    """Undirected multigraph on vertices 0..n-1 with dense edge ids 0..m-1."""

    __slots__ = ("vertex_count", "edges", "adjacency")

    def __init__(self, vertex_count: int, edges: Iterable[tuple[int, int]]):
        edges = tuple((int(u), int(v)) for u, v in edges)
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise ValueError(f"edge ({u},{v}) outside 0..{vertex_count - 1}")
        adjacency = [[] for _ in range(vertex_count)]
        for eid, (u, v) in enumerate(edges):
            adjacency[u].append(eid)
            adjacency[v].append(eid)
        self.vertex_count = vertex_count
        self.edges = edges
        self.adjacency = tuple(tuple(a) for a in adjacency)

    @property
    def edge_count(self):
        return len(self.edges)

    def other(self, eid, v):
        u, w = self.edges[eid]
        return w if u == v else u

    def __repr__(self):
        return f"Graph(n={self.vertex_count}, m={len(self.edges)})"

    def __eq__(self, other):
        return isinstance(other, Graph) and (self.vertex_count, self.edges) == (
            other.vertex_count,
            other.edges,
        )

    def __hash__(self):
        return hash((self.vertex_count, self.edges))


def complete_graph(n: int) -> Graph:
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def delta_edges(g: Graph, s) -> frozenset:
    """Edges with exactly one endpoint in s."""
    s = set(s)
    return frozenset(e for e, (u, v) in enumerate(g.edges) if (u in s) != (v in s))


def inside_edges(g: Graph, s) -> frozenset:
    s = set(s)
    return frozenset(e for e, (u, v) in enumerate(g.edges) if u in s and v in s)


def cut_load(g: Graph, edge_set, s) -> int:
    s = set(s)
    return sum(1 for e in edge_set if (g.edges[e][0] in s) != (g.edges[e][1] in s))


def is_connected(g: Graph, edge_set=None) -> bool:
    if g.vertex_count <= 1:
        return True
    uf = UnionFind(range(g.vertex_count))
    components = g.vertex_count
    for e in range(g.edge_count) if edge_set is None else edge_set:
        u, v = g.edges[e]
        if uf.union(u, v):
            components -= 1
    return components == 1


def is_spanning_tree(g: Graph, edge_set) -> bool:
    edge_set = list(edge_set)
    if len(set(edge_set)) != len(edge_set):
        return False
    if len(edge_set) != max(g.vertex_count - 1, 0):
        return False
    uf = UnionFind(range(g.vertex_count))
    for e in edge_set:
        if not uf.union(*g.edges[e]):
            return False
    return True


def minimum_spanning_tree(g: Graph, costs, forced=(), allowed=None):
    """Kruskal on the allowed edges after inserting the forced ones.

    Returns the sorted edge list, or None if the forced edges contain a cycle
    or the allowed edges do not connect the graph. Ties go to the lower edge id.
    """
    uf = UnionFind(range(g.vertex_count))
    tree = []
    for e in forced:
        if not uf.union(*g.edges[e]):
            return None
        tree.append(e)
    candidates = range(g.edge_count) if allowed is None else allowed
    forced = set(forced)
    for e in sorted((e for e in candidates if e not in forced), key=lambda e: (costs[e], e)):
        if uf.union(*g.edges[e]):
            tree.append(e)
    if len(tree) != max(g.vertex_count - 1, 0):
        return None
    return sorted(tree)


def tree_path(g: Graph, tree, a, b):
    """Edge ids on the path from a to b inside the tree."""
    adj = {}
    for e in tree:
        u, v = g.edges[e]
        adj.setdefault(u, []).append((v, e))
        adj.setdefault(v, []).append((u, e))
    prev = {a: None}
    stack = [a]
    while stack:
        x = stack.pop()
        if x == b:
            break
        for y, e in adj.get(x, ()):
            if y not in prev:
                prev[y] = (x, e)
                stack.append(y)
    if b not in prev:
        return None
    path = []
    x = b
    while prev[x] is not None:
        x, e = prev[x]
        path.append(e)
    return path


def set_partitions(items: Sequence):
    """All partitions of a sorted sequence, each as a tuple of sorted tuples.

    Classes come ordered by their minimum, so every partition is emitted once in
    canonical form.
    """
    items = list(items)
    if not items:
        yield ()
        return

    def grow(i, blocks):
        if i == len(items):
            yield tuple(tuple(b) for b in blocks)
            return
        for b in blocks:
            b.append(items[i])
            yield from grow(i + 1, blocks)
            b.pop()
        blocks.append([items[i]])
        yield from grow(i + 1, blocks)
        blocks.pop()

    yield from grow(0, [])


def canonical_partition(classes) -> tuple:
    blocks = [tuple(sorted(c)) for c in classes if c]
    return tuple(sorted(blocks))


@dataclass(frozen=True)
class CutSet:
    members: frozenset
    lower: int = 0
    upper: int = 0

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))


@dataclass(frozen=True)
class CutFamily:
    sets: tuple
    kind: str = "laminar"

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(self.sets))
        if self.kind not in ("chain", "laminar"):
            raise ValueError(f"unknown family kind {self.kind!r}")

    def __len__(self):
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def validate(self, vertex_count: int):
        everything = frozenset(range(vertex_count))
        for i, cs in enumerate(self.sets):
            if not cs.members or cs.members == everything or not cs.members <= everything:
                raise ValueError(f"set {i} must be a nonempty proper vertex subset")
            if cs.lower < 0 or cs.lower > cs.upper:
                raise ValueError(f"set {i} has bounds {cs.lower}..{cs.upper}")
        for i, a in enumerate(self.sets):
            for j in range(i + 1, len(self.sets)):
                b = self.sets[j]
                if a.members == b.members:
                    raise NotLaminar(f"sets {i} and {j} coincide")
                if a.members & b.members and not (
                    a.members <= b.members or b.members <= a.members
                ):
                    raise NotLaminar(f"sets {i} and {j} cross")
        if self.kind == "chain":
            for i in range(len(self.sets) - 1):
                if not self.sets[i].members < self.sets[i + 1].members:
                    raise NotLaminar(f"chain sets {i} and {i + 1} are not strictly nested")
        return self


def laminar_width(family) -> int:
    """Largest number of pairwise disjoint sets; for a laminar family this is
    the number of inclusion-minimal members."""
    sets = [cs.members if isinstance(cs, CutSet) else frozenset(cs) for cs in family]
    return sum(1 for a in sets if not any(b < a for b in sets))


def is_laminar(sets) -> bool:
    sets = [frozenset(s) for s in sets]
    for i, a in enumerate(sets):
        for b in sets[i + 1 :]:
            if a & b and not (a <= b or b <= a):
                return False
    return True


@dataclass(frozen=True, order=True)
class ConnectivityTriple:
    """Cut S, crossing edges F and a partition of F's outside endpoints."""

    cut: frozenset
    crossing: tuple = ()
    pattern: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "cut", frozenset(self.cut))
        object.__setattr__(self, "crossing", tuple(sorted(self.crossing)))
        object.__setattr__(self, "pattern", canonical_partition(self.pattern))

    def outside_endpoints(self, g: Graph) -> tuple:
        ends = set()
        for e in self.crossing:
            u, v = g.edges[e]
            ends.add(v if u in self.cut else u)
        return tuple(sorted(ends))

    def validate(self, g: Graph):
        crossing = delta_edges(g, self.cut)
        if not set(self.crossing) <= crossing:
            raise ValueError("crossing edges must leave the cut")
        flat = sorted(v for c in self.pattern for v in c)
        if flat != list(self.outside_endpoints(g)):
            raise ValueError("pattern must partition the outside endpoints")
        return self

    def __repr__(self):
        return (
            f"Triple(S={sorted(self.cut)}, F={list(self.crossing)}, "
            f"C={[list(c) for c in self.pattern]})"
        )


def empty_triple() -> ConnectivityTriple:
    return ConnectivityTriple(frozenset())


def full_triple(n: int) -> ConnectivityTriple:
    return ConnectivityTriple(frozenset(range(n)))


@dataclass
class Contraction:
    graph: Graph
    edge_ids: tuple  # contracted edge id -> original edge id
    discarded: tuple  # original E[S] edges that became loops
    vertex_of: dict = field(default_factory=dict)  # original vertex -> contracted vertex

    def local_index(self):
        return {e: i for i, e in enumerate(self.edge_ids)}


def build_contracted_graph(g: Graph, t: ConnectivityTriple) -> Contraction:
    """G[S] plus F, with the classes of the pattern and the edges of F contracted.

    Spanning trees of the result are exactly the left-compatible subsets of E[S].
    Raises ContractionCollapse when an edge of F closes a cycle, which leaves no
    left-compatible set at all.
    """
    cut = t.cut
    if cut and not t.crossing and len(cut) < g.vertex_count:
        raise ContractionCollapse(f"{t!r} cannot be completed without crossing edges")
    outside = t.outside_endpoints(g)
    uf = UnionFind(sorted(cut) + list(outside))
    for block in t.pattern:
        for v in block[1:]:
            uf.union(block[0], v)
    for e in t.crossing:
        if not uf.union(*g.edges[e]):
            raise ContractionCollapse(f"crossing edge {e} forms a cycle under {t!r}")
    roots = {}
    for v in sorted(uf.parent):
        roots.setdefault(uf.find(v), len(roots))
    vertex_of = {v: roots[uf.find(v)] for v in uf.parent}
    edges, ids, dropped = [], [], []
    for e in sorted(inside_edges(g, cut)):
        u, v = g.edges[e]
        cu, cv = vertex_of[u], vertex_of[v]
        if cu == cv:
            dropped.append(e)
        else:
            edges.append((cu, cv))
            ids.append(e)
    if dropped:
        log.debug("contraction of %r dropped loops %s", t, dropped)
    return Contraction(Graph(len(roots), edges), tuple(ids), tuple(dropped), vertex_of)


def canonical_right_completion(g: Graph, t: ConnectivityTriple):
    """A right-compatible forest for t, as vertex pairs outside S.

    Each class of the pattern becomes a star around its smallest vertex and every
    outside vertex that is not an endpoint of F hangs off the first class.
    """
    outside = sorted(set(range(g.vertex_count)) - t.cut)
    if not t.pattern:
        return [(outside[0], v) for v in outside[1:]] if not t.cut else []
    pairs = []
    for block in t.pattern:
        pairs += [(block[0], v) for v in block[1:]]
    covered = {v for block in t.pattern for v in block}
    hub = t.pattern[0][0]
    pairs += [(hub, v) for v in outside if v not in covered]
    return pairs
