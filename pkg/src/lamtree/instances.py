"""Problem instances shared by the solvers, the oracles and the file format."""

from dataclasses import dataclass, field

from .graph import CutFamily, CutSet, Graph, complete_graph, laminar_width
from .numerics import FEAS_TOL


@dataclass(frozen=True, eq=False)
class ConstrainedTreeInstance:
    graph: Graph
    costs: tuple
    family: CutFamily
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "costs", tuple(self.costs))
        if len(self.costs) != self.graph.edge_count:
            raise ValueError("one cost per edge required")
        self.family.validate(self.graph.vertex_count)

    @property
    def cuts(self):
        return [cs.members for cs in self.family]

    @property
    def vertex_count(self):
        return self.graph.vertex_count

    def float_costs(self):
        return [float(c) for c in self.costs]


class ChainInstance(ConstrainedTreeInstance):
    """Spanning tree with bounds on a chain S_1 < ... < S_k of cuts."""

    def __post_init__(self):
        if self.family.kind != "chain":
            object.__setattr__(self, "family", CutFamily(self.family.sets, "chain"))
        super().__post_init__()


class LaminarInstance(ConstrainedTreeInstance):
    """Spanning tree with bounds on a laminar family of cuts."""

    def __post_init__(self):
        super().__post_init__()

    @property
    def width(self):
        return laminar_width(self.family)

    def children(self):
        """Maximal proper subsets inside each family set, by index; key -1 is V."""
        sets = self.cuts
        out = {}
        for i in [-1] + list(range(len(sets))):
            outer = frozenset(range(self.vertex_count)) if i < 0 else sets[i]
            inner = [j for j, s in enumerate(sets) if s < outer]
            out[i] = [j for j in inner if not any(sets[j] < sets[h] for h in inner)]
        return out


def as_laminar(inst: ConstrainedTreeInstance) -> LaminarInstance:
    return LaminarInstance(inst.graph, inst.costs, CutFamily(inst.family.sets, "laminar"), dict(inst.metadata))


@dataclass(frozen=True, eq=False)
class MetricInstance:
    """Complete graph with metric lengths and an even parity set Q."""

    lengths: tuple
    parity: tuple
    anchor: int = -1
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = tuple(tuple(row) for row in self.lengths)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "parity", tuple(sorted(set(self.parity))))
        n = len(lengths)
        if any(len(row) != n for row in lengths):
            raise ValueError("distance matrix must be square")
        if len(self.parity) % 2 or len(self.parity) < 2:
            raise ValueError("parity set needs an even number (at least 2) of vertices")
        if not set(self.parity) <= set(range(n)):
            raise ValueError("parity set outside the vertex range")
        if self.anchor < 0:
            object.__setattr__(self, "anchor", self.parity[-1])
        if self.anchor not in self.parity:
            raise ValueError("anchor must belong to the parity set")
        object.__setattr__(self, "_graph", complete_graph(n))

    @property
    def n(self):
        return len(self.lengths)

    @property
    def graph(self) -> Graph:
        return self._graph

    def edge_lengths(self):
        return [float(self.lengths[u][v]) for u, v in self.graph.edges]

    def length(self, u, v):
        return float(self.lengths[u][v])

    def metric_violation(self, tol=FEAS_TOL):
        """First (u, v, w) with l(u,w) > l(u,v) + l(v,w), or None."""
        n, d = self.n, self.lengths
        for u in range(n):
            if abs(float(d[u][u])) > tol:
                return (u, u, u)
            for v in range(n):
                if abs(float(d[u][v]) - float(d[v][u])) > tol or float(d[u][v]) < -tol:
                    return (u, v, u)
        for u in range(n):
            for v in range(n):
                for w in range(n):
                    if float(d[u][w]) > float(d[u][v]) + float(d[v][w]) + tol:
                        return (u, v, w)
        return None


def chain_from_prefixes(graph, costs, prefixes, bounds, **metadata):
    sets = [CutSet(frozenset(p), a, b) for p, (a, b) in zip(prefixes, bounds)]
    return ChainInstance(graph, costs, CutFamily(sets, "chain"), metadata)
