"""Metric Path TSP and shortest connected parity joins.

Pipeline: Held-Karp style LP, its narrow cuts, a tau-odd point together with a
tree that is odd on every small cut of the point, a cheapest parity
correction, and (optionally) shortcutting back to a spanning tree.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import kernels
from .chain_dp import TIE_TOL, is_tau_odd, run_chain_dp
from .errors import (
    NotConnectedJoin,
    NotLaminar,
    NumericalFailure,
    TooLarge,
    TooManyOddVertices,
)
from .extension import CutWindow, Target, lower_bound, solve_extension
from .graph import (
    CutFamily,
    CutSet,
    UnionFind,
    delta_edges,
    inside_edges,
    is_laminar,
    laminar_width,
    minimum_spanning_tree,
)
from .instances import ChainInstance, LaminarInstance, MetricInstance
from .laminar_dp import LaminarDp, TreeCell
from .numerics import FEAS_TOL, INT_TOL
from .polytope import EXHAUSTIVE_LIMIT

log = logging.getLogger(__name__)

MATCHING_LIMIT = 20
MAX_SEPARATION_ROUNDS = 500


def _edge_index(g):
    return {frozenset(uv): e for e, uv in enumerate(g.edges)}


def _cut_requirement(mask, parity_mask):
    return 1.0 if bin(mask & parity_mask).count("1") % 2 else 2.0


# ---------------------------------------------------------------- Held-Karp LP


@dataclass
class HeldKarp:
    x: list
    value: float
    cuts: list  # vertex sets whose constraints ended up in the LP
    rounds: int


def _mask_of(members):
    return sum(1 << v for v in members)


def _members(mask, n):
    return frozenset(v for v in range(n) if mask >> v & 1)


def _violated_exhaustive(inst, x, limit=25):
    """Most violated cut constraints, as (mask, requirement); excludes the anchor."""
    g, n = inst.graph, inst.n
    sums = kernels.cut_sums(n, g.edges, x)
    q = inst.anchor
    pmask = _mask_of(inst.parity)
    masks = np.arange(1 << n, dtype=np.int64)
    usable = ((masks >> q) & 1) == 0
    usable[0] = False
    parity = np.zeros(1 << n, dtype=np.int64)
    for v in inst.parity:
        parity ^= (masks >> v) & 1
    need = np.where(parity == 1, 1.0, 2.0)
    slack = np.where(usable, sums - need, np.inf)
    bad = np.flatnonzero(slack < -FEAS_TOL)
    if bad.size == 0:
        return []
    chosen = bad[np.argsort(slack[bad], kind="stable")[:limit]]
    return [(int(m), _cut_requirement(int(m), pmask)) for m in chosen]


def _violated_by_flows(inst, x):
    """Candidate cuts from a Gomory-Hu tree of x: exact for the odd constraints
    and for the all-cuts-at-least-one bound, heuristic for the even ones."""
    import networkx as nx

    n = inst.n
    h = nx.Graph()
    h.add_nodes_from(range(n))
    for (u, v), val in zip(inst.graph.edges, x):
        if val > 0:
            h.add_edge(u, v, capacity=float(val))
    if not nx.is_connected(h):
        comp = next(iter(nx.connected_components(h)))
        side = comp if inst.anchor not in comp else set(range(n)) - comp
        mask = _mask_of(side)
        return [(mask, _cut_requirement(mask, _mask_of(inst.parity)))]
    tree = nx.gomory_hu_tree(h)
    out = []
    pmask = _mask_of(inst.parity)
    for u, v, data in list(tree.edges(data=True)):
        tree.remove_edge(u, v)
        side = nx.node_connected_component(tree, u)
        tree.add_edge(u, v, **data)
        if inst.anchor in side:
            side = set(range(n)) - side
        mask = _mask_of(side)
        need = _cut_requirement(mask, pmask)
        if data["weight"] < need - FEAS_TOL:
            out.append((mask, need))
    return out


def solve_held_karp(inst: MetricInstance, method="auto") -> HeldKarp:
    """Optimal point of the cut LP: every cut carries at least 2, cuts with an
    odd number of parity vertices at least 1. Solved by cutting planes."""
    g, n = inst.graph, inst.n
    m = g.edge_count
    lengths = inst.edge_lengths()
    if n == 1:
        return HeldKarp([], 0.0, [], 0)
    exhaustive = method == "exhaustive" or (method == "auto" and n <= EXHAUSTIVE_LIMIT)
    pmask = _mask_of(inst.parity)
    rows = {}
    for v in range(n):
        mask = 1 << v if v != inst.anchor else ((1 << n) - 1) ^ (1 << v)
        rows[mask] = _cut_requirement(mask, pmask)
    for rounds in range(1, MAX_SEPARATION_ROUNDS + 1):
        masks = list(rows)
        a = np.zeros((len(masks), m))
        for i, mask in enumerate(masks):
            for e in delta_edges(g, _members(mask, n)):
                a[i, e] = -1.0
        b = -np.array([rows[mk] for mk in masks])
        res = linprog(lengths, A_ub=a, b_ub=b, bounds=(0, None), method="highs-ds")
        if res.status != 0:
            raise NumericalFailure(f"Held-Karp LP stopped with status {res.status}: {res.message}")
        x = [0.0 if abs(v) <= 1e-12 else float(v) for v in res.x]
        new = _violated_exhaustive(inst, x) if exhaustive else _violated_by_flows(inst, x)
        new = [(mk, need) for mk, need in new if mk not in rows]
        if not new:
            value = float(np.dot(lengths, x))
            return HeldKarp(x, value, [_members(mk, n) for mk in masks], rounds)
        rows.update(new)
    raise NumericalFailure("cut separation did not converge")


def narrow_cuts(x, inst: MetricInstance, tol=FEAS_TOL):
    """Vertex sets without the anchor whose cut value under x is below 2.

    The family is sorted by size then members; it must be laminar with odd
    parity intersections, otherwise x was not a feasible LP point.
    """
    g, n = inst.graph, inst.n
    if n > EXHAUSTIVE_LIMIT:
        raise TooLarge(f"narrow-cut enumeration is exhaustive; {n} vertices is too many")
    if n < 2:
        return []
    sums = kernels.cut_sums(n, g.edges, x)
    q = inst.anchor
    masks = np.arange(1 << n, dtype=np.int64)
    keep = (((masks >> q) & 1) == 0) & (sums < 2 - tol)
    keep[0] = False
    cuts = [_members(int(mk), n) for mk in np.flatnonzero(keep)]
    parity = set(inst.parity)
    for c in cuts:
        if len(c & parity) % 2 == 0:
            raise NotLaminar(f"narrow cut {sorted(c)} meets the parity set evenly; the point is infeasible")
    if not is_laminar(cuts):
        raise NotLaminar("narrow cuts cross; the point is not an optimal LP solution")
    return sorted(cuts, key=lambda c: (len(c), sorted(c)))


# ---------------------------------------------------------------- tau-odd points


def odd_tau(epsilon):
    """Smallest odd integer that is at least floor(1/epsilon)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    base = math.floor(1 / epsilon + 1e-12)
    return base if base % 2 else base + 1


@dataclass
class OddPair:
    y: list
    tree: tuple
    y_cost: float
    tree_cost: float
    tau: int
    stats: dict = field(default_factory=dict)


def _family_instance(inst, cuts, cls):
    n = inst.n
    sets = [CutSet(c, 0, max(n - 1, 0)) for c in cuts]
    kind = "chain" if cls is ChainInstance else "laminar"
    return cls(inst.graph, inst.edge_lengths(), CutFamily(sets, kind))


def tree_on_integral_part(g, lengths, y, tol=INT_TOL):
    """Shortest spanning tree that contains every edge with y = 1 and avoids every edge with y = 0."""
    forced = [e for e, v in enumerate(y) if v >= 1 - tol]
    allowed = [e for e, v in enumerate(y) if v > tol]
    return minimum_spanning_tree(g, lengths, forced, allowed)


def _is_chain(cuts):
    return all(a < b for a, b in zip(cuts, cuts[1:]))


@dataclass
class PairCell(TreeCell):
    y: list = None
    tree_cost: float = math.inf


class OddPairDp(LaminarDp):
    """Laminar DP that stores a point and a tree per cell.

    Children fix the tree inside them and their crossing edges; the extension LP
    forces every other family set strictly inside the target to be large. The
    cell point takes each child's point inside that child and the LP optimum
    elsewhere; the cell tree is the shortest tree honouring the same pins.
    """

    def __init__(self, inst, tau):
        super().__init__(inst, epsilon=1.0, tau=1, seed=0)
        self.tau = int(tau)

    def triples_for(self, i):
        from .chain_dp import triples_at

        top = min(self.tau, max(self.g.vertex_count - 1, 0))
        return triples_at(self.g, self.sets[i], range(1, top + 1, 2))

    def window_for(self, i):
        return CutWindow(self.sets[i], self.tau + 2)

    def extend(self, child_cells, target: Target, fixed, windows, rng, cutoff=None):
        ext = solve_extension(target, self.costs, fixed, windows, cutoff)
        self.stats["lp"] += 1
        if not ext.feasible:
            return None
        inside = target.inside
        y = [v if e in inside else 0.0 for e, v in enumerate(ext.y)]
        for cell in child_cells:
            for e in inside_edges(self.g, cell.triple.cut):
                y[e] = cell.y[e]
        con, local = target.contraction, target.local
        forced = [local[e] for e, v in fixed.items() if e in local and v >= 1 - INT_TOL]
        allowed = [i for i, e in enumerate(con.edge_ids) if fixed.get(e, 1.0) > INT_TOL]
        local_costs = [self.costs[e] for e in con.edge_ids]
        local_tree = minimum_spanning_tree(con.graph, local_costs, forced, allowed)
        if local_tree is None:
            return None
        tree = tuple(sorted(con.edge_ids[i] for i in local_tree))
        y_cost = sum(c * v for c, v in zip(self.costs, y))
        return tree, y, y_cost, sum(self.costs[e] for e in tree)

    def fill(self, triple, inner):
        cell = PairCell(triple)
        target = Target(self.g, triple)
        if not target.viable:
            return cell
        for child_cells, fixed, windows in self.combinations(target, inner):
            if lower_bound(target, self.costs, fixed) >= cell.cost - TIE_TOL:
                self.stats["pruned"] += 1
                continue
            found = self.extend(child_cells, target, fixed, windows, None, cell.cost - TIE_TOL)
            if found and found[2] < cell.cost - TIE_TOL:
                cell.tree, cell.y, cell.cost, cell.tree_cost = found
                cell.children = tuple(c.triple for c in child_cells)
        return cell


def run_tau_odd_dp(inst: MetricInstance, cuts, tau, method="auto") -> OddPair:
    """A tau-odd point y in the spanning tree polytope and a tree T agreeing with
    y on its small cuts, with l(T) <= l.y <= length of any tree odd on all cuts.

    method: "chain" (requires nested cuts), "laminar", or "auto".
    """
    if tau < 1 or tau % 2 == 0:
        raise ValueError(f"tau must be a positive odd integer, got {tau}")
    cuts = sorted((frozenset(c) for c in cuts), key=lambda c: (len(c), sorted(c)))
    g = inst.graph
    lengths = inst.edge_lengths()
    if method == "auto":
        method = "chain" if _is_chain(cuts) else "laminar"
    if method == "chain":
        if not _is_chain(cuts):
            raise NotLaminar("chain method needs nested cuts")
        res = run_chain_dp(_family_instance(inst, cuts, ChainInstance), tau, mode="odd")
        y = list(res.y)
        tree = tree_on_integral_part(g, lengths, y)
        if tree is None:
            raise NumericalFailure("no spanning tree agrees with the integral part of the point")
        stats = {"lp": res.lp_count, "pruned": res.pruned, "method": "chain"}
        y_cost = float(sum(c * v for c, v in zip(lengths, y)))
        return OddPair(y, tuple(tree), y_cost, sum(lengths[e] for e in tree), tau, stats)
    dp = OddPairDp(_family_instance(inst, cuts, LaminarInstance), tau)
    root = dp.fill_table()
    if not root.finite:
        raise NumericalFailure("pair DP found no point for the whole vertex set")
    stats = dict(dp.stats, method="laminar")
    return OddPair(list(root.y), root.tree, root.cost, root.tree_cost, tau, stats)


# ---------------------------------------------------------------- joins and shortcuts


def odd_vertices(n, edges_uv):
    deg = [0] * n
    for u, v in edges_uv:
        deg[u] += 1
        deg[v] += 1
    return frozenset(v for v in range(n) if deg[v] % 2)


def min_parity_join(inst: MetricInstance, parity):
    """Shortest multiset of edges whose odd-degree vertices are exactly `parity`.

    Under a metric this is a cheapest perfect matching on the parity vertices,
    each pair joined by its direct edge. Returns (edge ids, length).
    """
    verts = sorted(set(parity))
    if len(verts) % 2:
        raise ValueError("a parity join needs an even number of vertices")
    if len(verts) > MATCHING_LIMIT:
        raise TooManyOddVertices(f"{len(verts)} odd vertices exceed the matching limit {MATCHING_LIMIT}")
    if not verts:
        return [], 0.0
    dist = [[inst.length(a, b) for b in verts] for a in verts]
    value, pairs = kernels.matching_dp(dist)
    index = _edge_index(inst.graph)
    join = sorted(index[frozenset((verts[i], verts[j]))] for i, j in pairs)
    return join, float(value)


def _find_cycle(n, edges_uv):
    """Edge positions of some cycle in a multigraph, or None."""
    uf = UnionFind(range(n))
    adj = {v: [] for v in range(n)}
    for pos, (u, v) in enumerate(edges_uv):
        if not uf.union(u, v):
            # path from v back to u in the forest built so far, then the closing edge
            parent = {v: None}
            stack = [v]
            while stack:
                a = stack.pop()
                for b, p in adj[a]:
                    if b not in parent:
                        parent[b] = (a, p)
                        stack.append(b)
            cycle, a = [pos], u
            while parent[a] is not None:
                a, p = parent[a]
                cycle.append(p)
            return cycle
        adj[u].append((v, pos))
        adj[v].append((u, pos))
    return None


def shortcut_to_tree(inst: MetricInstance, multiset, parity=None):
    """Shortcut a connected parity join (multiset of edge ids) to a spanning tree.

    Each step takes a cycle, a vertex v on it with a third incident edge (v,c)
    and a cycle edge (v,a), and replaces both by (a,c), or drops both when a = c.
    Parity and connectivity are preserved and the length does not grow.
    """
    g, n = inst.graph, inst.n
    parity = frozenset(inst.parity if parity is None else parity)
    edges = [tuple(g.edges[e]) for e in multiset]
    if odd_vertices(n, edges) != parity:
        raise NotConnectedJoin("odd-degree vertices differ from the parity set")
    uf = UnionFind(range(n))
    parts = n
    for u, v in edges:
        parts -= uf.union(u, v)
    if parts > 1:
        raise NotConnectedJoin("multiset does not connect all vertices")
    index = _edge_index(g)
    while True:
        cycle = _find_cycle(n, edges)
        if cycle is None:
            break
        on_cycle = set(cycle)
        deg = [0] * n
        for u, v in edges:
            deg[u] += 1
            deg[v] += 1
        step = None
        for pos in sorted(cycle):
            for v in edges[pos]:
                if deg[v] < 3:
                    continue
                a = edges[pos][0] if edges[pos][1] == v else edges[pos][1]
                other = next(
                    p for p, uv in enumerate(edges) if p not in on_cycle and v in uv
                )
                c = edges[other][0] if edges[other][1] == v else edges[other][1]
                step = (pos, other, a, c)
                break
            if step:
                break
        if step is None:
            raise NotConnectedJoin("cycle without a reducible vertex; the parity set must be empty")
        pos, other, a, c = step
        edges = [uv for p, uv in enumerate(edges) if p not in (pos, other)]
        if a != c:
            edges.append((min(a, c), max(a, c)))
    return sorted(index[frozenset(uv)] for uv in edges)


def path_order(inst: MetricInstance, tree, s):
    """Vertex order of a tree that is a path starting at s."""
    adj = {v: [] for v in range(inst.n)}
    for e in tree:
        u, v = inst.graph.edges[e]
        adj[u].append(v)
        adj[v].append(u)
    order, prev, cur = [s], None, s
    while True:
        nxt = [w for w in adj[cur] if w != prev]
        if not nxt:
            return tuple(order)
        if len(nxt) > 1:
            raise ValueError("tree is not a path from s")
        prev, cur = cur, nxt[0]
        order.append(cur)


# ---------------------------------------------------------------- full pipeline


@dataclass
class JoinReport:
    edges: list
    length: float
    tree: tuple
    tree_length: float
    join: list
    join_length: float
    x: list
    lp_value: float
    narrow: list
    tau: int
    epsilon: float
    y: list
    y_cost: float
    width: int
    certificate: dict
    shortcut: bool
    stats: dict = field(default_factory=dict)


def parity_certificate(inst: MetricInstance, x, y, tree, narrow, epsilon, tol=FEAS_TOL):
    """Check that (x + epsilon*y)/2 covers every narrow cut that separates the
    corrected parity set oddly, and the parity bookkeeping for odd tree cuts."""
    g, n = inst.graph, inst.n
    tree_uv = [g.edges[e] for e in tree]
    q_t = odd_vertices(n, tree_uv) ^ frozenset(inst.parity)
    tree_set = set(tree)
    worst = math.inf
    for c in narrow:
        crossing = delta_edges(g, c)
        odd_tree = len(tree_set & crossing) % 2 == 1
        separates = len(c & q_t) % 2 == 1
        if odd_tree and separates:
            raise NumericalFailure(f"cut {sorted(c)} is odd for the tree yet separates the corrected parity set")
        if separates:
            z = 0.5 * sum(x[e] + epsilon * y[e] for e in crossing)
            worst = min(worst, z)
            if z < 1 - tol:
                raise NumericalFailure(f"join certificate fails on cut {sorted(c)}: {z:.6g} < 1")
    return {"corrected_parity": sorted(q_t), "min_coverage": worst}


def _pipeline(inst: MetricInstance, epsilon, tau, method, shortcut):
    hk = solve_held_karp(inst)
    narrow = narrow_cuts(hk.x, inst)
    tau = odd_tau(epsilon) if tau is None else int(tau)
    pair = run_tau_odd_dp(inst, narrow, tau, method)
    ok, _ = is_tau_odd(pair.y, narrow, tau, inst.graph)
    if not ok:
        raise NumericalFailure("DP point is not tau-odd on the narrow cuts")
    tree_uv = [inst.graph.edges[e] for e in pair.tree]
    q_t = odd_vertices(inst.n, tree_uv) ^ frozenset(inst.parity)
    join, join_len = min_parity_join(inst, q_t)
    cert = parity_certificate(inst, hk.x, pair.y, pair.tree, narrow, epsilon)
    edges = sorted(list(pair.tree) + join)
    if shortcut:
        edges = shortcut_to_tree(inst, edges)
    lengths = inst.edge_lengths()
    return JoinReport(
        edges=edges,
        length=float(sum(lengths[e] for e in edges)),
        tree=pair.tree,
        tree_length=pair.tree_cost,
        join=join,
        join_length=join_len,
        x=hk.x,
        lp_value=hk.value,
        narrow=narrow,
        tau=tau,
        epsilon=epsilon,
        y=pair.y,
        y_cost=pair.y_cost,
        width=laminar_width(narrow),
        certificate=cert,
        shortcut=shortcut,
        stats=dict(pair.stats, separation_rounds=hk.rounds),
    )


def solve_path_tsp(inst: MetricInstance, epsilon=0.5, tau=None):
    """Hamiltonian path between the two parity vertices. Returns (vertex order, report)."""
    if len(inst.parity) != 2:
        raise ValueError("Path TSP needs exactly two parity vertices")
    report = _pipeline(inst, epsilon, tau, "chain", shortcut=True)
    return path_order(inst, report.edges, inst.parity[0]), report


def solve_mscj(inst: MetricInstance, epsilon=0.5, tau=None, shortcut=False):
    """Short connected multigraph whose odd-degree vertices are the parity set.

    Returns (edge id multiset, report); with shortcut=True the result is a spanning tree.
    """
    report = _pipeline(inst, epsilon, tau, "laminar", shortcut)
    return report.edges, report
