"""Extension LPs shared by the dynamic programs.

An extension LP looks for a point z on the inside edges of a target cut that is
left-compatible with the target triple, agrees with prescribed values on some
edges and respects load windows on intermediate cuts. Prescribed values are
stated for the combined vector w = z + (crossing edges of the target), so edges
of the target's crossing set count as 1 and every other outside edge as 0.
"""

import math
from dataclasses import dataclass, field

from .errors import ContractionCollapse, DisconnectedGraph
from .graph import Graph, UnionFind, build_contracted_graph, delta_edges, inside_edges, minimum_spanning_tree
from .numerics import FEAS_TOL
from .polytope import LpModel, add_spanning_tree_polytope, separate_st, solve_lp

INFEASIBLE = math.inf


@dataclass
class CutWindow:
    members: frozenset
    lower: float
    upper: float = math.inf


class Target:
    """Precomputed data for one target triple: contraction and edge roles."""

    def __init__(self, g: Graph, triple):
        self.graph = g
        self.triple = triple
        self.inside = inside_edges(g, triple.cut)
        self.crossing = frozenset(triple.crossing)
        try:
            self.contraction = build_contracted_graph(g, triple)
        except ContractionCollapse:
            self.contraction = None
        self.viable = self.contraction is not None and _connected(self.contraction.graph)
        if self.viable:
            self.local = self.contraction.local_index()
            self.loops = frozenset(self.contraction.discarded)

    def window_offset(self, members):
        return len(self.crossing & delta_edges(self.graph, members))


def _connected(g: Graph):
    uf = UnionFind(range(g.vertex_count))
    parts = g.vertex_count
    for u, v in g.edges:
        parts -= uf.union(u, v)
    return parts <= 1


@dataclass
class Extension:
    status: str
    cost: float = INFEASIBLE
    y: list = field(default_factory=list)
    reason: str = ""

    @property
    def feasible(self):
        return self.status == "optimal"


def _split_pins(target: Target, fixed: dict):
    """Translate prescribed w-values into pins on z, or a reason they clash."""
    pins = {}
    for e, value in fixed.items():
        if e in target.inside:
            if e in target.loops and abs(value) > FEAS_TOL:
                return None, f"edge {e} is a loop in the contracted graph but pinned to {value}"
            pins[e] = value
        elif e in target.crossing:
            if abs(value - 1) > FEAS_TOL:
                return None, f"crossing edge {e} pinned to {value}"
        elif abs(value) > FEAS_TOL:
            return None, f"edge {e} lies outside the cut but is pinned to {value}"
    return pins, ""


def _precheck(target: Target, pins):
    """Cheap necessary conditions: pinned ones stay acyclic, non-zero edges connect."""
    con = target.contraction
    uf = UnionFind(range(con.graph.vertex_count))
    for e, value in pins.items():
        if e in target.local and abs(value - 1) <= FEAS_TOL:
            if not uf.union(*con.graph.edges[target.local[e]]):
                return f"pinned edges close a cycle at {e}"
    uf = UnionFind(range(con.graph.vertex_count))
    parts = con.graph.vertex_count
    for local, e in enumerate(con.edge_ids):
        if pins.get(e, 1.0) > FEAS_TOL:
            parts -= uf.union(*con.graph.edges[local])
    if parts > 1:
        return "edges not pinned to zero leave the contracted graph disconnected"
    return ""


def window_rows(target: Target, windows):
    """Each window as (edge ids on the inside, lower, upper) after removing the
    fixed contribution of the target's crossing edges."""
    rows = []
    for w in windows:
        offset = target.window_offset(w.members)
        edges = [e for e in delta_edges(target.graph, w.members) if e in target.inside and e not in target.loops]
        rows.append((edges, w.lower - offset, w.upper - offset))
    return rows


def solve_extension(target: Target, costs, fixed: dict, windows=(), cutoff=None) -> Extension:
    """Cheapest z in the left-compatible polytope of the target that honours the
    pinned values and the load windows.

    With a cutoff, the status "cutoff" is returned as soon as every point of the
    pinned face (windows ignored) is known to cost at least that much.
    """
    if not target.viable:
        return Extension("infeasible", reason="target triple admits no left-compatible set")
    pins, why = _split_pins(target, fixed)
    if pins is None:
        return Extension("infeasible", reason=why)
    why = _precheck(target, pins)
    if why:
        return Extension("infeasible", reason=why)
    rows = window_rows(target, windows)
    con = target.contraction
    free = set(e for e in con.edge_ids if e not in pins)
    # free coordinates carry exactly the mass the pins leave over
    left = con.graph.vertex_count - 1 - sum(pins.get(e, 0.0) for e in con.edge_ids)
    for edges, lo, hi in rows:
        fixed_part = sum(pins.get(e, 0.0) for e in edges)
        room = min(sum(1 for e in edges if e in free), max(left, 0.0))
        if fixed_part + room < lo - FEAS_TOL or fixed_part > hi + FEAS_TOL:
            return Extension("infeasible", reason="load window out of reach")
    if not free:
        return _check_fixed(target, costs, pins, rows)
    return _solve_reduced(target, costs, pins, rows, cutoff)


def _solve_reduced(target, costs, pins, rows, cutoff=None):
    """Contract edges pinned to one and drop edges pinned to zero, then solve the
    LP on what is left; fractional pins stay as fixed variables."""
    con = target.contraction
    uf = UnionFind(range(con.graph.vertex_count))
    ones, keep = [], []
    for local, e in enumerate(con.edge_ids):
        value = pins.get(e)
        if value is not None and value >= 1 - FEAS_TOL:
            uf.union(*con.graph.edges[local])
            ones.append(e)
        elif value is None or value > FEAS_TOL:
            keep.append(local)
    label = {}
    for v in range(con.graph.vertex_count):
        label.setdefault(uf.find(v), len(label))
    edges, ids = [], []
    for local in keep:
        a, b = (label[uf.find(x)] for x in con.graph.edges[local])
        if a == b:
            if pins.get(con.edge_ids[local], 0.0) > FEAS_TOL:
                return Extension("infeasible", reason="pinned edges close a cycle")
            continue  # a free edge inside a contracted component must stay at zero
        edges.append((a, b))
        ids.append(con.edge_ids[local])
    reduced = Graph(len(label), edges)
    if not any(e in pins for e in ids):
        # integral pins only: the face without windows is optimised by a spanning tree
        found = _tree_shortcut(reduced, ids, ones, costs, rows, cutoff)
        if found is not None:
            return found
    model = LpModel()
    edge_vars = model.add_variables(len(ids), 0.0, 1.0)
    model.edge_vars = edge_vars
    position = {e: k for k, e in enumerate(ids)}
    for k, e in enumerate(ids):
        model.set_objective(edge_vars[k], costs[e])
        if e in pins:
            model.fix(edge_vars[k], pins[e])
    try:
        add_spanning_tree_polytope(model, reduced, edge_vars)
    except DisconnectedGraph:
        return Extension("infeasible", reason="contracted graph disconnected")
    one_set = set(ones)
    for edges_h, lo, hi in rows:
        constant = sum(1 for e in edges_h if e in one_set)
        coeffs = {edge_vars[position[e]]: 1.0 for e in edges_h if e in position}
        if not coeffs:
            if constant < lo - FEAS_TOL or constant > hi + FEAS_TOL:
                return Extension("infeasible", reason="load window violated by pinned edges")
            continue
        if lo - constant > 0:
            model.add_constraint(coeffs, ">=", lo - constant)
        if not math.isinf(hi):
            model.add_constraint(coeffs, "<=", hi - constant)
    outcome = solve_lp(model)
    if not outcome.optimal:
        return Extension("infeasible", reason=f"LP {outcome.status}")
    y = [0.0] * target.graph.edge_count
    for e in ones:
        y[e] = 1.0
    for k, e in enumerate(ids):
        y[e] = outcome.solution[k]
    return Extension("optimal", sum(costs[e] * y[e] for e in range(len(y))), y)


def _tree_shortcut(reduced, ids, ones, costs, rows, cutoff):
    """Exact answers that need no LP: the pinned MST is a lower bound, and the
    optimum whenever it already meets every window."""
    local = minimum_spanning_tree(reduced, [costs[e] for e in ids])
    if local is None:
        return Extension("infeasible", reason="contracted graph disconnected")
    tree = set(ones) | {ids[k] for k in local}
    cost = sum(costs[e] for e in tree)
    if cutoff is not None and cost >= cutoff:
        return Extension("cutoff", cost, reason="pinned spanning tree bound reaches the cutoff")
    for edges_h, lo, hi in rows:
        load = sum(1 for e in edges_h if e in tree)
        if load < lo - FEAS_TOL or load > hi + FEAS_TOL:
            return None
    y = [0.0] * len(costs)
    for e in tree:
        y[e] = 1.0
    return Extension("optimal", float(cost), y)


def _check_fixed(target, costs, pins, rows):
    con = target.contraction
    y_local = [pins[e] for e in con.edge_ids]
    if separate_st(con.graph, y_local) is not None:
        return Extension("infeasible", reason="pinned point is not in the contracted polytope")
    for edges, lo, hi in rows:
        load = sum(pins[e] for e in edges)
        if load < lo - FEAS_TOL or load > hi + FEAS_TOL:
            return Extension("infeasible", reason="pinned point violates a load window")
    y = [0.0] * target.graph.edge_count
    for e, value in pins.items():
        y[e] = value
    return Extension("optimal", sum(costs[e] * y[e] for e in range(len(y))), y)


def lower_bound(target: Target, costs, fixed: dict):
    """Valid lower bound on any extension's cost without solving an LP.

    The free coordinates carry exactly the mass the pins leave over, so with
    nonnegative free costs that mass times the cheapest free cost is a bound.
    """
    if not target.viable:
        return INFEASIBLE
    total, pinned_mass, cheapest, negative = 0.0, 0.0, math.inf, 0.0
    for e in target.inside:
        if e in fixed:
            total += costs[e] * fixed[e]
            pinned_mass += fixed[e]
        elif e not in target.loops:
            cheapest = min(cheapest, costs[e])
            negative += min(costs[e], 0.0)
    if negative < 0 or math.isinf(cheapest):
        return total + negative
    left = target.contraction.graph.vertex_count - 1 - pinned_mass
    return total + max(left, 0.0) * cheapest


def extension_violations(target: Target, fixed: dict, windows, z, tol=1e-6) -> list:
    """Independent feasibility check of a candidate point z (full edge vector),
    using subset separation on the contracted graph rather than the LP."""
    problems = []
    if not target.viable:
        return ["target triple admits no left-compatible set"]
    g = target.graph
    for e in range(g.edge_count):
        if e not in target.inside and abs(z[e]) > tol:
            problems.append(f"edge {e} outside the cut carries {z[e]}")
        if e in target.loops and abs(z[e]) > tol:
            problems.append(f"loop edge {e} carries {z[e]}")
    w = [z[e] + (1.0 if e in target.crossing else 0.0) for e in range(g.edge_count)]
    for e, value in fixed.items():
        if abs(w[e] - value) > tol:
            problems.append(f"edge {e}: {w[e]} instead of {value}")
    con = target.contraction
    violation = separate_st(con.graph, [z[e] for e in con.edge_ids], tol)
    if violation is not None:
        problems.append(f"not in the contracted polytope: {violation}")
    for win in windows:
        load = sum(w[e] for e in delta_edges(g, win.members))
        if load < win.lower - tol or load > win.upper + tol:
            problems.append(f"load {load} outside [{win.lower}, {win.upper}] on {sorted(win.members)}")
    return problems
