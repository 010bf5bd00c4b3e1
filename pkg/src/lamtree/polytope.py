"""Linear programs over the spanning tree polytope.

The polytope is encoded with a compact extended formulation: for every root k
each non-root vertex picks one parent, split fractionally over its incident
edges, and the two orientations of an edge add up to its value. The projection
onto the edge variables is exactly the spanning tree polytope.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

from . import kernels
from .errors import DisconnectedGraph, NumericalFailure
from .graph import Graph, is_connected
from .numerics import FEAS_TOL, INT_TOL

EXHAUSTIVE_LIMIT = 18


class LpModel:
    """Minimization model with sparse rows; variables are plain indices."""

    def __init__(self):
        self.lower = []
        self.upper = []
        self.objective = []
        self.rows = []  # (coefficient dict, sense, rhs)
        self.edge_vars = []

    @property
    def variable_count(self):
        return len(self.lower)

    def add_variables(self, count, lower=0.0, upper=math.inf, cost=0.0):
        start = len(self.lower)
        self.lower += [lower] * count
        self.upper += [upper] * count
        self.objective += [cost] * count
        return list(range(start, start + count))

    def add_constraint(self, coeffs, sense, rhs):
        if sense not in ("==", "<=", ">="):
            raise ValueError(f"bad sense {sense!r}")
        for j in coeffs:
            if not 0 <= j < len(self.lower):
                raise ValueError(f"constraint references undeclared variable {j}")
        self.rows.append((dict(coeffs), sense, float(rhs)))

    def fix(self, var, value):
        self.lower[var] = max(self.lower[var], value)
        self.upper[var] = min(self.upper[var], value)

    def set_objective(self, var, cost):
        self.objective[var] = float(cost)


@dataclass
class LpOutcome:
    status: str
    solution: list = field(default_factory=list)
    objective: float = math.inf
    values: list = field(default_factory=list)

    @property
    def optimal(self):
        return self.status == "optimal"


def add_spanning_tree_polytope(model: LpModel, g: Graph, edge_vars):
    """Constrain edge_vars (one per edge of g) to the spanning tree polytope of g."""
    n = g.vertex_count
    if n == 0:
        return
    if not is_connected(g):
        raise DisconnectedGraph(f"{g!r} has no spanning tree")
    model.add_constraint({x: 1.0 for x in edge_vars}, "==", n - 1)
    if n == 1:
        return
    for k in range(n):
        parent_of = [dict() for _ in range(n)]
        for e, (u, v) in enumerate(g.edges):
            orient = {}
            for a in (u, v):
                if a != k:
                    z = model.add_variables(1)[0]
                    orient[z] = 1.0
                    parent_of[a][z] = 1.0
            orient[edge_vars[e]] = -1.0
            model.add_constraint(orient, "==", 0.0)
        for a in range(n):
            if a != k:
                model.add_constraint(parent_of[a], "==", 1.0)


def st_polytope_model(g: Graph) -> LpModel:
    model = LpModel()
    model.edge_vars = model.add_variables(g.edge_count)
    add_spanning_tree_polytope(model, g, model.edge_vars)
    return model


def _matrices(model: LpModel):
    eq_r, eq_c, eq_v, eq_b = [], [], [], []
    ub_r, ub_c, ub_v, ub_b = [], [], [], []
    for coeffs, sense, rhs in model.rows:
        if sense == "==":
            i = len(eq_b)
            eq_b.append(rhs)
            for j, a in coeffs.items():
                eq_r.append(i), eq_c.append(j), eq_v.append(a)
        else:
            sign = 1.0 if sense == "<=" else -1.0
            i = len(ub_b)
            ub_b.append(sign * rhs)
            for j, a in coeffs.items():
                ub_r.append(i), ub_c.append(j), ub_v.append(sign * a)
    nv = model.variable_count
    a_eq = csr_matrix((eq_v, (eq_r, eq_c)), shape=(len(eq_b), nv)) if eq_b else None
    a_ub = csr_matrix((ub_v, (ub_r, ub_c)), shape=(len(ub_b), nv)) if ub_b else None
    return a_eq, (eq_b or None), a_ub, (ub_b or None)


def solve_lp(model: LpModel) -> LpOutcome:
    """Solve with HiGHS; snap near-integral edge values and re-check feasibility."""
    if any(lo > up + FEAS_TOL for lo, up in zip(model.lower, model.upper)):
        return LpOutcome("infeasible")
    if model.variable_count == 0:
        for coeffs, sense, rhs in model.rows:
            if not _row_ok(0.0, sense, rhs):
                return LpOutcome("infeasible")
        return LpOutcome("optimal", [], 0.0, [])
    a_eq, b_eq, a_ub, b_ub = _matrices(model)
    bounds = [(lo, None if math.isinf(up) else up) for lo, up in zip(model.lower, model.upper)]
    res = linprog(
        model.objective,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs-ds",
        options={"primal_feasibility_tolerance": FEAS_TOL * 0.1, "dual_feasibility_tolerance": FEAS_TOL * 0.1},
    )
    if res.status == 2:
        return LpOutcome("infeasible")
    if res.status == 3:
        return LpOutcome("unbounded", objective=-math.inf)
    if res.status != 0:
        raise NumericalFailure(f"LP backend stopped with status {res.status}: {res.message}")
    values = [float(v) for v in res.x]
    for j in model.edge_vars:
        r = round(values[j])
        if abs(values[j] - r) <= INT_TOL:
            values[j] = float(r)
    solution = [values[j] for j in model.edge_vars]
    objective = float(sum(c * x for c, x in zip(model.objective, values)))
    return LpOutcome("optimal", solution, objective, values)


def _row_ok(lhs, sense, rhs, tol=1e-6):
    if sense == "==":
        return abs(lhs - rhs) <= tol
    if sense == "<=":
        return lhs <= rhs + tol
    return lhs >= rhs - tol


def check_solution(model: LpModel, values, tol=1e-6) -> list:
    """Indices of rows and bounds violated by values, re-evaluated from scratch."""
    bad = []
    for j, x in enumerate(values):
        if x < model.lower[j] - tol or x > model.upper[j] + tol:
            bad.append(("bound", j))
    for i, (coeffs, sense, rhs) in enumerate(model.rows):
        lhs = sum(a * values[j] for j, a in coeffs.items())
        if not _row_ok(lhs, sense, rhs, tol):
            bad.append(("row", i))
    return bad


@dataclass(frozen=True)
class Violation:
    kind: str  # "negative", "equality" or "subset"
    vertices: frozenset = frozenset()
    edge: int = -1
    lhs: float = 0.0
    rhs: float = 0.0

    @property
    def amount(self):
        return abs(self.lhs - self.rhs) if self.kind == "equality" else self.lhs - self.rhs


def _popcounts(n):
    counts = np.zeros(1 << n, dtype=np.int64)
    masks = np.arange(1 << n, dtype=np.int64)
    for b in range(n):
        counts += (masks >> b) & 1
    return counts


def separate_st(g: Graph, y, tol=FEAS_TOL, method="auto"):
    """None if y lies in the spanning tree polytope, else one violated inequality.

    Subset inequalities are checked exhaustively up to EXHAUSTIVE_LIMIT vertices
    and through minimum cuts beyond that; the most violated subset is reported.
    """
    n = g.vertex_count
    for e, val in enumerate(y):
        if val < -tol:
            return Violation("negative", edge=e, lhs=float(val), rhs=0.0)
    total = float(sum(y))
    if abs(total - max(n - 1, 0)) > tol * max(1, g.edge_count):
        return Violation("equality", frozenset(range(n)), lhs=total, rhs=float(max(n - 1, 0)))
    if n <= 2:
        return None
    if method == "exhaustive" or (method == "auto" and n <= EXHAUSTIVE_LIMIT):
        return _separate_exhaustive(g, y, tol)
    return _separate_mincut(g, y, tol)


def _separate_exhaustive(g, y, tol):
    n = g.vertex_count
    inner = kernels.inner_sums(n, g.edges, y)
    excess = inner - (_popcount_cache(n) - 1)
    excess[0] = -math.inf
    mask = int(np.argmax(excess))
    if excess[mask] <= tol * max(1, g.edge_count):
        return None
    members = frozenset(v for v in range(n) if (mask >> v) & 1)
    return Violation("subset", members, lhs=float(inner[mask]), rhs=float(len(members) - 1))


_POPCOUNTS = {}


def _popcount_cache(n):
    if n not in _POPCOUNTS:
        _POPCOUNTS[n] = _popcounts(n)
    return _POPCOUNTS[n]


def min_deficiency_set(g: Graph, y, forced):
    """Minimize |S| - y(E[S]) over vertex sets S containing `forced`.

    Returns (value, S) with S the inclusion-minimal minimizer: the source side
    of a minimum cut is the set reachable in the residual network.
    """
    import networkx as nx

    n = g.vertex_count
    degree = [0.0] * n
    for (u, v), val in zip(g.edges, y):
        degree[u] += val
        degree[v] += val
    forced = set(forced)
    net = nx.DiGraph()
    net.add_nodes_from(["s", "t"])
    offset = 0.0
    for v in range(n):
        w = 1.0 - degree[v] / 2.0
        if v in forced:
            offset += w
            net.add_edge("s", v, capacity=math.inf)
        elif w >= 0:
            net.add_edge(v, "t", capacity=w)
        else:
            offset += w
            net.add_edge("s", v, capacity=-w)
    for (u, v), val in zip(g.edges, y):
        if val > 0:
            for a, b in ((u, v), (v, u)):
                cap = net.get_edge_data(a, b, {"capacity": 0.0})["capacity"]
                net.add_edge(a, b, capacity=cap + val / 2.0)
    cut_value, flow = nx.maximum_flow(net, "s", "t")
    # residual reachability with a tolerance, so float dust does not enlarge the set
    eps = 1e-9
    seen, stack = {"s"}, ["s"]
    while stack:
        a = stack.pop()
        for b, data in net[a].items():
            if b not in seen and data["capacity"] - flow[a][b] > eps:
                seen.add(b)
                stack.append(b)
        for b in net.predecessors(a):
            if b not in seen and flow[b][a] > eps:
                seen.add(b)
                stack.append(b)
    return cut_value + offset, frozenset(v for v in seen if v != "s")


def _separate_mincut(g, y, tol):
    """Minimize |S| - y(E[S]) over S containing a fixed vertex, for every vertex."""
    best = None
    for k in range(g.vertex_count):
        value, members = min_deficiency_set(g, y, [k])
        if value < 1 - tol * max(1, g.edge_count) and (best is None or value < best[0]):
            best = (value, members)
    if best is None:
        return None
    members = best[1]
    inner = sum(val for (u, v), val in zip(g.edges, y) if u in members and v in members)
    return Violation("subset", members, lhs=float(inner), rhs=float(len(members) - 1))


def in_spanning_tree_polytope(g: Graph, y, tol=FEAS_TOL) -> bool:
    return separate_st(g, y, tol) is None
