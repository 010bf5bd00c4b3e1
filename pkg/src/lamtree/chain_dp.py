"""Dynamic program over connectivity triples of a chain of cuts.

Cells are filled in increasing cut index. Each cell stores an explicit
fractional point, found as the cheapest extension LP over all earlier cells.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field

from .errors import NoFeasibleRelaxation
from .extension import CutWindow, Target, lower_bound, solve_extension
from .graph import ConnectivityTriple, delta_edges, inside_edges, set_partitions
from .numerics import FEAS_TOL, INT_TOL

log = logging.getLogger(__name__)

TIE_TOL = 1e-9


@dataclass
class Cell:
    triple: ConnectivityTriple
    index: int
    y: list = None
    cost: float = math.inf
    predecessor: ConnectivityTriple = None

    @property
    def finite(self):
        return not math.isinf(self.cost)


@dataclass
class DpResult:
    y: list
    cost: float
    table: dict
    triples: list
    lp_count: int = 0
    pruned: int = 0
    tau: int = 0
    stats: dict = field(default_factory=dict)


class ChainRules:
    """What the chain DP enumerates and enforces, for one τ.

    mode "bounded": |F| within [a_i, min(τ, b_i)] and windows max(τ+1, a_h)..b_h.
    mode "odd": |F| odd and at most τ, windows τ+2..∞, bounds ignored.
    """

    def __init__(self, inst, tau, mode="bounded"):
        n = inst.graph.vertex_count
        self.mode = mode
        self.tau = max(0, min(int(tau), max(n - 1, 0)))
        self.sets = list(inst.family.sets)

    def sizes(self, h):
        cs = self.sets[h - 1]
        if self.mode == "odd":
            return [f for f in range(1, self.tau + 1, 2)]
        return list(range(cs.lower, min(self.tau, cs.upper) + 1))

    def window(self, h):
        cs = self.sets[h - 1]
        if self.mode == "odd":
            return CutWindow(cs.members, self.tau + 2)
        return CutWindow(cs.members, max(self.tau + 1, cs.lower), cs.upper)


def chain_cuts(inst):
    n = inst.graph.vertex_count
    return [frozenset()] + [cs.members for cs in inst.family] + [frozenset(range(n))]


def triples_at(g, cut, sizes):
    """All triples on one cut for the allowed crossing sizes, in tie-break order."""
    crossing = sorted(delta_edges(g, cut))
    out = []
    for size in sizes:
        for subset in itertools.combinations(crossing, size):
            probe = ConnectivityTriple(cut, subset)
            for pattern in set_partitions(probe.outside_endpoints(g)):
                out.append(ConnectivityTriple(cut, subset, pattern))
    return out


def enumerate_triples(inst, tau, mode="bounded"):
    """Triples per cut index 0..k+1; sentinels hold only the empty triple."""
    rules = ChainRules(inst, tau, mode)
    cuts = chain_cuts(inst)
    out = [[ConnectivityTriple(cuts[0])]]
    for h in range(1, len(cuts) - 1):
        out.append(triples_at(inst.graph, cuts[h], rules.sizes(h)))
    out.append([ConnectivityTriple(cuts[-1])])
    return out


def prescribed_values(g, prev: Cell, cuts):
    """Values that an extension of prev must take on the combined vector."""
    cut = cuts[prev.index]
    fixed = {e: prev.y[e] for e in inside_edges(g, cut)}
    chosen = set(prev.triple.crossing)
    for e in delta_edges(g, cut):
        fixed[e] = 1.0 if e in chosen else 0.0
    return fixed


def _compatible_crossings(prev_triple, next_triple, g, cut_prev, cut_next):
    """F̄ ∩ δ(S_j) ⊆ F and F ∖ E[S_i] ⊆ F̄, checked without building anything."""
    f_prev, f_next = set(prev_triple.crossing), set(next_triple.crossing)
    for e in f_next:
        u, v = g.edges[e]
        if ((u in cut_prev) != (v in cut_prev)) and e not in f_prev:
            return False
    for e in f_prev:
        u, v = g.edges[e]
        if not (u in cut_next and v in cut_next) and e not in f_next:
            return False
    return True


def solve_extension_lp(prev: Cell, next_triple, inst, tau, mode="bounded", target=None, cuts=None, next_index=None):
    """Cheapest extension of prev's stored point to next_triple (an Extension)."""
    g = inst.graph
    rules = ChainRules(inst, tau, mode)
    cuts = cuts or chain_cuts(inst)
    if next_index is None:
        next_index = cuts.index(next_triple.cut)
    target = target or Target(g, next_triple)
    fixed = prescribed_values(g, prev, cuts)
    windows = [rules.window(h) for h in range(prev.index + 1, next_index)]
    return solve_extension(target, inst.float_costs(), fixed, windows)


def run_chain_dp(inst, tau, mode="bounded", prune=True) -> DpResult:
    """Fill the table and return the point stored at (V, ∅, {∅})."""
    g = inst.graph
    m = g.edge_count
    rules = ChainRules(inst, tau, mode)
    costs = inst.float_costs()
    cuts = chain_cuts(inst)
    triples = enumerate_triples(inst, rules.tau, mode)
    table = {}
    start = Cell(triples[0][0], 0, [0.0] * m, 0.0)
    table[start.triple] = start
    done = [[start]]
    live = [[start]]
    windows = {h: rules.window(h) for h in range(1, len(cuts) - 1)}
    window_ok = {h: windows[h].lower <= windows[h].upper for h in windows}
    lp_count = pruned = 0
    for i in range(1, len(cuts)):
        row = []
        for nxt in triples[i]:
            cell = Cell(nxt, i)
            target = Target(g, nxt)
            if target.viable:
                for j in range(i):
                    if not all(window_ok[h] for h in range(j + 1, i)):
                        continue
                    win = [windows[h] for h in range(j + 1, i)]
                    for prev in live[j]:
                        if not _compatible_crossings(prev.triple, nxt, g, cuts[j], cuts[i]):
                            continue
                        fixed = prescribed_values(g, prev, cuts)
                        if prune and lower_bound(target, costs, fixed) >= cell.cost - TIE_TOL:
                            pruned += 1
                            continue
                        ext = solve_extension(target, costs, fixed, win, cutoff=cell.cost - TIE_TOL if prune else None)
                        lp_count += 1
                        if ext.feasible and ext.cost < cell.cost - TIE_TOL:
                            cell.y, cell.cost, cell.predecessor = ext.y, ext.cost, prev.triple
            table[nxt] = cell
            row.append(cell)
        done.append(row)
        live.append([c for c in row if c.finite])
    root = done[-1][0]
    if not root.finite:
        raise NoFeasibleRelaxation(f"no point of the relaxation exists for tau={rules.tau}")
    log.info("chain DP: %d LPs, %d pruned, cost %.6g", lp_count, pruned, root.cost)
    return DpResult(root.y, root.cost, table, triples, lp_count, pruned, rules.tau)


def classify_cut(y, g, members, tau, mode="bounded", tol=INT_TOL):
    """'small' or 'large' per the τ-integral (or τ-odd) definition, else None."""
    crossing = delta_edges(g, members)
    load = sum(y[e] for e in crossing)
    integral = all(abs(y[e] - round(y[e])) <= tol for e in crossing)
    if mode == "odd":
        if integral and load <= tau + tol and round(load) % 2 == 1:
            return "small"
        return "large" if load >= tau + 2 - FEAS_TOL else None
    if integral and load <= tau + tol:
        return "small"
    return "large" if load >= tau + 1 - FEAS_TOL else None


def is_tau_integral(y, family, tau, g, mode="bounded"):
    """(all cuts classified, per-cut classification list)."""
    classes = [
        classify_cut(y, g, cs.members if hasattr(cs, "members") else frozenset(cs), tau, mode)
        for cs in family
    ]
    return all(c is not None for c in classes), classes


def is_tau_odd(y, family, tau, g):
    return is_tau_integral(y, family, tau, g, mode="odd")
