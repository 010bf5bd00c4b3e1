"""Dynamic program for spanning trees under laminar cut constraints.

Each cell holds an integral tree. A parent cell tries every combination of
pairwise disjoint child cells, solves the extension LP that pins the children,
rounds the optimum and keeps the cheapest accepted tree.
"""

import logging
import math
from dataclasses import dataclass, field

from .errors import NoFeasibleSolution, NotInPolytope
from .extension import CutWindow, Target, _precheck, _split_pins, lower_bound, solve_extension
from .graph import ConnectivityTriple, cut_load, delta_edges, inside_edges, is_spanning_tree
from .mccst import default_tau
from .numerics import INT_TOL
from .rounding import RandomSource, best_single_swap, decompose, swap_round
from .chain_dp import triples_at

log = logging.getLogger(__name__)

TIE_TOL = 1e-9


@dataclass
class TreeCell:
    triple: ConnectivityTriple
    tree: tuple = None
    cost: float = math.inf
    children: tuple = ()

    @property
    def finite(self):
        return self.tree is not None


@dataclass
class MlcstReport:
    tree: tuple
    cost: float
    loads: list
    tau: int
    epsilon: float
    seed: int
    table: dict = field(repr=False, default_factory=dict)
    stats: dict = field(default_factory=dict)


def within_relaxed(load, cs, epsilon):
    return (1 - epsilon) * cs.lower - 1e-9 <= load <= (1 + epsilon) * cs.upper + 1e-9


def verify_property15(tree, triple, inst, epsilon) -> bool:
    """Tree spans the contracted graph of the triple and meets the relaxed bounds
    on every family set strictly inside the triple's cut."""
    g = inst.graph
    target = Target(g, triple)
    if not target.viable:
        return False
    con = target.contraction
    local = target.local
    if any(e not in local for e in tree):
        return False
    if not is_spanning_tree(con.graph, [local[e] for e in tree]):
        return False
    with_f = set(tree) | set(triple.crossing)
    for cs in inst.family:
        if cs.members < triple.cut and not within_relaxed(cut_load(g, with_f, cs.members), cs, epsilon):
            return False
    return True


def merge_pins(fixed, extra):
    merged = dict(fixed)
    for e, v in extra.items():
        if merged.setdefault(e, v) != v:
            return None
    return merged


def admissible(target: Target, fixed) -> bool:
    """Quick consistency of prescribed values with a target, without an LP."""
    if not target.viable:
        return False
    pins, _ = _split_pins(target, fixed)
    return pins is not None and not _precheck(target, pins)


class LaminarDp:
    def __init__(self, inst, epsilon=0.5, tau=None, seed=0, max_round_attempts=None):
        self.inst = inst
        self.g = inst.graph
        n = self.g.vertex_count
        self.epsilon = epsilon
        self.tau = default_tau(n, epsilon) if tau is None else max(0, min(int(tau), n - 1))
        self.rng = RandomSource(seed)
        self.max_round_attempts = max_round_attempts or 64 * n
        self.costs = inst.float_costs()
        self.sets = [cs.members for cs in inst.family]
        self.table = {}
        self._pins = {}
        self.cells_by_set = {}
        self.stats = {"lp": 0, "pruned": 0, "rounds": 0, "failed_combinations": 0}

    def triples_for(self, i):
        cs = self.inst.family.sets[i]
        sizes = range(cs.lower, min(self.tau, cs.upper) + 1)
        return triples_at(self.g, cs.members, sizes)

    def child_pins(self, cell):
        """Values a child cell prescribes on E[S_i] and on δ(S_i); cached."""
        cached = self._pins.get(cell.triple)
        if cached is None:
            tree, chosen = set(cell.tree), set(cell.triple.crossing)
            cached = {e: float(e in tree) for e in inside_edges(self.g, cell.triple.cut)}
            cached.update({e: float(e in chosen) for e in delta_edges(self.g, cell.triple.cut)})
            self._pins[cell.triple] = cached
        return cached

    def fixed_values(self, child_cells):
        fixed = {}
        for cell in child_cells:
            for e, v in self.child_pins(cell).items():
                if fixed.get(e, v) != v:
                    return None
                fixed[e] = v
        return fixed

    def windows(self, cut, child_sets):
        return [
            self.window_for(i)
            for i, members in enumerate(self.sets)
            if members < cut and not any(members <= self.sets[c] for c in child_sets)
        ]

    def accept(self, tree, triple, y_cost):
        cost = sum(self.costs[e] for e in tree)
        if cost > y_cost + 1e-7:
            return None
        with_f = set(tree) | set(triple.crossing)
        for cs in self.inst.family:
            if cs.members < triple.cut and not within_relaxed(cut_load(self.g, with_f, cs.members), cs, self.epsilon):
                return None
        return cost

    def extend(self, child_cells, target: Target, fixed, windows, rng, cutoff=None):
        """Extension step: LP, then round and alter until a tree is accepted."""
        ext = solve_extension(target, self.costs, fixed, windows, cutoff)
        self.stats["lp"] += 1
        if not ext.feasible:
            return None
        con = target.contraction
        y_local = [ext.y[e] for e in con.edge_ids]
        costs_local = [self.costs[e] for e in con.edge_ids]
        triple = target.triple
        if all(v <= INT_TOL or v >= 1 - INT_TOL for v in y_local):
            tree = tuple(sorted(e for e in con.edge_ids if ext.y[e] >= 1 - INT_TOL))
            cost = self.accept(tree, triple, ext.cost)
            return None if cost is None else (tree, cost)
        try:
            comb = decompose(con.graph, y_local)
        except NotInPolytope as exc:
            log.warning("decomposition failed for %r: %s", triple, exc)
            return None
        for _ in range(self.max_round_attempts):
            self.stats["rounds"] += 1
            local_tree = swap_round(con.graph, comb, rng)
            local_tree = best_single_swap(con.graph, local_tree, y_local, costs_local)
            tree = tuple(sorted(con.edge_ids[e] for e in local_tree))
            cost = self.accept(tree, triple, ext.cost)
            if cost is not None:
                return tree, cost
        self.stats["failed_combinations"] += 1
        log.info("rounding gave up on %r after %d attempts", triple, self.max_round_attempts)
        return None

    def usable_children(self, target: Target, i):
        """Child cells at set i consistent with the target on their own.

        Cells with identical pins give identical extension LPs, so only the
        cheapest (then first) of each pin signature is kept.
        """
        out, seen = [], set()
        for cell in sorted((c for c in self.cells_by_set[i] if c.finite), key=lambda c: c.cost):
            pins = self.child_pins(cell)
            key = tuple(sorted(pins.items()))
            if key in seen or not admissible(target, pins):
                continue
            seen.add(key)
            out.append(cell)
        return out

    def window_for(self, i):
        cs = self.inst.family.sets[i]
        return CutWindow(cs.members, max(self.tau + 1, cs.lower), cs.upper)

    def combinations(self, target: Target, inner):
        """Each family set inside the target is covered by a chosen child, is a
        chosen child, or gets a load window; walked from the largest set down."""
        order = sorted(inner, key=lambda i: (-len(self.sets[i]), sorted(self.sets[i])))
        usable = {i: self.usable_children(target, i) for i in order}

        def walk(pos, chosen, cells, fixed, windows):
            if pos == len(order):
                yield tuple(cells), fixed, tuple(windows)
                return
            i = order[pos]
            if any(self.sets[i] <= self.sets[j] for j in chosen):
                yield from walk(pos + 1, chosen, cells, fixed, windows)
                return
            for cell in usable[i]:
                merged = merge_pins(fixed, self.child_pins(cell))
                if merged is None or (cells and not admissible(target, merged)):
                    continue
                cells.append(cell)
                yield from walk(pos + 1, chosen + [i], cells, merged, windows)
                cells.pop()
            win = self.window_for(i)
            if win.lower <= win.upper:
                yield from walk(pos + 1, chosen, cells, fixed, windows + [win])

        yield from walk(0, [], [], {}, [])

    def fill(self, triple, inner):
        cell = TreeCell(triple)
        target = Target(self.g, triple)
        if not target.viable:
            return cell
        for child_cells, fixed, windows in self.combinations(target, inner):
            if lower_bound(target, self.costs, fixed) >= cell.cost - TIE_TOL:
                self.stats["pruned"] += 1
                continue
            found = self.extend(child_cells, target, fixed, windows, self.rng.spawn(), cell.cost - TIE_TOL)
            if found and found[1] < cell.cost - TIE_TOL:
                cell.tree, cell.cost = found
                cell.children = tuple(c.triple for c in child_cells)
        return cell

    def fill_table(self):
        """Fill every cell bottom-up and return the root cell (not checked for finiteness)."""
        self._pins = {}
        n = self.g.vertex_count
        order = sorted(range(len(self.sets)), key=lambda i: (len(self.sets[i]), sorted(self.sets[i])))
        self.cells_by_set = {}
        for i in order:
            inner = [j for j in order if self.sets[j] < self.sets[i]]
            cells = [self.fill(t, inner) for t in self.triples_for(i)]
            for c in cells:
                self.table[c.triple] = c
            self.cells_by_set[i] = cells
        root = self.fill(ConnectivityTriple(frozenset(range(n))), order)
        self.table[root.triple] = root
        return root

    def run(self) -> MlcstReport:
        g = self.g
        root = self.fill_table()
        if not root.finite:
            raise NoFeasibleSolution("no tree found for the whole vertex set")
        loads = [cut_load(g, root.tree, s) for s in self.sets]
        return MlcstReport(root.tree, root.cost, loads, self.tau, self.epsilon, self.rng.seed, self.table, dict(self.stats))


def extend_laminar(children, parent, inst, epsilon, tau, rng=None, max_round_attempts=None):
    """One extension step. children: sequence of (triple, tree). Returns (tree, cost) or None."""
    dp = LaminarDp(inst, epsilon, tau, max_round_attempts=max_round_attempts)
    cells = [TreeCell(t, tuple(tree), 0.0) for t, tree in children]
    fixed = dp.fixed_values(cells)
    if fixed is None:
        return None
    child_sets = [dp.sets.index(t.cut) for t, _ in children]
    windows = dp.windows(parent.cut, child_sets)
    if any(w.lower > w.upper for w in windows):
        return None
    return dp.extend(cells, Target(inst.graph, parent), fixed, windows, rng or RandomSource(0))


def solve_mlcst(inst, epsilon=0.5, seed=0, tau=None, max_round_attempts=None) -> MlcstReport:
    return LaminarDp(inst, epsilon, tau, seed, max_round_attempts).run()
