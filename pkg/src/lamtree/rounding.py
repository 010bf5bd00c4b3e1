"""Marginal-preserving tree rounding and local exchange improvement.

A point of the spanning tree polytope is written as a convex combination of
trees, then the trees are merged pairwise by random exchanges (swap rounding).
"""

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NotInPolytope
from .graph import Graph, UnionFind, tree_path
from .numerics import FEAS_TOL, INT_TOL
from .polytope import EXHAUSTIVE_LIMIT, min_deficiency_set, separate_st

log = logging.getLogger(__name__)


@dataclass
class ConvexCombination:
    terms: list  # (weight, sorted tuple of edge ids)

    def weights(self):
        return [w for w, _ in self.terms]

    def recombine(self, m):
        out = [0.0] * m
        for w, tree in self.terms:
            for e in tree:
                out[e] += w
        return out


class RandomSource:
    """Seeded generator; the same seed replays the same draws."""

    def __init__(self, seed=0):
        self.seed = seed
        self.gen = np.random.default_rng(seed)

    def random(self):
        return float(self.gen.random())

    def spawn(self):
        return RandomSource(int(self.gen.integers(2**63)))


def _core(g: Graph, y):
    """Contract edges at one and drop edges at zero."""
    ones = [e for e, v in enumerate(y) if v >= 1 - INT_TOL]
    uf = UnionFind(range(g.vertex_count))
    for e in ones:
        if not uf.union(*g.edges[e]):
            raise NotInPolytope(f"edges at value one contain a cycle through {e}")
    label = {}
    for v in range(g.vertex_count):
        label.setdefault(uf.find(v), len(label))
    ids, edges = [], []
    for e, (u, v) in enumerate(g.edges):
        if INT_TOL < y[e] < 1 - INT_TOL:
            a, b = label[uf.find(u)], label[uf.find(v)]
            if a == b:
                raise NotInPolytope(f"fractional edge {e} closes a cycle with edges at one")
            ids.append(e)
            edges.append((a, b))
    return ones, Graph(len(label), edges), ids


def _kruskal_by(g: Graph, order):
    uf = UnionFind(range(g.vertex_count))
    return [e for e in order if uf.union(*g.edges[e])]


def face_tree(g: Graph, y, tol=FEAS_TOL):
    """A spanning tree inside supp(y) on the minimal face containing y.

    Such a tree spans every tight set. Small instances weigh each edge by the
    number of tight sets containing it and take a maximum-weight tree; larger
    ones grow the tree through the minimal tight sets of its edges.
    """
    n = g.vertex_count
    if n <= 1:
        return []
    support = [e for e in range(g.edge_count) if y[e] > INT_TOL]
    if n <= EXHAUSTIVE_LIMIT:
        inner = kernels.inner_sums(n, g.edges, y)
        masks = np.arange(1 << n, dtype=np.int64)
        size = np.zeros(1 << n, dtype=np.int64)
        for b in range(n):
            size += (masks >> b) & 1
        tight = masks[(size >= 2) & (inner >= size - 1 - tol * max(1, g.edge_count))]
        weight = [int(np.count_nonzero((tight >> u) & (tight >> v) & 1)) for u, v in g.edges]
        order = sorted(support, key=lambda e: (-weight[e], e))
    else:
        return _face_tree_by_cuts(g, y, support, tol)
    tree = _kruskal_by(g, order)
    if len(tree) != n - 1:
        raise NotInPolytope("support of the point does not connect the graph")
    return sorted(tree)


def _face_tree_by_cuts(g: Graph, y, support, tol):
    """Span a minimal tight set, contract it, repeat.

    A minimal tight set has no tight proper subset of size two or more, so any
    tree of its support works, and contraction keeps the remaining tight sets.
    """
    uf = UnionFind(range(g.vertex_count))
    tree = []
    slack = 1 + tol * max(1, g.edge_count)
    while True:
        label = {}
        for v in range(g.vertex_count):
            label.setdefault(uf.find(v), len(label))
        if len(label) == 1:
            return sorted(tree)
        ids = [e for e in support if uf.find(g.edges[e][0]) != uf.find(g.edges[e][1])]
        if not ids:
            raise NotInPolytope("support of the point does not connect the graph")
        local = Graph(len(label), [(label[uf.find(g.edges[e][0])], label[uf.find(g.edges[e][1])]) for e in ids])
        values = [y[e] for e in ids]
        best = None
        for i, (a, b) in enumerate(local.edges):
            value, members = min_deficiency_set(local, values, (a, b))
            if value <= slack and (best is None or len(members) < len(best)):
                best = members
        if best is None:
            raise NotInPolytope("no tight set found; the point is off the polytope")
        for i, (a, b) in enumerate(local.edges):
            if a in best and b in best and uf.union(*g.edges[ids[i]]):
                tree.append(ids[i])


def _max_step(g: Graph, y, tree, tol):
    """Largest λ with (y - λ·χ^T)/(1 - λ) still in the polytope (Newton iteration)."""
    in_tree = set(tree)
    lam = min(y[e] for e in tree)
    if lam >= 1 - INT_TOL:
        return 1.0
    for _ in range(4 * g.edge_count + 20):
        residual = [(y[e] - (lam if e in in_tree else 0.0)) / (1 - lam) for e in range(g.edge_count)]
        cut = separate_st(g, residual, tol)
        if cut is None:
            return lam
        if cut.kind != "subset":
            raise NotInPolytope(f"residual left the polytope: {cut}")
        members = cut.vertices
        inside = [e for e, (u, v) in enumerate(g.edges) if u in members and v in members]
        slack = len(members) - 1 - sum(y[e] for e in inside)
        room = len(members) - 1 - sum(1 for e in inside if e in in_tree)
        if room <= 0:
            raise NotInPolytope("the chosen tree is not on the face of the point")
        new = slack / room
        if new >= lam - 1e-15:
            raise NotInPolytope("step search made no progress")
        lam = max(new, 0.0)
    raise NotInPolytope("step search did not converge")


def decompose(g: Graph, y, tol=FEAS_TOL) -> ConvexCombination:
    """Write y as a convex combination of spanning trees of g."""
    y = [float(v) for v in y]
    bad = separate_st(g, y, tol)
    if bad is not None:
        raise NotInPolytope(f"point is not in the spanning tree polytope: {bad}")
    ones, core, ids = _core(g, y)
    residual = [y[e] for e in ids]
    terms = []
    remaining = 1.0
    for _ in range(core.edge_count + 2):
        if core.vertex_count <= 1 or remaining <= FEAS_TOL:
            break
        local_tree = face_tree(core, residual, tol)
        if all(residual[e] >= 1 - INT_TOL for e in local_tree):
            terms.append((remaining, local_tree))
            remaining = 0.0
            break
        lam = _max_step(core, residual, local_tree, tol)
        if lam <= FEAS_TOL:
            raise NotInPolytope("zero step: the tree left the minimal face")
        terms.append((remaining * lam, local_tree))
        chosen = set(local_tree)
        residual = [(r - (lam if e in chosen else 0.0)) / (1 - lam) for e, r in enumerate(residual)]
        residual = [0.0 if r <= INT_TOL else 1.0 if r >= 1 - INT_TOL else r for r in residual]
        remaining *= 1 - lam
    else:
        raise NotInPolytope("decomposition did not terminate")
    if core.vertex_count <= 1:
        terms = [(1.0, [])]
    elif remaining > FEAS_TOL:
        raise NotInPolytope(f"decomposition left weight {remaining}")
    total = sum(w for w, _ in terms)
    return ConvexCombination(
        [(w / total, tuple(sorted(ones + [ids[e] for e in tree]))) for w, tree in terms]
    )


def _exchange(g: Graph, t1: set, t2: set, e):
    """Edge f of t2 - t1 with both t1 - e + f and t2 - f + e spanning trees."""
    u, v = g.edges[e]
    uf = UnionFind(range(g.vertex_count))
    for h in t1:
        if h != e:
            uf.union(*g.edges[h])
    side = uf.find(u)
    for f in sorted(tree_path(g, t2, u, v)):
        a, b = g.edges[f]
        if f not in t1 and (uf.find(a) == side) != (uf.find(b) == side):
            return f
    raise AssertionError("no exchange edge; inputs are not spanning trees")


def swap_round(g: Graph, comb: ConvexCombination, rng: RandomSource):
    """Merge the trees of the combination into one random tree, keeping marginals."""
    weight, current = comb.terms[0][0], set(comb.terms[0][1])
    for w2, tree in comb.terms[1:]:
        other = set(tree)
        while current != other:
            e = min(current - other)
            f = _exchange(g, current, other, e)
            if rng.random() < weight / (weight + w2):
                other.remove(f)
                other.add(e)
            else:
                current.remove(e)
                current.add(f)
        weight += w2
    return tuple(sorted(current))


def round_point(g: Graph, y, rng: RandomSource, comb=None):
    return swap_round(g, comb or decompose(g, y), rng)


def best_single_swap(g: Graph, tree, y, costs):
    """Cheapest of T and all T - e + f with y_e and y_f strictly fractional.

    Returns T itself unless some exchange is strictly cheaper; ties go to the
    lowest (e, f).
    """
    in_tree = set(tree)
    frac = [INT_TOL < v < 1 - INT_TOL for v in y]
    best_gain, best = 0.0, None
    for f in range(g.edge_count):
        if f in in_tree or not frac[f]:
            continue
        path = tree_path(g, tree, *g.edges[f])
        for e in path:
            if not frac[e]:
                continue
            gain = costs[e] - costs[f]
            if gain > best_gain + 1e-12 or (best is not None and abs(gain - best_gain) <= 1e-12 and (e, f) < best):
                if gain > 1e-12:
                    best_gain, best = gain, (e, f)
    if best is None:
        return tuple(sorted(tree))
    e, f = best
    return tuple(sorted((in_tree - {e}) | {f}))


def q_neighborhood_improve(g: Graph, tree, y, costs, q: int):
    """Up to q successive improving single exchanges on fractional coordinates."""
    current = tuple(sorted(tree))
    for _ in range(q):
        nxt = best_single_swap(g, current, y, costs)
        if nxt == current:
            break
        current = nxt
    return current
