"""Exhaustive ground truth: tree enumeration, constrained optima, exact paths and
joins, and certification of the fractional gap family."""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import TooLarge
from .generators import gen_hk
from .graph import Graph, delta_edges, is_connected
from .instances import MetricInstance
from .polytope import separate_st

TREE_LIMIT = 2_000_000
PATH_LIMIT = 16


@dataclass
class OracleResult:
    value: float
    witness: object = None
    count: int = 0
    size: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def feasible(self):
        return self.count > 0


def kirchhoff_count(g: Graph) -> int:
    """Number of spanning trees, from an exact integer Bareiss determinant."""
    n = g.vertex_count
    if n <= 1:
        return 1
    lap = [[0] * n for _ in range(n)]
    for u, v in g.edges:
        lap[u][u] += 1
        lap[v][v] += 1
        lap[u][v] -= 1
        lap[v][u] -= 1
    m = [row[1:] for row in lap[1:]]
    size = n - 1
    sign, prev = 1, 1
    for k in range(size - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, size) if m[r][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pivot = m[k][k]
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]) // prev
        prev = pivot
    return sign * m[size - 1][size - 1]


def _complete_index(g: Graph):
    """Map from vertex pair to edge id when g is the simple complete graph."""
    n = g.vertex_count
    if g.edge_count != n * (n - 1) // 2:
        return None
    index = {}
    for e, (u, v) in enumerate(g.edges):
        key = (min(u, v), max(u, v))
        if key in index:
            return None
        index[key] = e
    return index


def _prufer_trees(n, index):
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for x in seq:
            degree[x] += 1
        tree = []
        for x in seq:
            leaf = degree.index(1)
            tree.append(index[(min(leaf, x), max(leaf, x))])
            degree[leaf] -= 1
            degree[x] -= 1
        u, v = (i for i in range(n) if degree[i] == 1)
        tree.append(index[(u, v)])
        yield tuple(sorted(tree))


def _contract_delete(g: Graph):
    """Each spanning tree once: branch on the lowest remaining edge between two
    different components, including it (contraction) or dropping it (deletion)
    when the rest still connects the graph."""
    n, edges = g.vertex_count, g.edges

    def label_of(parent, v):
        while parent[v] != v:
            v = parent[v]
        return v

    def connected(parent, start):
        comp = {}
        for v in range(n):
            comp.setdefault(label_of(parent, v), len(comp))
        if len(comp) == 1:
            return True
        local = list(range(len(comp)))

        def find(x):
            while local[x] != x:
                local[x] = local[local[x]]
                x = local[x]
            return x

        left = len(comp) - 1
        for e in range(start, len(edges)):
            a = find(comp[label_of(parent, edges[e][0])])
            b = find(comp[label_of(parent, edges[e][1])])
            if a != b:
                local[a] = b
                left -= 1
                if not left:
                    return True
        return False

    chosen = []

    def walk(start, parent, remaining):
        if remaining == 0:
            yield tuple(chosen)
            return
        e = start
        while e < len(edges):
            a, b = label_of(parent, edges[e][0]), label_of(parent, edges[e][1])
            if a != b:
                break
            e += 1
        else:
            return
        child = list(parent)
        child[max(a, b)] = min(a, b)
        chosen.append(e)
        yield from walk(e + 1, child, remaining - 1)
        chosen.pop()
        if connected(parent, e + 1):
            yield from walk(e + 1, parent, remaining)

    if n <= 1:
        yield ()
        return
    if not is_connected(g):
        return
    yield from walk(0, list(range(n)), n - 1)


def _peel_leaves(g: Graph):
    """Strip degree-one vertices repeatedly; their edges lie in every spanning tree.

    Returns the forced edge ids, the core graph and the core edge id map.
    """
    alive = set(range(g.vertex_count))
    live_edges = set(range(g.edge_count))
    degree = [len(a) for a in g.adjacency]
    forced = []
    queue = [v for v in alive if degree[v] == 1]
    while queue and len(alive) > 2:
        v = queue.pop()
        if v not in alive or degree[v] != 1:
            continue
        (e,) = [e for e in g.adjacency[v] if e in live_edges]
        forced.append(e)
        live_edges.discard(e)
        alive.discard(v)
        w = g.other(e, v)
        degree[w] -= 1
        if degree[w] == 1:
            queue.append(w)
    renumber = {v: i for i, v in enumerate(sorted(alive))}
    ids = sorted(live_edges)
    core = Graph(len(renumber), [(renumber[g.edges[e][0]], renumber[g.edges[e][1]]) for e in ids])
    return forced, core, ids


def all_spanning_trees(g: Graph, limit=TREE_LIMIT):
    """Yield every spanning tree as a sorted tuple of edge ids.

    Raises TooLarge when the matrix-tree count exceeds `limit`.
    """
    count = kirchhoff_count(g)
    if count > limit:
        raise TooLarge(f"{count} spanning trees exceed the enumeration limit {limit}")
    if count == 0:
        return iter(())
    forced, core, ids = _peel_leaves(g)
    index = _complete_index(core)
    if index is not None and core.vertex_count >= 3:
        inner = _prufer_trees(core.vertex_count, index)
    else:
        inner = _contract_delete(core)
    if not forced:
        return inner
    return (tuple(sorted(forced + [ids[e] for e in tree])) for tree in inner)


@lru_cache(maxsize=32)
def tree_array(g: Graph, limit=TREE_LIMIT) -> np.ndarray:
    """All spanning trees as an int array of shape (count, n-1); cached per graph."""
    width = max(g.vertex_count - 1, 0)
    trees = np.fromiter(
        itertools.chain.from_iterable(all_spanning_trees(g, limit)), dtype=np.int64
    )
    out = trees.reshape(-1, width) if width else np.zeros((1, 0), dtype=np.int64)
    out.flags.writeable = False
    return out


def _edge_mask(g, edge_set):
    mask = np.zeros(g.edge_count, dtype=np.int64)
    mask[list(edge_set)] = 1
    return mask


def tree_loads(g: Graph, trees: np.ndarray, cut) -> np.ndarray:
    return _edge_mask(g, delta_edges(g, cut))[trees].sum(axis=1)


def tree_degrees(g: Graph, trees: np.ndarray) -> np.ndarray:
    ends = np.asarray(g.edges, dtype=np.int64)
    deg = np.zeros((trees.shape[0], g.vertex_count), dtype=np.int64)
    rows = np.arange(trees.shape[0])
    for col in range(trees.shape[1]):
        np.add.at(deg, (rows, ends[trees[:, col], 0]), 1)
        np.add.at(deg, (rows, ends[trees[:, col], 1]), 1)
    return deg


def _best(trees, values, feasible):
    count = int(feasible.sum())
    if not count:
        return OracleResult(math.inf, None, 0, len(trees))
    masked = np.where(feasible, values, np.inf)
    best = int(np.argmin(masked))
    value = values[best]
    value = value.item() if hasattr(value, "item") else value
    return OracleResult(value, tuple(int(e) for e in trees[best]), count, len(trees))


def brute_opt_constrained(inst, limit=TREE_LIMIT) -> OracleResult:
    """Cheapest tree with a_S <= load <= b_S on every set of the family."""
    g = inst.graph
    trees = tree_array(g, limit)
    if all(float(c).is_integer() for c in inst.costs):
        costs = np.asarray([int(c) for c in inst.costs], dtype=np.int64)
    else:
        costs = np.asarray([Fraction(c) for c in inst.costs], dtype=object)
    feasible = np.ones(len(trees), dtype=bool)
    for cs in inst.family:
        loads = tree_loads(g, trees, cs.members)
        feasible &= (loads >= cs.lower) & (loads <= cs.upper)
    values = costs[trees].sum(axis=1) if trees.shape[1] else np.zeros(len(trees), dtype=object)
    return _best(trees, values, feasible)


def brute_min_odd_tree(inst: MetricInstance, cuts, limit=TREE_LIMIT) -> OracleResult:
    """Shortest spanning tree of the complete graph whose load on every given cut is odd."""
    g = inst.graph
    trees = tree_array(g, limit)
    feasible = np.ones(len(trees), dtype=bool)
    for cut in cuts:
        feasible &= tree_loads(g, trees, cut) % 2 == 1
    lengths = np.asarray(inst.edge_lengths(), dtype=float)
    return _best(trees, lengths[trees].sum(axis=1), feasible)


def brute_min_join_tree(inst: MetricInstance, limit=TREE_LIMIT) -> OracleResult:
    """Shortest spanning tree whose odd-degree vertices are exactly the parity set."""
    g = inst.graph
    trees = tree_array(g, limit)
    target = np.zeros(g.vertex_count, dtype=np.int64)
    target[list(inst.parity)] = 1
    feasible = np.all(tree_degrees(g, trees) % 2 == target, axis=1)
    lengths = np.asarray(inst.edge_lengths(), dtype=float)
    return _best(trees, lengths[trees].sum(axis=1), feasible)


def brute_hamiltonian_path(inst: MetricInstance, s: int, t: int, limit=PATH_LIMIT) -> OracleResult:
    """Shortest s-t path through every vertex, by dynamic programming over subsets."""
    n = inst.n
    if n > limit:
        raise TooLarge(f"{n} vertices exceed the path oracle limit {limit}")
    d = inst.lengths
    if n == 1:
        return OracleResult(0, (s,), 1, 1)
    if s == t:
        return OracleResult(math.inf, None, 0, 0)
    full = (1 << n) - 1
    best = {(1 << s, s): (0, None)}
    for mask in range(1, full + 1):
        if not mask >> s & 1:
            continue
        for last in range(n):
            entry = best.get((mask, last))
            if entry is None or (last == t and mask != full):
                continue
            for nxt in range(n):
                if mask >> nxt & 1 or (nxt == t and mask | 1 << nxt != full):
                    continue
                key = (mask | 1 << nxt, nxt)
                cand = entry[0] + d[last][nxt]
                if key not in best or cand < best[key][0]:
                    best[key] = (cand, last)
    if (full, t) not in best:
        return OracleResult(math.inf, None, 0, 0)
    order, mask, v = [], full, t
    while v is not None:
        order.append(v)
        prev = best[(mask, v)][1]
        mask ^= 1 << v
        v = prev
    return OracleResult(best[(full, t)][0], tuple(reversed(order)), math.factorial(n - 2), 1 << n)


def brute_path_permutations(inst: MetricInstance, s: int, t: int) -> OracleResult:
    """Permutation search, kept as a second route for cross-checking the subset DP."""
    middle = [v for v in range(inst.n) if v not in (s, t)]
    best, witness, count = math.inf, None, 0
    for perm in itertools.permutations(middle):
        order = (s, *perm, t)
        length = sum(inst.lengths[a][b] for a, b in zip(order, order[1:]))
        count += 1
        if length < best:
            best, witness = length, order
    return OracleResult(best, witness, count, count)


@dataclass
class GapCertificate:
    k: int
    cut_values: list
    max_loads_min: int
    ratio: Fraction
    tree_count: int
    every_tree_hits_k: bool
    point_feasible: bool
    closed_form_matches: bool


def certify_gap_instance(k: int, limit=TREE_LIMIT) -> GapCertificate:
    """Check the fractional point of H_k and the best achievable maximum cut load.

    The ratio is (min over trees of the max load) / (fractional cut value), in
    exact arithmetic. `closed_form_matches` records whether it equals 2 - 2/(k+2).
    """
    if k > 3:
        raise TooLarge("gap certification enumerates trees and is limited to k <= 3")
    inst = gen_hk(k)
    g = inst.graph
    y = [Fraction(v) for v in inst.metadata["fractional_point"]]
    cut_values = [sum((y[e] for e in delta_edges(g, cs.members)), Fraction(0)) for cs in inst.family]
    total = sum(y, Fraction(0))
    feasible = total == g.vertex_count - 1 and separate_st(g, [float(v) for v in y]) is None
    trees = tree_array(g, limit)
    loads = np.stack([tree_loads(g, trees, cs.members) for cs in inst.family], axis=1)
    worst = loads.max(axis=1)
    best = int(worst.min())
    ratio = Fraction(best) / max(cut_values)
    return GapCertificate(
        k,
        cut_values,
        best,
        ratio,
        len(trees),
        bool((worst >= k).all()),
        feasible,
        ratio == 2 - Fraction(2, k + 2),
    )
