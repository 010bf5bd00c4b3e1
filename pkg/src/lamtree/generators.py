"""Instance generators: the two fixed constructions and seeded random families."""

import random
from fractions import Fraction

from .graph import CutFamily, CutSet, Graph, cut_load, minimum_spanning_tree
from .instances import ChainInstance, LaminarInstance, MetricInstance


def gen_hk(k: int) -> ChainInstance:
    """Gap instance H_k with its fractional point in metadata["fractional_point"].

    A path v_0..v_{2^(k-1)}; for every level l = 1..k and s = 1..2^(k-l) a vertex w
    joined to v_{(s-1)2^(l-1)} and v_{s 2^(l-1)}. Cut S_l collects v_i with 2i < l
    and w_{i,j} with i + j < l, for l = 1..2^k, all with bounds 0..k+1.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    path_len = 2 ** (k - 1)
    names = [("v", i) for i in range(path_len + 1)]
    pairs = []
    for level in range(1, k + 1):
        step = 2 ** (level - 1)
        for s in range(1, 2 ** (k - level) + 1):
            pairs.append(((s - 1) * step, s * step))
    names += [("w", i, j) for i, j in pairs]
    index = {name: x for x, name in enumerate(names)}
    edges = [(i, i + 1) for i in range(path_len)]
    y = [Fraction(1)] * path_len
    for i, j in pairs:
        w = index[("w", i, j)]
        edges += [(i, w), (w, j)]
        y += [Fraction(1, 2), Fraction(1, 2)]
    cuts = []
    for ell in range(1, 2**k + 1):
        members = {index[("v", i)] for i in range(path_len + 1) if 2 * i < ell}
        members |= {index[("w", i, j)] for i, j in pairs if i + j < ell}
        cuts.append(CutSet(frozenset(members), 0, k + 1))
    graph = Graph(len(names), edges)
    labels = [f"v{n[1]}" if n[0] == "v" else f"w{n[1]}_{n[2]}" for n in names]
    return ChainInstance(
        graph,
        [1] * len(edges),
        CutFamily(cuts, "chain"),
        {"name": f"H_{k}", "k": k, "fractional_point": y, "labels": labels},
    )


_B_VERTICES = (
    "u1 v1 w1 u1' v1' w1' u2' v2' w2' u2 v2 w2 "
    "tl tl1 tl2 bl bl1 bl2 ml1 ml2 tr tr1 tr2 br br1 br2 mr1 mr2"
).split()
_B_PATH = (
    "tl2 ml2 bl2 bl bl1 ml1 tl1 tl u1 u1' u2' u2 v2 v2' v1' v1 w1 w1' w2' w2 "
    "br br1 mr1 tr1 tr tr2 mr2 br2"
).split()
_B_EXTRA = [
    ("tl", "tl2"), ("tl2", "tl1"), ("bl1", "bl2"), ("bl", "w1"),
    ("br", "br2"), ("br2", "br1"), ("tr1", "tr2"), ("tr", "u2"),
]
_B_UNIT = {frozenset(("v1", "w1")), frozenset(("u2", "v2"))}
_B_SIDE1 = "u1 v1 w1 tl tl1 tl2 bl bl1 bl2 ml1 ml2".split()
_B_SIDE2 = "u2 v2 w2 tr tr1 tr2 br br1 br2 mr1 mr2".split()
_B_SINGLETONS = "tl tl1 tl2 bl bl1 bl2 tr tr1 tr2 br br1 br2".split()


def gen_appendix_b(tau: int = 0) -> LaminarInstance:
    """The two-gadget laminar instance of optimum 2, with tau pendant vertices of
    cost 0 on every singleton cut and those cuts' bounds raised by tau."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    index = {name: i for i, name in enumerate(_B_VERTICES)}
    named = list(zip(_B_PATH, _B_PATH[1:])) + _B_EXTRA
    edges = [(index[a], index[b]) for a, b in named]
    costs = [1 if frozenset(p) in _B_UNIT else 0 for p in named]
    labels = list(_B_VERTICES)
    sides = [{index[x] for x in _B_SIDE1}, {index[x] for x in _B_SIDE2}]
    n = len(labels)
    for x in _B_SINGLETONS:
        for t in range(tau):
            labels.append(f"{x}#{t + 1}")
            edges.append((index[x], n))
            costs.append(0)
            # the pendant lives on x's side so the side cuts keep their loads
            next(side for side in sides if index[x] in side).add(n)
            n += 1
    sets = [CutSet(frozenset(side), 0, 3) for side in sides]
    sets += [CutSet(frozenset([index[x]]), tau, 2 + tau) for x in _B_SINGLETONS]
    return LaminarInstance(
        Graph(n, edges),
        costs,
        CutFamily(sets, "laminar"),
        {"name": f"two_gadget_tau{tau}", "tau": tau, "labels": labels},
    )


def random_connected_graph(rng: random.Random, n: int, extra: int) -> Graph:
    """A random spanning tree plus `extra` further distinct edges."""
    order = list(range(n))
    rng.shuffle(order)
    edges = set()
    for i in range(1, n):
        u, v = order[i], order[rng.randrange(i)]
        edges.add((min(u, v), max(u, v)))
    others = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
    rng.shuffle(others)
    edges |= set(others[:extra])
    return Graph(n, sorted(edges))


def _random_tree(rng, g):
    weights = [rng.random() for _ in g.edges]
    return minimum_spanning_tree(g, weights)


def _bounds_around(rng, load, slack):
    return max(0, load - rng.randint(0, slack)), load + rng.randint(0, slack)


def random_chain_instance(
    seed, n_range=(4, 8), max_cuts=3, extra_edges=(1, 4), cost_range=(1, 9), slack=1
) -> ChainInstance:
    """Feasible by construction: bounds are placed around the loads of a hidden tree."""
    rng = random.Random(seed)
    n = rng.randint(*n_range)
    g = random_connected_graph(rng, n, rng.randint(*extra_edges))
    costs = [rng.randint(*cost_range) for _ in g.edges]
    hidden = _random_tree(rng, g)
    order = list(range(n))
    rng.shuffle(order)
    k = rng.randint(1, min(max_cuts, n - 1))
    sizes = sorted(rng.sample(range(1, n), k))
    sets = []
    for size in sizes:
        members = frozenset(order[:size])
        sets.append(CutSet(members, *_bounds_around(rng, cut_load(g, hidden, members), slack)))
    return ChainInstance(g, costs, CutFamily(sets, "chain"), {"seed": seed, "hidden_tree": hidden})


def random_laminar_instance(
    seed, n_range=(5, 8), extra_edges=(1, 4), cost_range=(1, 9), slack=1, width=2
) -> LaminarInstance:
    """Random laminar family of the given width (two or more disjoint branches)."""
    rng = random.Random(seed)
    n = rng.randint(max(n_range[0], width + 1), n_range[1])
    g = random_connected_graph(rng, n, rng.randint(*extra_edges))
    costs = [rng.randint(*cost_range) for _ in g.edges]
    hidden = _random_tree(rng, g)
    order = list(range(n))
    rng.shuffle(order)
    # split a proper prefix into `width` disjoint blocks, nest a chain inside some
    room = rng.randint(width, n - 1)
    cuts_at = sorted(rng.sample(range(1, room), width - 1)) if width > 1 else []
    blocks = [order[a:b] for a, b in zip([0] + cuts_at, cuts_at + [room])]
    members = []
    for block in blocks:
        members.append(frozenset(block))
        if len(block) > 1 and rng.random() < 0.6:
            members.append(frozenset(block[: rng.randint(1, len(block) - 1)]))
    if width > 1 and room < n - 1 and rng.random() < 0.5:
        members.append(frozenset(order[:room]))
    sets = [
        CutSet(m, *_bounds_around(rng, cut_load(g, hidden, m), slack))
        for m in sorted(set(members), key=lambda s: (len(s), sorted(s)))
    ]
    return LaminarInstance(g, costs, CutFamily(sets, "laminar"), {"seed": seed, "hidden_tree": hidden})


def random_metric_instance(seed, n_range=(5, 8), parity_size=2, kind="euclidean", scale=100) -> MetricInstance:
    """Integer-rounded planar points, then closed under shortest paths so the
    triangle inequality holds exactly."""
    rng = random.Random(seed)
    n = rng.randint(*n_range)
    if kind == "euclidean":
        pts = [(rng.random(), rng.random()) for _ in range(n)]
        d = [[round(scale * ((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2) ** 0.5) for b in pts] for a in pts]
    else:
        d = [[0] * n for _ in range(n)]
        for u in range(n):
            for v in range(u + 1, n):
                d[u][v] = d[v][u] = rng.randint(1, scale)
    for w in range(n):
        for u in range(n):
            for v in range(n):
                if d[u][w] + d[w][v] < d[u][v]:
                    d[u][v] = d[u][w] + d[w][v]
    parity = sorted(rng.sample(range(n), parity_size))
    return MetricInstance(d, parity, parity[-1], {"seed": seed})
