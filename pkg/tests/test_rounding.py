import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lamtree.errors import NotInPolytope
from lamtree.generators import random_connected_graph
from lamtree.graph import Graph, complete_graph, is_spanning_tree, minimum_spanning_tree
from lamtree.oracle import all_spanning_trees
from lamtree.rounding import (
    ConvexCombination,
    RandomSource,
    best_single_swap,
    decompose,
    q_neighborhood_improve,
    swap_round,
)


def mix(g, rng, weights):
    y = [0.0] * g.edge_count
    for w in weights:
        for e in minimum_spanning_tree(g, [rng.random() for _ in g.edges]):
            y[e] += w
    return y


def check_combination(g, comb, y):
    assert sum(comb.weights()) == pytest.approx(1.0, abs=1e-7)
    assert all(w > 0 for w in comb.weights())
    assert len(comb.terms) <= g.edge_count + 1
    assert all(is_spanning_tree(g, t) for _, t in comb.terms)
    assert comb.recombine(g.edge_count) == pytest.approx(y, abs=1e-7)


# ---------------------------------------------------------------- decomposition


def test_integral_point_is_a_single_term():
    g = complete_graph(4)
    comb = decompose(g, [1, 1, 1, 0, 0, 0])
    assert comb.terms == [(1.0, (0, 1, 2))]


def test_triangle_decomposition():
    g = complete_graph(3)
    y = [2 / 3] * 3
    comb = decompose(g, y)
    assert len(comb.terms) == 3
    check_combination(g, comb, y)


def test_two_path_mixture():
    # a 4-cycle; two of its Hamiltonian paths, half each
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    y = [0.5, 1.0, 1.0, 0.5]
    comb = decompose(g, y)
    assert len(comb.terms) == 2
    check_combination(g, comb, y)


def test_points_outside_are_rejected():
    with pytest.raises(NotInPolytope):
        decompose(complete_graph(3), [1.0, 1.0, 0.5])


@given(st.integers(0, 10**6), st.integers(1, 4))
def test_recombination(seed, parts):
    rng = random.Random(seed)
    n = rng.randint(2, 7)
    g = random_connected_graph(rng, n, rng.randint(0, 6))
    raw = [rng.random() + 0.1 for _ in range(parts)]
    y = mix(g, rng, [w / sum(raw) for w in raw])
    check_combination(g, decompose(g, y), y)


# ---------------------------------------------------------------- swap rounding


def test_single_term_is_deterministic():
    g = complete_graph(4)
    comb = ConvexCombination([(1.0, (0, 1, 2))])
    assert {swap_round(g, comb, RandomSource(s)) for s in range(10)} == {(0, 1, 2)}


def test_same_seed_same_tree():
    rng = random.Random(3)
    g = random_connected_graph(rng, 7, 6)
    y = mix(g, rng, [0.2, 0.3, 0.5])
    comb = decompose(g, y)
    a = [swap_round(g, comb, RandomSource(11)) for _ in range(5)]
    src1, src2 = RandomSource(11), RandomSource(11)
    assert [swap_round(g, comb, src1) for _ in range(20)] == [swap_round(g, comb, src2) for _ in range(20)]
    assert len(set(a)) == 1


def test_integral_coordinates_are_kept():
    rng = random.Random(8)
    g = random_connected_graph(rng, 7, 5)
    y = mix(g, rng, [0.5, 0.5])
    ones = {e for e, v in enumerate(y) if v == 1.0}
    zeros = {e for e, v in enumerate(y) if v == 0.0}
    assert ones and zeros
    comb = decompose(g, y)
    src = RandomSource(0)
    for _ in range(500):
        t = set(swap_round(g, comb, src))
        assert ones <= t and not (zeros & t)


def test_marginals_on_a_mixed_point():
    rng = random.Random(12)
    g = random_connected_graph(rng, 6, 5)
    y = mix(g, rng, [0.2, 0.3, 0.5])
    comb = decompose(g, y)
    src = RandomSource(5)
    draws = 6000
    freq = [0] * g.edge_count
    for _ in range(draws):
        for e in swap_round(g, comb, src):
            freq[e] += 1
    for e, v in enumerate(y):
        sigma = math.sqrt(max(v * (1 - v), 1e-12) / draws)
        assert abs(freq[e] / draws - v) <= 4 * sigma + 1e-9


def test_concentration_on_a_large_set():
    rng = random.Random(1)
    g = random_connected_graph(rng, 26, 25)
    y = mix(g, rng, [0.25] * 4)
    comb = decompose(g, y)
    order = sorted(range(g.edge_count), key=lambda e: rng.random())
    chosen, mass = set(), 0.0
    for e in order:
        chosen.add(e)
        mass += y[e]
        if mass >= 20:
            break
    src = RandomSource(3)
    trials = 400
    outside = sum(
        not 0.5 * mass <= len(chosen & set(swap_round(g, comb, src))) <= 1.5 * mass for _ in range(trials)
    )
    bound = 2 * math.exp(-mass * 0.25 / 3)
    assert outside / trials <= bound + 3 * math.sqrt(bound * (1 - bound) / trials) + 0.01


# ---------------------------------------------------------------- alteration


def test_swap_with_integral_point_changes_nothing():
    g = complete_graph(4)
    tree = (0, 1, 2)
    assert best_single_swap(g, tree, [1, 1, 1, 0, 0, 0], [9, 9, 9, 1, 1, 1]) == tree


def test_cheaper_chord_replaces_a_path_edge():
    # path 0-1-2-3 plus chord 0-2; the chord and path edges 0-1, 1-2 are fractional
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 2)])
    y = [0.6, 0.7, 1.0, 0.7]
    costs = [5, 3, 1, 2]
    got = best_single_swap(g, (0, 1, 2), y, costs)
    assert got == (1, 2, 3)
    assert got == exhaustive_single_swap(g, (0, 1, 2), y, costs)


def exhaustive_single_swap(g, tree, y, costs):
    """All trees T - e + f with both fractional, by subset checks."""
    frac = {e for e, v in enumerate(y) if 1e-6 < v < 1 - 1e-6}
    best = (sum(costs[e] for e in tree), tuple(sorted(tree)))
    for e in sorted(set(tree) & frac):
        for f in sorted(frac - set(tree)):
            cand = tuple(sorted(set(tree) - {e} | {f}))
            if is_spanning_tree(g, cand):
                c = sum(costs[x] for x in cand)
                if c < best[0] - 1e-12:
                    best = (c, cand)
    return best[1]


@given(st.integers(0, 10**6))
def test_single_swap_matches_exhaustive_costs(seed):
    rng = random.Random(seed)
    g = random_connected_graph(rng, rng.randint(3, 7), rng.randint(1, 6))
    y = mix(g, rng, [0.5, 0.3, 0.2])
    costs = [rng.randint(1, 9) for _ in g.edges]
    tree = swap_round(g, decompose(g, y), RandomSource(seed))
    got = best_single_swap(g, tree, y, costs)
    want = exhaustive_single_swap(g, tree, y, costs)
    assert sum(costs[e] for e in got) == sum(costs[e] for e in want)
    assert sum(costs[e] for e in got) <= sum(costs[e] for e in tree)


def test_q_one_is_a_single_swap():
    rng = random.Random(21)
    g = random_connected_graph(rng, 6, 6)
    y = mix(g, rng, [0.5, 0.5])
    costs = [rng.randint(1, 9) for _ in g.edges]
    tree = swap_round(g, decompose(g, y), RandomSource(1))
    assert q_neighborhood_improve(g, tree, y, costs, 1) == best_single_swap(g, tree, y, costs)


@pytest.mark.parametrize("seed", range(10))
def test_long_local_search_reaches_the_face_optimum(seed):
    rng = random.Random(seed)
    g = random_connected_graph(rng, 6, 6)
    y = mix(g, rng, [0.4, 0.35, 0.25])
    costs = [rng.randint(1, 9) for _ in g.edges]
    ones = {e for e, v in enumerate(y) if v >= 1 - 1e-9}
    zeros = {e for e, v in enumerate(y) if v <= 1e-9}
    face_best = min(
        sum(costs[e] for e in t) for t in all_spanning_trees(g) if ones <= set(t) and not zeros & set(t)
    )
    tree = swap_round(g, decompose(g, y), RandomSource(seed))
    out = q_neighborhood_improve(g, tree, y, costs, g.vertex_count)
    assert sum(costs[e] for e in out) <= face_best


def test_q_two_success_rate():
    rng = random.Random(77)
    g = complete_graph(6)
    y = mix(g, rng, [0.3, 0.3, 0.2, 0.2])
    costs = [rng.randint(1, 20) for _ in g.edges]
    target = sum(c * v for c, v in zip(costs, y))
    comb = decompose(g, y)
    src = RandomSource(2)
    trials = 2000
    hits = sum(
        sum(costs[e] for e in q_neighborhood_improve(g, swap_round(g, comb, src), y, costs, 2)) <= target + 1e-9
        for _ in range(trials)
    )
    assert hits / trials >= 2 / 5 - 3 * math.sqrt(0.24 / trials)
