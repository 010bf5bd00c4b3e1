import itertools

import pytest

from lamtree.chain_dp import classify_cut
from lamtree.errors import NotConnectedJoin, NumericalFailure, TooManyOddVertices
from lamtree.generators import random_metric_instance
from lamtree.graph import cut_load, delta_edges, is_spanning_tree, laminar_width, minimum_spanning_tree
from lamtree.instances import MetricInstance
from lamtree.oracle import brute_hamiltonian_path, brute_min_join_tree, brute_min_odd_tree
from lamtree.tsp import (
    min_parity_join,
    narrow_cuts,
    odd_tau,
    odd_vertices,
    parity_certificate,
    run_tau_odd_dp,
    shortcut_to_tree,
    solve_held_karp,
    solve_mscj,
    solve_path_tsp,
)


def metric(rows, parity):
    return MetricInstance(rows, parity)


def unit(n, parity=(0, 1)):
    return metric([[0 if i == j else 1 for j in range(n)] for i in range(n)], parity)


def line(points, parity):
    return metric([[abs(a - b) for b in points] for a in points], parity)


def edge_id(inst, u, v):
    return inst.graph.edges.index((min(u, v), max(u, v)))


# ---------------------------------------------------------------- Held-Karp


def test_held_karp_on_unit_triangle():
    assert solve_held_karp(unit(3)).value == pytest.approx(2.0)


def test_held_karp_scales_linearly():
    inst = random_metric_instance(5, n_range=(6, 6))
    scaled = metric([[3 * x for x in row] for row in inst.lengths], inst.parity)
    assert solve_held_karp(scaled).value == pytest.approx(3 * solve_held_karp(inst).value)


def held_karp_violations(inst, x, tol=1e-6):
    """Every cut constraint of the relaxation, checked by enumeration."""
    n, g = inst.n, inst.graph
    parity = set(inst.parity)
    bad = []
    for v in range(n):
        need = 1 if v in parity else 2
        if abs(sum(x[e] for e in delta_edges(g, {v})) - need) > tol:
            bad.append(("degree", v))
    for size in range(1, n):
        for s in itertools.combinations(range(n), size):
            need = 1 if len(parity & set(s)) % 2 else 2
            if sum(x[e] for e in delta_edges(g, s)) < need - tol:
                bad.append(("cut", s))
    return bad


@pytest.mark.parametrize("seed", range(8))
def test_held_karp_is_feasible_and_below_the_optimum(seed):
    inst = random_metric_instance(seed, n_range=(4, 7))
    hk = solve_held_karp(inst)
    assert held_karp_violations(inst, hk.x) == []
    s, t = inst.parity
    assert hk.value <= brute_hamiltonian_path(inst, s, t).value + 1e-6


# ---------------------------------------------------------------- narrow cuts


def test_no_narrow_cuts_when_every_cut_is_wide():
    inst = unit(4, (0, 1))
    x = [2 / 3] * 6  # every singleton cut is 2, larger ones more
    assert narrow_cuts(x, inst) == []


def test_path_instances_give_chains():
    for seed in range(5):
        inst = random_metric_instance(seed, n_range=(4, 4))
        cuts = narrow_cuts(solve_held_karp(inst).x, inst)
        assert all(a < b for a, b in zip(cuts, cuts[1:]))
        assert laminar_width(cuts) <= 1


def test_four_terminal_width():
    for seed in range(10):
        inst = random_metric_instance(seed, n_range=(5, 7), parity_size=4)
        cuts = narrow_cuts(solve_held_karp(inst).x, inst)
        assert laminar_width(cuts) <= 3
        parity = set(inst.parity)
        assert all(len(c & parity) % 2 == 1 and inst.anchor not in c for c in cuts)


def test_odd_tau():
    assert [odd_tau(e) for e in (1.0, 0.5, 1 / 3, 0.25, 0.2)] == [1, 3, 3, 5, 5]
    with pytest.raises(ValueError):
        odd_tau(0)


# ---------------------------------------------------------------- tau-odd pairs


def test_empty_family_gives_the_mst():
    inst = random_metric_instance(9)
    lengths = inst.edge_lengths()
    mst = minimum_spanning_tree(inst.graph, lengths)
    for method in ("chain", "laminar"):
        pair = run_tau_odd_dp(inst, [], 1, method)
        assert pair.tree_cost == pytest.approx(sum(lengths[e] for e in mst))


@pytest.mark.parametrize("seed", range(4))
def test_pair_dominates_odd_trees(seed):
    inst = random_metric_instance(40 + seed, n_range=(5, 6))
    cuts = narrow_cuts(solve_held_karp(inst).x, inst)
    pair = run_tau_odd_dp(inst, cuts, 1)
    best = brute_min_odd_tree(inst, cuts)
    assert pair.tree_cost <= pair.y_cost + 1e-6 <= best.value + 2e-6
    for c in cuts:
        if classify_cut(pair.y, inst.graph, c, 1, mode="odd") == "small":
            assert cut_load(inst.graph, pair.tree, c) % 2 == 1


def test_tau_must_be_odd():
    with pytest.raises(ValueError):
        run_tau_odd_dp(unit(3), [], 2)


# ---------------------------------------------------------------- joins and shortcuts


def test_parity_join_examples():
    inst = random_metric_instance(2)
    s, t = inst.parity
    join, length = min_parity_join(inst, {s, t})
    assert join == [edge_id(inst, s, t)] and length == inst.length(s, t)
    assert min_parity_join(inst, set()) == ([], 0.0)
    points = [0, 1, 3, 4, 9, 10]
    inst = line(points, (0, 5))
    join, length = min_parity_join(inst, range(6))
    assert sorted(join) == sorted(edge_id(inst, a, a + 1) for a in (0, 2, 4))
    assert length == 3


def test_parity_join_limit():
    inst = unit(22)
    with pytest.raises(TooManyOddVertices):
        min_parity_join(inst, range(22))


def test_shortcut_keeps_trees():
    inst = line([0, 1, 2, 3], (0, 3))
    path = [edge_id(inst, 0, 1), edge_id(inst, 1, 2), edge_id(inst, 2, 3)]
    assert shortcut_to_tree(inst, path) == sorted(path)


def test_shortcut_removes_a_cycle():
    # triangle 0-1-2 plus pendant 2-3; odd vertices are 2 and 3
    inst = metric([[0, 2, 2, 3], [2, 0, 2, 3], [2, 2, 0, 1], [3, 3, 1, 0]], (2, 3))
    multiset = [edge_id(inst, 0, 1), edge_id(inst, 1, 2), edge_id(inst, 0, 2), edge_id(inst, 2, 3)]
    before = sum(inst.edge_lengths()[e] for e in multiset)
    out = shortcut_to_tree(inst, multiset)
    lengths = inst.edge_lengths()
    assert is_spanning_tree(inst.graph, out)
    assert odd_vertices(4, [inst.graph.edges[e] for e in out]) == {2, 3}
    assert sum(lengths[e] for e in out) <= before
    assert sum(lengths[e] for e in out) >= brute_min_join_tree(inst).value


def test_shortcut_of_doubled_edges():
    inst = line([0, 1, 2], (0, 2))
    e01, e12 = edge_id(inst, 0, 1), edge_id(inst, 1, 2)
    # 0-1 once and 1-2 three times: vertices 0 and 2 are odd
    out = shortcut_to_tree(inst, [e01, e12, e12, e12])
    assert sorted(out) == [e01, e12]


def test_shortcut_rejects_bad_input():
    inst = unit(4, (0, 1))
    with pytest.raises(NotConnectedJoin):
        shortcut_to_tree(inst, [edge_id(inst, 0, 1)])


@pytest.mark.parametrize("seed", range(4))
def test_path_output_is_hamiltonian(seed):
    inst = random_metric_instance(60 + seed, n_range=(5, 6))
    order, rep = solve_path_tsp(inst)
    s, t = inst.parity
    assert order[0] == s and order[-1] == t and sorted(order) == list(range(inst.n))
    degrees = sorted(sum(1 for e in rep.edges if v in inst.graph.edges[e]) for v in range(inst.n))
    assert degrees == [1, 1] + [2] * (inst.n - 2)
    assert rep.length <= (1.5 + 0.5) * brute_hamiltonian_path(inst, s, t).value + 1e-6


def test_unit_metric_path():
    order, rep = solve_path_tsp(unit(4, (0, 3)))
    assert rep.length == 3


def test_line_metric_is_solved_exactly():
    inst = line([0, 2, 3, 7, 8, 12], (0, 5))
    order, rep = solve_path_tsp(inst)
    assert order == (0, 1, 2, 3, 4, 5)
    assert rep.length == 12


# ---------------------------------------------------------------- connected joins


def test_four_cycle_with_every_vertex_odd():
    # corners of a square, Euclidean distances scaled by 10 and rounded
    rows = [[0, 10, 14, 10], [10, 0, 10, 14], [14, 10, 0, 10], [10, 14, 10, 0]]
    inst = metric(rows, (0, 1, 2, 3))
    edges, rep = solve_mscj(inst, 0.5)
    assert odd_vertices(4, [inst.graph.edges[e] for e in edges]) == {0, 1, 2, 3}
    assert rep.length <= 2.0 * brute_min_join_tree(inst).value + 1e-6


def test_two_terminal_join_matches_path_pipeline():
    inst = random_metric_instance(71, n_range=(5, 6))
    _, path_rep = solve_path_tsp(inst)
    _, join_rep = solve_mscj(inst, 0.5)
    assert join_rep.y_cost == pytest.approx(path_rep.y_cost)
    assert join_rep.tree_length == pytest.approx(path_rep.tree_length)
    assert path_rep.length <= join_rep.length + 1e-9


def test_shortcut_join_is_a_spanning_tree():
    inst = random_metric_instance(88, n_range=(6, 6), parity_size=4)
    edges, rep = solve_mscj(inst, 0.5, shortcut=True)
    assert is_spanning_tree(inst.graph, edges)
    assert odd_vertices(inst.n, [inst.graph.edges[e] for e in edges]) == set(inst.parity)
    assert rep.length >= brute_min_join_tree(inst).value - 1e-6


def test_epsilon_one_small_cuts_carry_one_edge():
    for seed in range(3):
        inst = random_metric_instance(90 + seed, n_range=(5, 6), parity_size=4)
        _, rep = solve_mscj(inst, 1.0)
        assert rep.tau == 1
        for c in rep.narrow:
            if classify_cut(rep.y, inst.graph, c, 1, mode="odd") == "small":
                assert cut_load(inst.graph, rep.tree, c) == 1


def test_certificate_covers_corrected_parity_cuts():
    inst = random_metric_instance(81, n_range=(5, 7), parity_size=4)
    _, rep = solve_mscj(inst, 1.0)
    assert rep.certificate["min_coverage"] >= 1 - 1e-6
    assert rep.certificate["min_coverage"] != float("inf")
    m = inst.graph.edge_count
    with pytest.raises(NumericalFailure):
        parity_certificate(inst, [0.0] * m, [0.0] * m, rep.tree, rep.narrow, 1.0)
