import math

import pytest

from lamtree.chain_dp import (
    Cell,
    classify_cut,
    enumerate_triples,
    is_tau_integral,
    run_chain_dp,
    solve_extension_lp,
)
from lamtree.errors import NoFeasibleRelaxation
from lamtree.generators import gen_appendix_b, random_chain_instance
from lamtree.graph import (
    ConnectivityTriple,
    CutFamily,
    CutSet,
    Graph,
    build_contracted_graph,
    delta_edges,
    minimum_spanning_tree,
    set_partitions,
)
from lamtree.instances import ChainInstance
from lamtree.oracle import brute_opt_constrained
from lamtree.polytope import separate_st


def chain(g, costs, sets):
    return ChainInstance(g, costs, CutFamily([CutSet(*s) for s in sets], "chain"))


PATH3 = Graph(3, [(0, 1), (1, 2)])


def test_triples_on_a_three_vertex_path():
    inst = chain(PATH3, [1, 1], [({0}, 0, 2)])
    per_cut = enumerate_triples(inst, 1)
    assert [len(t) for t in per_cut] == [1, 2, 1]
    assert per_cut[1] == [
        ConnectivityTriple({0}),
        ConnectivityTriple({0}, (0,), ((1,),)),
    ]


def test_upper_bound_zero_keeps_only_empty_crossing():
    inst = chain(PATH3, [1, 1], [({0}, 0, 0)])
    assert enumerate_triples(inst, 1)[1] == [ConnectivityTriple({0})]


def test_lower_bound_above_tau_leaves_no_small_triple():
    inst = chain(PATH3, [1, 1], [({0}, 2, 2)])
    assert enumerate_triples(inst, 1)[1] == []


def test_triple_count_bound():
    inst = random_chain_instance(11, n_range=(7, 7))
    for tau in (1, 2, 3):
        per_cut = enumerate_triples(inst, tau)
        for cs, triples in zip(inst.family, per_cut[1:-1]):
            d = len(delta_edges(inst.graph, cs.members))
            bound = sum(math.comb(d, f) * sum(1 for _ in set_partitions(range(f))) for f in range(min(tau, cs.upper) + 1))
            assert len(triples) <= bound


SQUARE = Graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])


def test_extension_forces_both_crossing_edges():
    inst = chain(SQUARE, [1, 5, 1, 5], [({0, 1}, 0, 2)])
    start = Cell(ConnectivityTriple(frozenset()), 0, [0.0] * 4, 0.0)
    ext = solve_extension_lp(start, ConnectivityTriple(range(4)), inst, 1)
    assert ext.feasible
    assert ext.y[1] == pytest.approx(1.0) and ext.y[3] == pytest.approx(1.0)
    assert ext.cost == pytest.approx(11.0)


def test_extension_rejects_dropped_crossing_edge():
    # the next triple uses edge 1 across S_1 while the previous one left it out
    inst = chain(SQUARE, [1] * 4, [({0}, 0, 2), ({0, 1}, 0, 2)])
    prev = Cell(ConnectivityTriple({0}, (0,), ((1,),)), 1, [0.0] * 4, 0.0)
    nxt = ConnectivityTriple({0, 1}, (1, 3), ((2,), (3,)))
    assert not solve_extension_lp(prev, nxt, inst, 2).feasible


def test_extension_without_windows_costs_a_contracted_mst():
    g = Graph(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4), (1, 3)])
    costs = [3, 1, 2, 4, 1, 2, 5]
    inst = chain(g, costs, [({0, 1}, 0, 3), ({0, 1, 2, 3}, 0, 4)])
    prev_t = ConnectivityTriple({0, 1}, (1, 2), ((2,),))  # both 1-2 and 0-2, 2 alone outside
    prev_y = [0.0] * 7  # E[S_1] = {01}, which closes a cycle with the two crossing edges
    prev = Cell(prev_t, 1, prev_y, 0.0)
    nxt = ConnectivityTriple(range(5))
    ext = solve_extension_lp(prev, nxt, inst, 1)
    # pinned: 12, 02 at one, 01 and 13 at zero; the rest spans {2,3,4}
    rest = Graph(5, g.edges)
    mst = minimum_spanning_tree(rest, costs, forced=[1, 2], allowed=[3, 4, 5])
    assert ext.feasible
    assert ext.cost == pytest.approx(sum(costs[e] for e in mst))


def test_dp_on_path_with_unit_prefix_bounds():
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 2), (1, 3), (0, 3)])
    costs = [5, 5, 5, 1, 1, 1]
    inst = chain(g, costs, [({0}, 1, 1), ({0, 1}, 1, 1), ({0, 1, 2}, 1, 1)])
    oracle = brute_opt_constrained(inst)
    assert oracle.witness == (0, 1, 2) and oracle.count == 1
    res = run_chain_dp(inst, 1)
    assert res.y == pytest.approx([1, 1, 1, 0, 0, 0])
    assert res.cost == pytest.approx(15.0)


def test_empty_chain_gives_the_mst():
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 2), (1, 3)])
    costs = [4, 2, 3, 1, 5]
    inst = ChainInstance(g, costs, CutFamily([], "chain"))
    res = run_chain_dp(inst, 2)
    assert res.cost == pytest.approx(sum(costs[e] for e in minimum_spanning_tree(g, costs)))


def test_two_gadget_sub_chain_has_point_of_cost_at_most_two():
    full = gen_appendix_b(0)
    side = full.family.sets[0]
    inner = next(cs for cs in full.family.sets if len(cs.members) == 1 and cs.members < side.members)
    inst = ChainInstance(full.graph, full.costs, CutFamily([inner, side], "chain"))
    res = run_chain_dp(inst, 1)
    assert res.cost <= 2 + 1e-9


def test_infeasible_bounds_raise():
    inst = chain(PATH3, [1, 1], [({0}, 2, 2)])
    with pytest.raises(NoFeasibleRelaxation):
        run_chain_dp(inst, 2)


def test_classification_examples():
    g = SQUARE
    assert is_tau_integral([1, 1, 1, 0], [{0}, {0, 1}], 1, g)[0]
    assert is_tau_integral([1, 1, 1, 0], [{0}, {0, 1}], 0, g)[0]  # integral loads above 0 are large
    y = [0.75, 0.75, 0.75, 0.75]  # load 1.5 on {0}: fractional, not above tau+1 for tau=1
    ok, classes = is_tau_integral(y, [{0}], 1, g)
    assert not ok and classes == [None]
    assert classify_cut(y, g, {0}, 0) == "large"
    assert classify_cut([1, 0, 0, 1], g, {0}, 2, mode="odd") is None  # load 2 is even
    assert classify_cut([1, 0, 1, 0], g, {0}, 1, mode="odd") == "small"


@pytest.mark.parametrize("seed", range(12))
def test_pruning_does_not_change_the_optimum(seed):
    inst = random_chain_instance(seed, n_range=(4, 6))
    a = run_chain_dp(inst, 1, prune=True)
    b = run_chain_dp(inst, 1, prune=False)
    assert a.cost == pytest.approx(b.cost, abs=1e-7)
    assert a.lp_count <= b.lp_count


@pytest.mark.parametrize("seed", range(30))
def test_dp_points_are_tau_integral_and_in_the_polytope(seed):
    inst = random_chain_instance(1000 + seed)
    tau = 1 + seed % 3
    res = run_chain_dp(inst, tau)
    ok, _ = is_tau_integral(res.y, inst.family, res.tau, inst.graph)
    assert ok
    assert separate_st(inst.graph, res.y) is None
    for cs in inst.family:
        load = sum(res.y[e] for e in delta_edges(inst.graph, cs.members))
        assert cs.lower - 1e-6 <= load <= cs.upper + 1e-6


def test_stored_cells_are_left_compatible():
    inst = random_chain_instance(5, n_range=(6, 6))
    res = run_chain_dp(inst, 2, prune=False)
    for triple, cell in res.table.items():
        if not cell.finite or not triple.cut or len(triple.cut) == inst.graph.vertex_count:
            continue
        con = build_contracted_graph(inst.graph, triple)
        assert separate_st(con.graph, [cell.y[e] for e in con.edge_ids]) is None
        assert sum(cell.y[e] for e in con.discarded) == pytest.approx(0.0)
