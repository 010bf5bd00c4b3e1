import itertools
import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lamtree.errors import TooLarge
from lamtree.generators import gen_appendix_b, random_chain_instance, random_connected_graph, random_metric_instance
from lamtree.graph import Graph, complete_graph, cut_load, is_spanning_tree
from lamtree.instances import MetricInstance, as_laminar
from lamtree.oracle import (
    all_spanning_trees,
    brute_hamiltonian_path,
    brute_min_join_tree,
    brute_min_odd_tree,
    brute_opt_constrained,
    brute_path_permutations,
    certify_gap_instance,
    kirchhoff_count,
)


def trees_by_subsets(g):
    """Spanning trees by checking every (n-1)-subset of edges."""
    return {
        tuple(c)
        for c in itertools.combinations(range(g.edge_count), g.vertex_count - 1)
        if is_spanning_tree(g, c)
    }


def test_tree_counts_on_complete_graphs():
    assert kirchhoff_count(complete_graph(3)) == 3
    assert kirchhoff_count(complete_graph(4)) == 16
    assert kirchhoff_count(complete_graph(6)) == 6**4
    assert len(list(all_spanning_trees(complete_graph(4)))) == 16
    assert kirchhoff_count(Graph(3, [(0, 1)])) == 0


@given(st.integers(0, 10**6))
def test_enumeration_matches_subset_search_and_matrix_tree(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 6)
    g = random_connected_graph(rng, n, rng.randint(0, 6))
    listed = list(all_spanning_trees(g))
    assert len(listed) == len(set(listed))
    assert set(listed) == trees_by_subsets(g)
    assert kirchhoff_count(g) == len(listed)


def test_multigraph_count():
    # two parallel edges plus a pendant edge
    g = Graph(3, [(0, 1), (0, 1), (1, 2)])
    assert kirchhoff_count(g) == 2
    assert sorted(all_spanning_trees(g)) == [(0, 2), (1, 2)]


def test_enumeration_limit():
    with pytest.raises(TooLarge):
        list(all_spanning_trees(complete_graph(7), limit=1000))


def test_constrained_optimum_by_hand():
    from lamtree.graph import CutFamily, CutSet
    from lamtree.instances import ChainInstance

    g = complete_graph(3)
    inst = ChainInstance(g, [1, 2, 3], CutFamily([CutSet({0}, 2, 2)], "chain"))
    res = brute_opt_constrained(inst)
    assert res.value == 3 and res.witness == (0, 1) and res.count == 1 and res.size == 3
    inst = ChainInstance(g, [1, 2, 3], CutFamily([CutSet({2}, 2, 2)], "chain"))
    assert brute_opt_constrained(inst).value == 5
    unsat = ChainInstance(g, [1, 2, 3], CutFamily([CutSet({0}, 3, 3)], "chain"))
    assert not brute_opt_constrained(unsat).feasible


def test_chain_and_laminar_views_agree():
    for seed in range(10):
        inst = random_chain_instance(seed)
        a, b = brute_opt_constrained(inst), brute_opt_constrained(as_laminar(inst))
        assert (a.value, a.count) == (b.value, b.count)


def test_constrained_optimum_against_networkx_enumeration():
    inst = random_chain_instance(7)
    g = inst.graph
    h = nx.MultiGraph()
    h.add_nodes_from(range(g.vertex_count))
    for e, (u, v) in enumerate(g.edges):
        h.add_edge(u, v, key=e)
    best = min(
        (
            sum(inst.costs[k] for _, _, k in t.edges(keys=True))
            for t in nx.SpanningTreeIterator(h)
            if all(
                cs.lower <= cut_load(g, [k for _, _, k in t.edges(keys=True)], cs.members) <= cs.upper
                for cs in inst.family
            )
        ),
        default=None,
    )
    assert brute_opt_constrained(inst).value == best


# ---------------------------------------------------------------- metric oracles


def unit_metric(n, parity=(0, 1)):
    return MetricInstance([[0 if i == j else 1 for j in range(n)] for i in range(n)], parity)


def line_metric(n, parity=None):
    return MetricInstance([[abs(i - j) for j in range(n)] for i in range(n)], parity or (0, n - 1))


def test_hamiltonian_path_examples():
    assert brute_hamiltonian_path(unit_metric(3), 0, 1).value == 2
    res = brute_hamiltonian_path(line_metric(4), 0, 3)
    assert res.value == 3 and res.witness == (0, 1, 2, 3)
    assert brute_hamiltonian_path(unit_metric(2), 0, 1).value == 1


def test_path_dp_matches_permutations():
    for seed in range(12):
        inst = random_metric_instance(seed, n_range=(4, 8), kind="random")
        s, t = inst.parity
        a, b = brute_hamiltonian_path(inst, s, t), brute_path_permutations(inst, s, t)
        assert a.value == b.value
        order = a.witness
        assert order[0] == s and order[-1] == t and sorted(order) == list(range(inst.n))
        assert sum(inst.lengths[u][v] for u, v in zip(order, order[1:])) == a.value


def test_path_oracle_guard():
    with pytest.raises(TooLarge):
        brute_hamiltonian_path(unit_metric(17), 0, 1)


def test_join_tree_oracle():
    # on a line with Q = both ends the only tree with that parity is the path itself
    inst = line_metric(5)
    res = brute_min_join_tree(inst)
    assert res.value == 4
    # on a unit K_4 with every vertex odd, exactly the four stars qualify
    inst = unit_metric(4, (0, 1, 2, 3))
    assert brute_min_join_tree(inst).value == 3
    assert brute_min_join_tree(inst).count == 4


def test_odd_tree_oracle_without_cuts_is_the_mst():
    inst = random_metric_instance(3)
    g = inst.graph
    from lamtree.graph import minimum_spanning_tree

    lengths = inst.edge_lengths()
    mst = minimum_spanning_tree(g, lengths)
    assert brute_min_odd_tree(inst, []).value == pytest.approx(sum(lengths[e] for e in mst))
    # one narrow-looking cut {0}: vertex 0 must have odd degree
    res = brute_min_odd_tree(inst, [{0}])
    assert cut_load(g, res.witness, {0}) % 2 == 1


# ---------------------------------------------------------------- gap instances


@pytest.mark.parametrize("k, ratio, value", [(1, Fraction(2, 3), Fraction(3, 2)), (2, Fraction(1), Fraction(2)), (3, Fraction(6, 5), Fraction(5, 2))])
def test_gap_certificates(k, ratio, value):
    cert = certify_gap_instance(k)
    assert cert.ratio == ratio
    assert set(cert.cut_values) == {value}
    assert cert.point_feasible
    assert cert.every_tree_hits_k
    assert cert.max_loads_min == ratio * value


def test_gap_ratio_is_nondecreasing():
    ratios = [certify_gap_instance(k).ratio for k in (1, 2, 3)]
    assert ratios == sorted(ratios)


def test_gap_certificate_guard():
    with pytest.raises(TooLarge):
        certify_gap_instance(4)


@pytest.mark.slow
def test_two_gadget_optimum():
    for tau in (0, 1):
        res = brute_opt_constrained(gen_appendix_b(tau))
        assert res.value == 2
