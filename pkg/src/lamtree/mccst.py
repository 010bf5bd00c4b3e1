"""End-to-end solver for spanning trees under chain cut constraints."""

import logging
import math
from dataclasses import dataclass, field

from .chain_dp import run_chain_dp
from .errors import RoundingExhausted
from .graph import cut_load, is_spanning_tree
from .rounding import RandomSource, best_single_swap, decompose, swap_round

log = logging.getLogger(__name__)

COST_TOL = 1e-7


def default_tau(n: int, epsilon: float) -> int:
    """⌊96 ln(2n)/ε²⌋, capped at n - 1 where the cap makes every cut small."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return max(0, min(math.floor(96 * math.log(2 * n) / epsilon**2), n - 1))


def default_repetitions(n: int) -> int:
    return max(1, math.ceil(2 * n * math.log(n))) if n > 1 else 1


def validate_tree(tree, inst, epsilon):
    """(ok, violations) against the relaxed window a/(1+ε) .. (1+ε)b per cut."""
    g = inst.graph
    problems = []
    if not is_spanning_tree(g, tree):
        problems.append(("not a spanning tree", None, None))
    for i, cs in enumerate(inst.family):
        load = cut_load(g, tree, cs.members)
        if load < cs.lower / (1 + epsilon) - 1e-9 or load > (1 + epsilon) * cs.upper + 1e-9:
            problems.append((i, load, (cs.lower, cs.upper)))
    return not problems, problems


@dataclass
class MccstReport:
    tree: tuple
    cost: float
    loads: list
    y: list
    y_cost: float
    tau: int
    epsilon: float
    repetitions: int
    rounds_used: int
    restarts: int
    seed: int
    stats: dict = field(default_factory=dict)


def sample_and_filter(inst, y, y_cost, epsilon, repetitions, rng, comb=None):
    """Round y repetitions times, alter each sample, keep the cheapest survivor."""
    g = inst.graph
    costs = inst.float_costs()
    comb = comb or decompose(g, y)
    best = None
    for _ in range(repetitions):
        tree = best_single_swap(g, swap_round(g, comb, rng), y, costs)
        cost = sum(costs[e] for e in tree)
        if cost > y_cost + COST_TOL:
            continue
        ok, _ = validate_tree(tree, inst, epsilon)
        if ok and (best is None or cost < best[1] - 1e-12):
            best = (tree, cost)
    return best


def solve_mccst(inst, epsilon=0.5, seed=0, tau=None, repetitions=None, max_restarts=50) -> MccstReport:
    n = inst.graph.vertex_count
    tau = default_tau(n, epsilon) if tau is None else tau
    repetitions = default_repetitions(n) if repetitions is None else repetitions
    dp = run_chain_dp(inst, tau)
    comb = decompose(inst.graph, dp.y)
    rng = RandomSource(seed)
    for attempt in range(max_restarts + 1):
        found = sample_and_filter(inst, dp.y, dp.cost, epsilon, repetitions, rng, comb)
        if found:
            tree, cost = found
            return MccstReport(
                tree,
                cost,
                [cut_load(inst.graph, tree, cs.members) for cs in inst.family],
                dp.y,
                dp.cost,
                dp.tau,
                epsilon,
                repetitions,
                (attempt + 1) * repetitions,
                attempt,
                seed,
                {"lp_count": dp.lp_count, "pruned": dp.pruned, "terms": len(comb.terms)},
            )
        log.info("no sample survived in round %d; restarting", attempt)
    raise RoundingExhausted(f"no tree passed the filter after {max_restarts} restarts")
