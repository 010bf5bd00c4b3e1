"""Command-line entry point: solvers, generators and oracles over JSON files."""

import argparse
import sys
import time

from .errors import NoFeasibleRelaxation, NoFeasibleSolution, SchemaError, SolverError
from .generators import gen_appendix_b, gen_hk
from .graph import cut_load
from .instance_io import emit_instance, emit_report, parse_instance
from .instances import MetricInstance

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_FAILURE = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _load(path, expected):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    kind, inst = parse_instance(data)
    if expected and kind not in expected:
        raise UsageError(f"{path} holds a {kind} instance; this command needs {' or '.join(expected)}")
    return kind, inst


def _edges(g, ids):
    return [list(g.edges[e]) for e in ids]


def _cut_rows(inst, tree):
    g = inst.graph
    return [
        {"members": sorted(cs.members), "lower": cs.lower, "upper": cs.upper, "load": cut_load(g, tree, cs.members)}
        for cs in inst.family
    ]


def _tree_oracle(inst):
    from .oracle import brute_opt_constrained

    res = brute_opt_constrained(inst)
    return {"value": res.value if res.feasible else None, "feasible_trees": res.count, "spanning_trees": res.size}


def _metric_oracle(inst, kind):
    from .oracle import brute_hamiltonian_path, brute_min_join_tree

    if kind == "pathtsp":
        s, t = inst.parity
        res = brute_hamiltonian_path(inst, s, t)
        return {"value": res.value, "path": list(res.witness) if res.witness else None}
    res = brute_min_join_tree(inst)
    return {"value": res.value if res.feasible else None, "join_trees": res.count, "spanning_trees": res.size}


def _with_ratio(report, oracle):
    report["oracle"] = oracle
    if oracle.get("value"):
        report["oracle"]["ratio"] = report["objective"] / oracle["value"]


def cmd_solve_mccst(args):
    from .mccst import solve_mccst

    _, inst = _load(args.instance, ("mccst",))
    res = solve_mccst(inst, args.epsilon, args.seed, args.tau, max_restarts=args.max_restarts)
    report = {
        "command": "solve-mccst",
        "epsilon": args.epsilon,
        "tau": res.tau,
        "seed": args.seed,
        "edges": _edges(inst.graph, res.tree),
        "objective": res.cost,
        "cuts": _cut_rows(inst, res.tree),
        "lp_value": res.y_cost,
        "restarts": res.restarts,
        "rounds_used": res.rounds_used,
        "stats": res.stats,
    }
    if args.oracle:
        _with_ratio(report, _tree_oracle(inst))
    return report


def cmd_solve_mlcst(args):
    from .laminar_dp import solve_mlcst

    _, inst = _load(args.instance, ("mlcst", "mccst"))
    res = solve_mlcst(inst, args.epsilon, args.seed, args.tau)
    report = {
        "command": "solve-mlcst",
        "epsilon": args.epsilon,
        "tau": res.tau,
        "seed": args.seed,
        "edges": _edges(inst.graph, res.tree),
        "objective": res.cost,
        "cuts": _cut_rows(inst, res.tree),
        "stats": res.stats,
    }
    if args.oracle:
        _with_ratio(report, _tree_oracle(inst))
    return report


def _metric_report(command, args, inst, rep):
    return {
        "command": command,
        "epsilon": args.epsilon,
        "tau": rep.tau,
        "seed": args.seed,
        "edges": _edges(inst.graph, rep.edges),
        "objective": rep.length,
        "tree": _edges(inst.graph, rep.tree),
        "tree_length": rep.tree_length,
        "join": _edges(inst.graph, rep.join),
        "join_length": rep.join_length,
        "held_karp": rep.lp_value,
        "point_length": rep.y_cost,
        "narrow_cuts": [sorted(c) for c in rep.narrow],
        "certificate": rep.certificate,
        "stats": rep.stats,
    }


def cmd_solve_pathtsp(args):
    from .tsp import solve_path_tsp

    kind, inst = _load(args.instance, ("pathtsp",))
    order, rep = solve_path_tsp(inst, args.epsilon, args.tau)
    report = _metric_report("solve-pathtsp", args, inst, rep)
    report["path"] = list(order)
    if args.oracle:
        _with_ratio(report, _metric_oracle(inst, kind))
    return report


def cmd_solve_mscj(args):
    from .tsp import solve_mscj

    _, inst = _load(args.instance, ("mscj", "pathtsp"))
    _, rep = solve_mscj(inst, args.epsilon, args.tau, shortcut=args.shortcut)
    report = _metric_report("solve-mscj", args, inst, rep)
    report["shortcut"] = args.shortcut
    if args.oracle:
        _with_ratio(report, _metric_oracle(inst, "mscj"))
    return report


def cmd_gen_hk(args):
    if args.k < 1:
        raise UsageError("--k must be at least 1")
    return emit_instance(gen_hk(args.k))


def cmd_gen_appendix_b(args):
    if args.tau < 0:
        raise UsageError("--tau must be nonnegative")
    return emit_instance(gen_appendix_b(args.tau))


def cmd_certify_gap(args):
    from .oracle import certify_gap_instance

    cert = certify_gap_instance(args.k)
    return {
        "command": "certify-gap",
        "k": cert.k,
        "cut_values": cert.cut_values,
        "min_max_load": cert.max_loads_min,
        "ratio": cert.ratio,
        "ratio_float": float(cert.ratio),
        "spanning_trees": cert.tree_count,
        "every_tree_reaches_k": cert.every_tree_hits_k,
        "point_in_polytope": cert.point_feasible,
        "closed_form_matches": cert.closed_form_matches,
    }


def cmd_oracle(args):
    kind, inst = _load(args.instance, None)
    report = {"command": "oracle", "kind": kind}
    if isinstance(inst, MetricInstance):
        report.update(_metric_oracle(inst, kind))
    else:
        from .oracle import brute_opt_constrained

        res = brute_opt_constrained(inst)
        report.update(
            {
                "value": res.value if res.feasible else None,
                "edges": _edges(inst.graph, res.witness) if res.witness else None,
                "feasible_trees": res.count,
                "spanning_trees": res.size,
            }
        )
    return report


def build_parser():
    parser = argparse.ArgumentParser(prog="lamtree", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def solver(name, func, help_text, restarts=False, shortcut=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("instance", help="instance JSON file")
        p.add_argument("--epsilon", type=float, default=0.5)
        p.add_argument("--tau", type=int, default=None, help="override the DP threshold")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--oracle", action="store_true", help="attach a brute-force comparison")
        p.add_argument("--format", choices=["json"], default="json")
        p.add_argument("--timing", action="store_true", help="add wall time (makes reports non-reproducible)")
        if restarts:
            p.add_argument("--max-restarts", type=int, default=50)
        if shortcut:
            p.add_argument("--shortcut", action="store_true", help="shortcut the join to a spanning tree")
        p.set_defaults(func=func)

    solver("solve-mccst", cmd_solve_mccst, "chain-constrained spanning tree", restarts=True)
    solver("solve-mlcst", cmd_solve_mlcst, "laminar-constrained spanning tree")
    solver("solve-pathtsp", cmd_solve_pathtsp, "metric s-t path TSP")
    solver("solve-mscj", cmd_solve_mscj, "shortest connected parity join", shortcut=True)

    p = sub.add_parser("gen-hk", help="emit the chain gap instance H_k")
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_gen_hk)
    p = sub.add_parser("gen-appendix-b", help="emit the two-gadget laminar instance")
    p.add_argument("--tau", type=int, default=0)
    p.set_defaults(func=cmd_gen_appendix_b)
    p = sub.add_parser("certify-gap", help="certify the integrality gap of H_k (k <= 3)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_certify_gap)
    p = sub.add_parser("oracle", help="brute-force optimum of an instance file")
    p.add_argument("instance")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_oracle)
    return parser


def _error(code, kind, message, out):
    out.write(emit_report({"error": kind, "message": message, "exit_code": code}))
    return code


def run_cli(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    start = time.perf_counter()
    try:
        result = args.func(args)
    except UsageError as exc:
        return _error(EXIT_USAGE, "usage", str(exc), stderr)
    except SchemaError as exc:
        return _error(EXIT_USAGE, type(exc).__name__, str(exc), stderr)
    except (NoFeasibleRelaxation, NoFeasibleSolution) as exc:
        return _error(EXIT_INFEASIBLE, type(exc).__name__, str(exc), stderr)
    except SolverError as exc:
        return _error(EXIT_FAILURE, type(exc).__name__, str(exc), stderr)
    if isinstance(result, bytes):
        stdout.write(result.decode("utf-8"))
        return EXIT_OK
    if getattr(args, "timing", False):
        result["wall_time"] = time.perf_counter() - start
    stdout.write(emit_report(result))
    return EXIT_OK


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
