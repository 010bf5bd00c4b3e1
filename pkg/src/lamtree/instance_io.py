"""JSON instance files and run reports.

One document format covers all four problem kinds. Costs and distances may be
integers, doubles, or exact rationals written as "p/q" strings. Emission is
canonical (sorted keys, fixed layout), so emit(parse(x)) == x for canonical x.
"""

import json
import math
from fractions import Fraction

from .errors import LaminarityError, MetricError, NotLaminar, SchemaError
from .graph import CutFamily, CutSet, Graph
from .instances import ChainInstance, LaminarInstance, MetricInstance

FORMAT_TAG = "lamtree-instance"
VERSION = 1
TREE_KINDS = ("mccst", "mlcst")
METRIC_KINDS = ("pathtsp", "mscj")
KINDS = TREE_KINDS + METRIC_KINDS


# ---------------------------------------------------------------- numbers


def parse_number(raw, where):
    if isinstance(raw, bool):
        raise SchemaError("expected a number, got a boolean", where)
    if isinstance(raw, (int, float)):
        if isinstance(raw, float) and not math.isfinite(raw):
            raise SchemaError("numbers must be finite", where)
        return raw
    if isinstance(raw, str):
        try:
            return Fraction(raw)
        except (ValueError, ZeroDivisionError):
            raise SchemaError(f"cannot read {raw!r} as a rational", where) from None
    raise SchemaError(f"expected a number, got {type(raw).__name__}", where)


def number_to_json(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, bool):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if hasattr(x, "item"):  # numpy scalar
        return number_to_json(x.item())
    return x


def _plain(obj):
    """Metadata to JSON-ready values: rationals as strings, tuples as lists."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_plain(v) for v in obj)
    return number_to_json(obj)


# ---------------------------------------------------------------- parsing


def _require(doc, key, kind, where=""):
    if key not in doc:
        raise SchemaError(f"missing field {key!r}", where or "$")
    value = doc[key]
    if not isinstance(value, kind):
        raise SchemaError(f"field {key!r} has the wrong type", f"$.{key}")
    return value


def _vertex(raw, n, where):
    if isinstance(raw, bool) or not isinstance(raw, int) or not 0 <= raw < n:
        raise SchemaError(f"{raw!r} is not a vertex in 0..{n - 1}", where)
    return raw


def _parse_family(doc, n):
    out = []
    for i, item in enumerate(_require(doc, "family", list)):
        where = f"$.family[{i}]"
        if not isinstance(item, dict):
            raise SchemaError("family entries must be objects", where)
        members = item.get("members")
        if not isinstance(members, list) or not members:
            raise SchemaError("members must be a nonempty list", where + ".members")
        verts = [_vertex(v, n, f"{where}.members[{j}]") for j, v in enumerate(members)]
        if len(set(verts)) != len(verts):
            raise SchemaError("members repeat a vertex", where + ".members")
        bounds = []
        for key in ("lower", "upper"):
            b = item.get(key)
            if isinstance(b, bool) or not isinstance(b, int) or b < 0:
                raise SchemaError(f"{key} must be a nonnegative integer", f"{where}.{key}")
            bounds.append(b)
        if bounds[0] > bounds[1]:
            raise SchemaError("lower bound exceeds upper bound", where)
        if len(verts) == n:
            raise SchemaError("a family set must be a proper subset of the vertices", where)
        out.append(CutSet(frozenset(verts), *bounds))
    return out


def _parse_tree_kind(doc, kind):
    n = _require(doc, "vertices", int)
    if n < 1:
        raise SchemaError("need at least one vertex", "$.vertices")
    edges, costs = [], []
    for i, item in enumerate(_require(doc, "edges", list)):
        where = f"$.edges[{i}]"
        if not isinstance(item, list) or len(item) != 3:
            raise SchemaError("edges are [u, v, cost] triples", where)
        u, v = _vertex(item[0], n, where + "[0]"), _vertex(item[1], n, where + "[1]")
        if u == v:
            raise SchemaError("self-loops are not allowed", where)
        edges.append((u, v))
        costs.append(parse_number(item[2], where + "[2]"))
    sets = _parse_family(doc, n)
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise SchemaError("metadata must be an object", "$.metadata")
    graph = Graph(n, edges)
    try:
        if kind == "mccst":
            family = CutFamily(sets, "chain")
            for i in range(len(sets) - 1):
                a, b = sets[i].members, sets[i + 1].members
                if a & b and not (a < b or b < a):
                    raise LaminarityError(f"sets {i} and {i + 1} cross", f"$.family[{i + 1}]")
                if not a < b:
                    raise SchemaError("chain sets must be listed strictly increasing", f"$.family[{i + 1}]")
            return ChainInstance(graph, costs, family, dict(metadata))
        return LaminarInstance(graph, costs, CutFamily(sets, "laminar"), dict(metadata))
    except LaminarityError:
        raise
    except NotLaminar as exc:
        raise LaminarityError(str(exc), "$.family") from None


def _parse_metric_kind(doc, kind):
    rows = _require(doc, "distances", list)
    n = len(rows)
    if n < 2:
        raise SchemaError("need at least two vertices", "$.distances")
    matrix = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError("distance matrix must be square", f"$.distances[{i}]")
        matrix.append([parse_number(x, f"$.distances[{i}][{j}]") for j, x in enumerate(row)])
    parity = [_vertex(v, n, f"$.parity[{i}]") for i, v in enumerate(_require(doc, "parity", list))]
    if len(set(parity)) != len(parity) or len(parity) % 2 or not parity:
        raise SchemaError("parity must list an even, nonzero number of distinct vertices", "$.parity")
    if kind == "pathtsp" and len(parity) != 2:
        raise SchemaError("path instances have exactly two terminals", "$.parity")
    anchor = doc.get("anchor", max(parity))
    anchor = _vertex(anchor, n, "$.anchor")
    if anchor not in parity:
        raise SchemaError("anchor must be a parity vertex", "$.anchor")
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise SchemaError("metadata must be an object", "$.metadata")
    inst = MetricInstance(matrix, parity, anchor, dict(metadata))
    bad = inst.metric_violation()
    if bad is not None:
        u, v, w = bad
        if u == w:
            raise MetricError(f"distances are not a symmetric nonnegative matrix with zero diagonal at ({u}, {v})", bad, "$.distances")
        raise MetricError(f"triangle inequality fails: d({u},{w}) > d({u},{v}) + d({v},{w})", bad, "$.distances")
    return inst


def parse_document(doc):
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object", "$")
    if doc.get("format") != FORMAT_TAG:
        raise SchemaError(f"format tag must be {FORMAT_TAG!r}", "$.format")
    if doc.get("version") != VERSION:
        raise SchemaError(f"unsupported version {doc.get('version')!r}", "$.version")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise SchemaError(f"kind must be one of {', '.join(KINDS)}", "$.kind")
    if kind in TREE_KINDS:
        return kind, _parse_tree_kind(doc, kind)
    return kind, _parse_metric_kind(doc, kind)


def parse_instance(data):
    """bytes or str -> (kind, instance)."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError(f"not UTF-8: {exc}", "$") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return parse_document(doc)


# ---------------------------------------------------------------- emission


def instance_document(inst, kind=None):
    if isinstance(inst, MetricInstance):
        kind = kind or ("pathtsp" if len(inst.parity) == 2 else "mscj")
        doc = {
            "anchor": inst.anchor,
            "distances": [[number_to_json(x) for x in row] for row in inst.lengths],
            "parity": list(inst.parity),
        }
    else:
        kind = kind or ("mccst" if isinstance(inst, ChainInstance) else "mlcst")
        doc = {
            "vertices": inst.graph.vertex_count,
            "edges": [[u, v, number_to_json(c)] for (u, v), c in zip(inst.graph.edges, inst.costs)],
            "family": [
                {"lower": cs.lower, "members": sorted(cs.members), "upper": cs.upper} for cs in inst.family
            ],
        }
    doc.update({"format": FORMAT_TAG, "version": VERSION, "kind": kind})
    if inst.metadata:
        doc["metadata"] = _plain(inst.metadata)
    return doc


def _compact(value):
    return json.dumps(value, sort_keys=True, separators=(", ", ": "))


def dumps_canonical(doc) -> str:
    """Sorted keys; lists of lists or objects get one element per line."""
    lines = ["{"]
    keys = sorted(doc)
    for i, key in enumerate(keys):
        value = doc[key]
        tail = "," if i < len(keys) - 1 else ""
        if isinstance(value, list) and value and all(isinstance(v, (list, dict)) for v in value):
            lines.append(f"  {json.dumps(key)}: [")
            for j, item in enumerate(value):
                lines.append(f"    {_compact(item)}{',' if j < len(value) - 1 else ''}")
            lines.append(f"  ]{tail}")
        else:
            lines.append(f"  {json.dumps(key)}: {_compact(value)}{tail}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_instance(inst, kind=None) -> bytes:
    return dumps_canonical(instance_document(inst, kind)).encode("utf-8")


def emit_report(report: dict) -> str:
    return json.dumps(_plain(report), sort_keys=True, indent=2) + "\n"
