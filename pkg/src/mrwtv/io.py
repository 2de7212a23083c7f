"""File formats: edge lists, grid configs, point clouds, serialized spaces, node functions and node sets."""

from __future__ import annotations

import csv
import io as _io
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .numeric import coerce, from_json_number, to_fraction, to_json_number
from .space import (
    EdgeWeightGraph,
    RandomWalkSpace,
    SpaceError,
    from_epsilon_step,
    from_kernel_grid,
    from_weighted_graph,
)

SCHEMA = 1


def _number(text: str, exact: bool):
    text = text.strip()
    if exact:
        try:
            return Fraction(text)
        except ValueError:
            raise SpaceError(f"not a rational number: {text!r}") from None
    return float(text)


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if line:
                yield lineno, line


def read_edge_list(path, exact: bool = True) -> EdgeWeightGraph:
    """``x<TAB>y<TAB>w`` per line; ``x == y`` is a self-loop.  Vertices keep first-seen order."""
    vertices: dict[str, None] = {}
    edges = []
    for lineno, line in _data_lines(path):
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) != 3:
            raise SpaceError(f"{path}:{lineno}: expected 'x<TAB>y<TAB>w'")
        x, y, w = parts[0].strip(), parts[1].strip(), _number(parts[2], exact)
        vertices.setdefault(x)
        vertices.setdefault(y)
        edges.append((x, y, w))
    if not vertices:
        raise SpaceError(f"{path}: no edges")
    return EdgeWeightGraph(list(vertices), edges)


def write_edge_list(g: EdgeWeightGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for x, y, w in g.edges:
            fh.write(f"{x}\t{y}\t{w}\n")


def load_edge_space(path, exact: bool = True) -> RandomWalkSpace:
    return from_weighted_graph(read_edge_list(path, exact), exact)


def load_grid_config(path) -> RandomWalkSpace:
    """JSON ``{domain, cells_per_axis, kernel: {type, radius, samples?}}``."""
    cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        kern = cfg.get("kernel", {})
        return from_kernel_grid(
            cfg["domain"],
            cfg["cells_per_axis"],
            kern.get("type", "uniform"),
            float(kern.get("radius", 1.0)),
            kern.get("samples"),
        )
    except KeyError as exc:
        raise SpaceError(f"{path}: grid config is missing {exc.args[0]!r}") from None


def load_point_cloud(path, eps) -> RandomWalkSpace:
    """``id<TAB>coord...<TAB>mass`` per line, Euclidean distance, closed ``eps``-balls."""
    ids, points, masses = [], [], []
    for lineno, line in _data_lines(path):
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) < 3:
            raise SpaceError(f"{path}:{lineno}: expected 'id<TAB>coord...<TAB>mass'")
        ids.append(parts[0].strip())
        points.append(tuple(float(t) for t in parts[1:-1]))
        masses.append(_number(parts[-1], True))
    return from_epsilon_step(points, math.dist, masses, float(eps), labels=ids)


# ---------------------------------------------------------------------------
# serialized spaces


def space_to_json(space: RandomWalkSpace) -> dict:
    ex = space.exact
    return {
        "schema": SCHEMA,
        "exact": ex,
        "states": list(space.states),
        "measure": [to_json_number(v, ex) for v in space.measure],
        "jump": [[[space.states[y], to_json_number(p, ex)] for y, p in sorted(row.items())] for row in space.jump],
        "provenance": _plain(space.provenance),
    }


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return to_json_number(obj, True)
    return obj


def space_from_json(obj: dict) -> RandomWalkSpace:
    if obj.get("schema") != SCHEMA:
        raise SpaceError(f"unsupported space schema {obj.get('schema')!r}")
    exact = bool(obj.get("exact", False))
    states = tuple(str(s) for s in obj["states"])
    index = {s: i for i, s in enumerate(states)}
    measure = tuple(coerce(from_json_number(v), exact) for v in obj["measure"])
    jump = []
    for row in obj["jump"]:
        d = {}
        for label, p in row:
            if str(label) not in index:
                raise SpaceError(f"jump row references unknown state {label!r}")
            d[index[str(label)]] = coerce(from_json_number(p), exact)
        jump.append(d)
    if len(jump) != len(states) or len(measure) != len(states):
        raise SpaceError("states, measure and jump rows have different lengths")
    return RandomWalkSpace(states, tuple(jump), measure, exact, provenance=obj.get("provenance", {}))


def save_space(space: RandomWalkSpace, path) -> None:
    Path(path).write_text(dumps(space_to_json(space)) + "\n", encoding="utf-8")


def load_space(path) -> RandomWalkSpace:
    return space_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# node functions and node sets


def read_function(path, space: RandomWalkSpace) -> list:
    """CSV ``state,value`` (header optional); every state must appear exactly once."""
    values: dict[int, object] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            if len(row) != 2:
                raise SpaceError(f"{path}: expected 'state,value' rows")
            label, text = row[0].strip(), row[1].strip()
            if label == "state" and text == "value":
                continue
            x = space.index(label)
            if x in values:
                raise SpaceError(f"{path}: state {label} listed twice")
            values[x] = to_fraction(text) if space.exact else float(text)
    missing = [space.states[x] for x in range(space.n) if x not in values]
    if missing:
        raise SpaceError(f"{path}: no value for states {missing[:5]}")
    return [values[x] for x in range(space.n)]


def format_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def function_csv(space: RandomWalkSpace, u: Sequence) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["state", "value"])
    for s, v in zip(space.states, u):
        w.writerow([s, format_value(v)])
    return buf.getvalue()


def write_function(space: RandomWalkSpace, u: Sequence, path) -> None:
    Path(path).write_text(function_csv(space, u), encoding="utf-8")


def read_set(path, space: RandomWalkSpace) -> frozenset:
    """One state id per line; blank lines and ``#`` comments ignored."""
    return frozenset(space.index(line) for _, line in _data_lines(path))


def write_set(space: RandomWalkSpace, A: Iterable[int], path) -> None:
    Path(path).write_text("".join(f"{s}\n" for s in space.labels(A)), encoding="utf-8")


# ---------------------------------------------------------------------------
# deterministic JSON


def dumps(obj, indent: int = 2) -> str:
    """JSON with sorted keys and floats written with 17 significant digits."""
    return _dump(obj, indent, 0)


def _dump(obj, indent, level) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isnan(obj):
            return '"nan"'
        if math.isinf(obj):
            return '"inf"' if obj > 0 else '"-inf"'
        text = format(obj, ".17g")
        return text if any(c in text for c in ".en") else text + ".0"
    if isinstance(obj, Fraction):
        return _dump(to_json_number(obj, True), indent, level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_dump(v, indent, level + 1)}"
                 for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, frozenset, set)):
        seq = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        if not seq:
            return "[]"
        return "[\n" + ",\n".join(pad + _dump(v, indent, level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")
