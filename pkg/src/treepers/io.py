"""Plain-text file formats: graph/field/diagram/measure CSV and tree JSON.

Reals are written as shortest round-trip decimals (``repr``), so reading a
file back reproduces the values bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from ._errors import InvalidInputError
from .barcode import Bar, Diagram
from .domain import MetricGraph, ScalarField, path_graph
from .transport import DIAGONAL, PersistenceMeasure
from .tree import MarkedInterval, MergeTree


def fmt(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _rows(text: str) -> list[list[str]]:
    return [row for row in csv.reader(io.StringIO(text)) if row and any(c.strip() for c in row)]


def _float(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise InvalidInputError(f"not a number: {s!r}") from None


def _int(s: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise InvalidInputError(f"not an integer: {s!r}") from None


# ----------------------------------------------------------------------------
# graphs and fields


def graph_to_csv(g: MetricGraph) -> str:
    lines = ["u,v,length"]
    lines += [f"{u},{v},{fmt(length)}" for u, v, length in g.edges]
    return "\n".join(lines) + "\n"


def graph_from_csv(text: str) -> MetricGraph:
    rows = _rows(text)
    if not rows or [c.strip() for c in rows[0]] != ["u", "v", "length"]:
        raise InvalidInputError("graph CSV needs the header u,v,length")
    edges = [(_int(u), _int(v), _float(length)) for u, v, length in rows[1:]]
    n = 1 + max((max(u, v) for u, v, _ in edges), default=0)
    return MetricGraph(n, tuple(edges))


def field_to_csv(f: ScalarField) -> str:
    lines = ["vertex,value"]
    lines += [f"{i},{fmt(v)}" for i, v in enumerate(f.values)]
    return "\n".join(lines) + "\n"


def field_from_csv(text: str, graph: MetricGraph | None = None) -> ScalarField:
    """Parse ``vertex,value`` rows or a bare column of floats.

    Without ``graph`` the samples are placed on a path graph over ``[0, 1]``.
    """
    rows = _rows(text)
    if not rows:
        raise InvalidInputError("empty field file")
    if [c.strip() for c in rows[0]] == ["vertex", "value"]:
        pairs = sorted((_int(v), _float(x)) for v, x in rows[1:])
        if [v for v, _ in pairs] != list(range(len(pairs))):
            raise InvalidInputError("field vertices must be 0..n-1 without gaps")
        values = [x for _, x in pairs]
    else:
        if any(len(r) != 1 for r in rows):
            raise InvalidInputError("headerless field files hold one float per line")
        values = [_float(r[0]) for r in rows]
    if graph is None:
        if len(values) < 2:
            raise InvalidInputError("a path-graph field needs at least two samples")
        graph = path_graph(len(values), 1.0 / (len(values) - 1))
    return ScalarField(graph, values)


def marks_to_csv(interval: MarkedInterval) -> str:
    return "position\n" + "".join(f"{fmt(m)}\n" for m in interval.marks)


# ----------------------------------------------------------------------------
# trees


def tree_to_json(t: MergeTree) -> str:
    return json.dumps(t.to_dict(), indent=1) + "\n"


def tree_from_json(text: str) -> MergeTree:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"bad tree JSON: {exc}") from None
    if not isinstance(data, dict) or "nodes" not in data:
        raise InvalidInputError("tree JSON needs a 'nodes' list")
    return MergeTree.from_dict(data)


# ----------------------------------------------------------------------------
# diagrams and measures


def diagram_to_csv(d: Diagram) -> str:
    lines = ["birth,death,essential"]
    for b in d.bars:
        lines.append(f"{fmt(b.birth)},{fmt(b.death)},{int(b.essential)}")
    return "\n".join(lines) + "\n"


def diagram_from_csv(text: str) -> Diagram:
    rows = _rows(text)
    if not rows or [c.strip() for c in rows[0]] != ["birth", "death", "essential"]:
        raise InvalidInputError("diagram CSV needs the header birth,death,essential")
    bars = []
    for birth, death, ess in rows[1:]:
        flag = ess.strip().lower() in ("1", "true", "yes")
        b, d = _float(birth), _float(death)
        bars.append(Bar(b, -math.inf if flag else d, flag))
    if not bars:
        raise InvalidInputError("diagram file has no bars")
    finite = [x for b in bars for x in (b.birth, b.death) if math.isfinite(x)]
    ess_deaths = [_float(r[1]) for r in rows[1:]
                  if r[2].strip().lower() in ("1", "true", "yes") and math.isfinite(_float(r[1]))]
    lo = min(finite + ess_deaths)
    hi = max(finite)
    return Diagram(tuple(bars), (lo, hi))


def measure_to_csv(mu: PersistenceMeasure) -> str:
    lines = ["x,y,mass"]
    lines += [f"{fmt(x)},{fmt(y)},{fmt(m)}" for (x, y), m in zip(mu.points, mu.masses)]
    return "\n".join(lines) + "\n"


def measure_from_csv(text: str) -> PersistenceMeasure:
    rows = _rows(text)
    if not rows or [c.strip() for c in rows[0]] != ["x", "y", "mass"]:
        raise InvalidInputError("measure CSV needs the header x,y,mass")
    data = np.array([[_float(c) for c in r] for r in rows[1:]]).reshape(-1, 3)
    if not len(data):
        return PersistenceMeasure.empty()
    return PersistenceMeasure(data[:, :2], data[:, 2])


def plan_to_csv(plan, mu, nu, p) -> str:
    lines = ["source,target,mass,cost"]
    for s, t, mass, cost in plan.rows(mu, nu, p):
        src = "D" if s == DIAGONAL else str(s)
        tgt = "D" if t == DIAGONAL else str(t)
        lines.append(f"{src},{tgt},{fmt(mass)},{fmt(cost)}")
    return "\n".join(lines) + "\n"


def read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None
