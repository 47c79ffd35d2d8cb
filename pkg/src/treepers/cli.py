"""Command-line interface: ``treepers <subcommand> ...``.

Exit status is 0 on success, 2 for invalid input or flags and 3 when a
numerical routine fails.  Files are only ever written atomically.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import io
from ._errors import InvalidInputError, NumericalFailureError
from .barcode import (barcode_from_field, barcode_from_tree, box_dimension,
                      pers_p, persistence_index, variation_index)
from .domain import gen_fbm, gen_random_fourier
from .lab import EXPERIMENTS, LabConfig, run
from .transport import (ESSENTIAL_POLICIES, PersistenceMeasure, bottleneck,
                        to_measure, wasserstein_p)
from .tree import (MergeTree, approximate_from_tree, build_merge_tree,
                   cascade_tree, dyck_path, leaf_count, random_merge_tree,
                   total_length, trim)


def num(x: float) -> str:
    """12 significant digits; integral values print without a fraction."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True, allow_nan=False))
    elif text:
        print(text)


def _load_graph(args):
    if getattr(args, "graph", None):
        return io.graph_from_csv(io.read_text(args.graph))
    return None


def _load_tree(path, graph=None) -> MergeTree:
    text = io.read_text(path)
    if path.endswith(".json") or text.lstrip().startswith("{"):
        return io.tree_from_json(text)
    return build_merge_tree(io.field_from_csv(text, graph))


def _load_measure(path, essential_clip=True) -> PersistenceMeasure:
    text = io.read_text(path)
    head = text.lstrip().split("\n", 1)[0].replace(" ", "")
    if head == "x,y,mass":
        return io.measure_from_csv(text)
    return to_measure(io.diagram_from_csv(text), clip=essential_clip)


# ----------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> int:
    if args.kind == "fbm":
        f = gen_fbm(args.n, args.hurst, args.seed)
        io.atomic_write(args.output, io.field_to_csv(f))
        _emit(args, {"kind": "fbm", "n": len(f), "output": args.output},
              f"wrote {len(f)} samples to {args.output}")
    elif args.kind == "fourier":
        f = gen_random_fourier(args.n, args.modes, args.decay, args.seed)
        io.atomic_write(args.output, io.field_to_csv(f))
        if args.graph_output:
            io.atomic_write(args.graph_output, io.graph_to_csv(f.graph))
        _emit(args, {"kind": "fourier", "n": len(f), "output": args.output},
              f"wrote {len(f)} samples to {args.output}")
    else:
        if args.kind == "cascade":
            t = cascade_tree(args.depth, args.branching, args.ratio)
        else:
            t = random_merge_tree(np.random.default_rng(args.seed), args.leaves)
        io.atomic_write(args.output, io.tree_to_json(t))
        _emit(args, {"kind": args.kind, "nodes": len(t), "output": args.output},
              f"wrote a tree with {len(t.leaves)} leaves to {args.output}")
    return 0


def cmd_tree(args) -> int:
    f = io.field_from_csv(io.read_text(args.field), _load_graph(args))
    t = build_merge_tree(f)
    if args.output:
        io.atomic_write(args.output, io.tree_to_json(t))
    payload = {"nodes": len(t), "leaves": len(t.leaves),
               "total_length": total_length(t)}
    _emit(args, payload, f"nodes {len(t)}  leaves {len(t.leaves)}  "
                         f"length {num(payload['total_length'])}")
    return 0


def cmd_barcode(args) -> int:
    if args.input.endswith(".json"):
        d = barcode_from_tree(_load_tree(args.input))
    else:
        f = io.field_from_csv(io.read_text(args.input), _load_graph(args))
        d = barcode_from_field(f, args.method)
    if args.output:
        io.atomic_write(args.output, io.diagram_to_csv(d))
    payload = {"bars": len(d), "pers_1": pers_p(d, 1), "pers_2": pers_p(d, 2),
               "pers_inf": pers_p(d, math.inf)}
    _emit(args, payload, f"bars {len(d)}  pers_1 {num(payload['pers_1'])}  "
                         f"pers_2 {num(payload['pers_2'])}")
    return 0


def cmd_trim(args) -> int:
    t = _load_tree(args.input, _load_graph(args))
    out = trim(t, args.eps)
    if args.output:
        io.atomic_write(args.output, io.tree_to_json(out))
    payload = {"eps": args.eps, "leaves": leaf_count(t, args.eps),
               "total_length": total_length(t, args.eps)}
    _emit(args, payload, f"leaves {payload['leaves']}  "
                         f"length {num(payload['total_length'])}")
    return 0


def cmd_dist(args) -> int:
    mu = _load_measure(args.a)
    nu = _load_measure(args.b)
    p = math.inf if args.metric == "bottleneck" else args.p
    if math.isinf(p):
        value = bottleneck(mu, nu, essential=args.essential)
    elif args.plan:
        value, plan = wasserstein_p(mu, nu, p, essential=args.essential, return_plan=True)
        io.atomic_write(args.plan, io.plan_to_csv(plan, mu, nu, p))
    else:
        value = wasserstein_p(mu, nu, p, essential=args.essential)
    _emit(args, {"metric": args.metric, "p": None if math.isinf(p) else p,
                 "distance": value}, num(value))
    return 0


def cmd_dim(args) -> int:
    grid = args.grid
    t = _load_tree(args.input, _load_graph(args))
    est = persistence_index(t, grid)
    payload = {"persistence_index": est.to_dict()}
    lines = [f"persistence index {num(est.index)}  (ols slope {num(est.slope)}, "
             f"r2 {num(est.r2)})"]
    if args.box:
        box = box_dimension(t, grid)
        payload["box_dimension"] = box
        lines.append(f"box dimension {num(box['upper_est'])}")
    if args.variation:
        if args.input.endswith(".json"):
            raise InvalidInputError("the variation index needs a field, not a tree")
        f = io.field_from_csv(io.read_text(args.input), _load_graph(args))
        payload["variation_index"] = variation_index(f)
        lines.append(f"variation index {num(payload['variation_index'])}")
    if args.output:
        io.atomic_write(args.output, json.dumps(payload, indent=1, sort_keys=True) + "\n")
    if args.plot:
        rows = ["x,y,series"]
        rows += [f"{e!r},{c!r},leaf_count" for e, c in
                 zip(est.grid, (leaf_count(t, e) for e in est.grid))]
        io.atomic_write(args.plot, "\n".join(rows) + "\n")
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_dyck(args) -> int:
    t = _load_tree(args.input, _load_graph(args))
    if args.approximants:
        fs = approximate_from_tree(t, args.a, args.lam, args.approximants)
        f = fs[-1]
        marks = None
    else:
        f, marks = dyck_path(t, args.scale)
    io.atomic_write(args.output, io.field_to_csv(f))
    if args.graph_output:
        io.atomic_write(args.graph_output, io.graph_to_csv(f.graph))
    if args.marks and marks is not None:
        io.atomic_write(args.marks, io.marks_to_csv(marks))
    length = float(sum(e[2] for e in f.graph.edges))
    _emit(args, {"samples": len(f), "length": length},
          f"samples {len(f)}  length {num(length)}")
    return 0


def cmd_lab(args) -> int:
    params = {"experiment": args.experiment, "seeds": args.seeds, "seed": args.seed,
              "threads": args.threads, "essential": args.essential,
              "output": args.output}
    for key in ("n", "hurst", "delta", "p", "q", "depth", "a", "lam", "beta",
                "max_leaves"):
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    if args.hursts:
        params["hursts"] = tuple(args.hursts)
    if args.grid:
        params["eps_grid"] = tuple(args.grid)
    report = run(LabConfig(**params))
    if args.output:
        io.atomic_write(args.output, report.to_json())
    if args.csv:
        io.atomic_write(args.csv, report.to_csv())
    if args.plot:
        io.atomic_write(args.plot, report.plot_csv())
    agg = report.aggregates
    _emit(args, {"violations": report.violations, "trials": agg["trials"],
                 "failing_seeds": agg["failing_seeds"]},
          f"{args.experiment}: {agg['trials']} checks, violations {report.violations}")
    return 0


# ----------------------------------------------------------------------------
# parser


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON object")

    parser = argparse.ArgumentParser(prog="treepers", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a field or tree")
    p.add_argument("kind", choices=["fbm", "fourier", "tree", "cascade"])
    p.add_argument("--n", type=int, default=1024, help="number of vertices")
    p.add_argument("--hurst", type=float, default=0.5, help="fBm Hurst exponent in (0, 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--modes", type=int, default=8, help="Fourier modes")
    p.add_argument("--decay", type=float, default=2.0, help="Fourier amplitude decay")
    p.add_argument("--leaves", type=_positive_int, default=10, help="leaves of a random tree")
    p.add_argument("--depth", type=int, default=6, help="cascade depth")
    p.add_argument("--branching", type=_positive_int, default=2)
    p.add_argument("--ratio", type=float, default=0.5, help="cascade length ratio")
    p.add_argument("--graph-output", help="also write the domain graph (CSV)")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("tree", parents=[common], help="build the merge tree of a field")
    p.add_argument("field")
    p.add_argument("--graph", help="graph CSV (default: path over [0, 1])")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("barcode", parents=[common], help="H0 superlevel barcode")
    p.add_argument("input", help="field CSV or tree JSON")
    p.add_argument("--graph")
    p.add_argument("--method", choices=["tree", "elder"], default="tree")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_barcode)

    p = sub.add_parser("trim", parents=[common], help="epsilon-trimmed tree")
    p.add_argument("input", help="field CSV or tree JSON")
    p.add_argument("--eps", type=float, required=True, help="trim height")
    p.add_argument("--graph")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_trim)

    p = sub.add_parser("dist", parents=[common], help="distance between two diagrams")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--metric", choices=["wp", "bottleneck"], default="wp")
    p.add_argument("--p", type=float, default=2.0, help="transport exponent")
    p.add_argument("--essential", choices=ESSENTIAL_POLICIES, default="clip",
                   help="treatment of essential bars")
    p.add_argument("--plan", help="write the optimal plan (CSV)")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("dim", parents=[common], help="fractal index estimates")
    p.add_argument("input", help="field CSV or tree JSON")
    p.add_argument("--graph")
    p.add_argument("--grid", type=float, nargs="+", help="explicit eps grid")
    p.add_argument("--box", action="store_true", help="also estimate box dimension")
    p.add_argument("--variation", action="store_true", help="also the p-variation index")
    p.add_argument("--plot", help="write leaf counts as x,y,series CSV")
    p.add_argument("-o", "--output", help="estimate JSON")
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("dyck", parents=[common], help="contour field of a tree")
    p.add_argument("input", help="tree JSON (or a field CSV)")
    p.add_argument("--graph")
    p.add_argument("--scale", type=float, default=1.0, help="horizontal step of the contour")
    p.add_argument("--approximants", type=_positive_int,
                   help="emit the k-th iterative approximant instead")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=0.25)
    p.add_argument("--marks", help="write leaf marks (CSV)")
    p.add_argument("--graph-output", help="write the path graph (CSV)")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_dyck)

    p = sub.add_parser("lab", parents=[common], help="run an experiment")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--seeds", "--pairs", dest="seeds", type=_positive_int, default=20)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--n", type=int)
    p.add_argument("--hurst", type=float)
    p.add_argument("--hursts", type=float, nargs="+")
    p.add_argument("--delta", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--grid", type=float, nargs="+")
    p.add_argument("--depth", type=int)
    p.add_argument("--a", type=float)
    p.add_argument("--lam", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--max-leaves", type=_positive_int)
    p.add_argument("--essential", choices=ESSENTIAL_POLICIES, default="clip")
    p.add_argument("--threads", type=_positive_int, default=1, help="worker threads")
    p.add_argument("--csv", help="flattened trial records")
    p.add_argument("--plot", help="plot data as x,y,series CSV")
    p.add_argument("-o", "--output", help="report JSON")
    p.set_defaults(func=cmd_lab)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"treepers: invalid input: {exc}", file=sys.stderr)
        return 2
    except NumericalFailureError as exc:
        print(f"treepers: numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"treepers: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
