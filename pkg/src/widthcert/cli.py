"""Command-line entry points.

Subcommands: gen, hc, coarea, separate, width, systole, tree, verify.
Every numeric flag parses as a decimal double.  Exit codes: 0 success,
1 hypothesis violation or inequality failure, 2 input or usage error,
3 internal budget exhaustion.
"""

from __future__ import annotations

import argparse
import json
import sys

from .coarea import IntervalTooNarrow, select_shell
from .content import (
    BudgetExceeded,
    DEFAULT_EXACT_BUDGET,
    GapNotCertified,
    content_exact,
    content_greedy,
)
from .generators import generate
from .harness import append_report, automatic_radius, verify_instance
from .separators import (
    AmbiguousContent,
    HypothesisViolation,
    PreconditionFailed,
    StepBudgetExceeded,
    minimize_separator,
)
from .serialize import (
    content_json,
    cycle_json,
    dumps,
    separator_json,
    threshold_json,
    tree_json,
    width_json,
)
from .spaces import SpaceFormatError, dump_space, load_space
from .topology import (
    InequalityViolation,
    ball_length_criterion,
    systole,
    tree_report,
)
from .width import CoverConstructionError, bound_width

EXIT_OK = 0
EXIT_HYPOTHESIS = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _subset(space, spec: str | None):
    if spec is None:
        return space.all_points()
    return frozenset(int(tok) for tok in spec.split(",") if tok.strip() != "")


def cmd_gen(args) -> int:
    params = {}
    for key in ("length", "h", "leg_length", "epsilon"):
        v = getattr(args, key, None)
        if v is not None:
            params[key] = v
    for key in ("legs", "edges", "seed", "k", "n", "dim"):
        v = getattr(args, key, None)
        if v is not None:
            params["n_edges" if key == "edges" else key] = v
    if args.lengths is not None:
        params["lengths"] = tuple(float(t) for t in args.lengths.split(","))
    space = generate(args.shape, **params)
    _write(args.output, dump_space(space))
    return EXIT_OK


def cmd_hc(args) -> int:
    space = load_space(args.space)
    target = _subset(space, args.subset)
    if args.mode == "exact":
        est = content_exact(space, target, args.dim, cap=args.cap, max_points=args.budget)
    else:
        est = content_greedy(space, target, args.dim, cap=args.cap)
    _write(args.output, dumps(content_json(est)))
    return EXIT_OK


def cmd_coarea(args) -> int:
    space = load_space(args.space)
    sel = select_shell(space, _subset(space, args.subset), int(args.x), args.r1, args.r2, args.dim)
    doc = {
        "s": sel.s,
        "weight": sel.weight,
        "certified_bound": sel.certified_bound,
        "touched": list(sel.touched),
        "shell": sorted(sel.shell),
        "n_shells": sel.n_shells,
        "covering": [[c, r] for c, r in sel.covering.balls],
    }
    _write(args.output, dumps(doc))
    return EXIT_OK


def cmd_separate(args) -> int:
    space = load_space(args.space)
    if args.dim < 2:
        raise SpaceFormatError("--dim must be >= 2 (separator content dimension dim-1)")
    cert = minimize_separator(
        space, space.all_points(), args.r, int(args.dim) - 1, mu=args.mu,
        max_points=args.budget,
    )
    _write(args.output, dumps(separator_json(cert)))
    return EXIT_OK


def cmd_width(args) -> int:
    space = load_space(args.space)
    r = args.r
    doc_extra = {}
    if r is None:
        r, est = automatic_radius(space, int(args.dim), args.budget)
        doc_extra = {"content_upper": est.value}
    cert = bound_width(space, space.all_points(), int(args.dim), r, max_points=args.budget)
    doc = width_json(cert)
    doc.update(doc_extra)
    _write(args.output, dumps(doc))
    return EXIT_OK


def cmd_systole(args) -> int:
    space = load_space(args.space)
    _write(args.output, dumps(cycle_json(systole(space))))
    return EXIT_OK


def cmd_tree(args) -> int:
    space = load_space(args.space)
    doc = tree_json(tree_report(space))
    if args.r is not None:
        doc["threshold"] = threshold_json(ball_length_criterion(space, args.r))
    _write(args.output, dumps(doc))
    return EXIT_OK


def cmd_verify(args) -> int:
    space = load_space(args.space)
    report = verify_instance(space, int(args.dim), max_points=args.budget)
    if args.output and args.output != "-":
        append_report(args.output, report)
    else:
        sys.stdout.write(dumps(report))
    return {
        "success": EXIT_OK,
        "hypothesis-violation": EXIT_HYPOTHESIS,
        "budget-exhausted": EXIT_BUDGET,
    }.get(report["outcome"], EXIT_HYPOTHESIS if report["outcome"] != "success" else EXIT_OK)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="widthcert",
        description="certified width, content, separator and systole computations",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, space=True):
        if space:
            p.add_argument("--space", required=True, help="space document (JSON)")
        p.add_argument("-o", "--output", default=None, help="output file (default stdout)")
        p.add_argument("--budget", type=int, default=DEFAULT_EXACT_BUDGET,
                       help="exact-solver point budget")

    g = sub.add_parser("gen", help="generate a space document")
    g.add_argument("--shape", required=True,
                   choices=["interval", "circle", "star", "tree", "theta",
                            "grid-torus", "random-points"])
    g.add_argument("--length", type=float)
    g.add_argument("--h", type=float)
    g.add_argument("--legs", type=int)
    g.add_argument("--leg-length", dest="leg_length", type=float)
    g.add_argument("--edges", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--dim", type=int)
    g.add_argument("--epsilon", type=float)
    g.add_argument("--lengths", help="comma-separated arc lengths (theta)")
    g.add_argument("-o", "--output", default=None)
    g.set_defaults(fn=cmd_gen)

    p = sub.add_parser("hc", help="Hausdorff content of a subset")
    common(p)
    p.add_argument("--dim", type=float, required=True, help="content dimension m")
    p.add_argument("--cap", type=float, default=None, help="radius cap b")
    p.add_argument("--mode", choices=["exact", "greedy"], default="exact")
    p.add_argument("--subset", default=None, help="comma-separated point indices")
    p.set_defaults(fn=cmd_hc)

    p = sub.add_parser("coarea", help="minimum-weight shell in an annulus")
    common(p)
    p.add_argument("--x", type=float, required=True, help="centre point index")
    p.add_argument("--r1", type=float, required=True)
    p.add_argument("--r2", type=float, required=True)
    p.add_argument("--dim", type=float, required=True, help="content dimension m")
    p.add_argument("--subset", default=None)
    p.set_defaults(fn=cmd_coarea)

    p = sub.add_parser("separate", help="near-minimal separating subset")
    common(p)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--dim", type=int, required=True,
                   help="ambient width dimension n (separator content dim n-1)")
    p.add_argument("--mu", type=float, default=None)
    p.set_defaults(fn=cmd_separate)

    p = sub.add_parser("width", help="certified width bound")
    common(p)
    p.add_argument("--dim", type=int, required=True, help="multiplicity bound n")
    p.add_argument("--r", type=float, default=None,
                   help="radius (default: 4n HC^(1/n) (1+1e-3))")
    p.set_defaults(fn=cmd_width)

    p = sub.add_parser("systole", help="graph girth or Z2 homology systole")
    common(p)
    p.set_defaults(fn=cmd_systole)

    p = sub.add_parser("tree", help="metric-tree centre report")
    common(p)
    p.add_argument("--r", type=float, default=None,
                   help="also run the ball-length criterion at r")
    p.set_defaults(fn=cmd_tree)

    p = sub.add_parser("verify", help="full pipeline with JSONL report")
    common(p)
    p.add_argument("--dim", type=int, required=True)
    p.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0,) else 0
    try:
        return args.fn(args)
    except (HypothesisViolation, CoverConstructionError, InequalityViolation,
            PreconditionFailed, GapNotCertified) as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (BudgetExceeded, StepBudgetExceeded, AmbiguousContent) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (SpaceFormatError, FileNotFoundError, json.JSONDecodeError,
            IntervalTooNarrow, IndexError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
