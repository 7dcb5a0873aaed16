"""Command line: ``tiergraph {check,run,trace,dot,bench,confluence} ...``

Exit status: 0 success, 1 tier error, 2 step/size/unfold limit hit,
3 parse error, 4 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .algebra import TierError, format_term
from .compile import CompiledProgram, build_call_graph, compile_program, sized_call_graph
from .dsl import ParseError, Program, parse
from .graph import CapExceeded, to_dot, unfold
from .harness import NoFit, bound_fit, confluence_experiment, grid_csv, measure
from .rewrite import STRATEGIES, LimitExceeded, Limits, normalize

OK, TIER, LIMIT, PARSE, USAGE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


def _sizes(text: str) -> range:
    try:
        span, _, step = text.partition(":")
        a, _, b = span.partition("..")
        return range(int(a), int(b) + 1, int(step) if step else 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b or a..b:step, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tiergraph", description="Tiered recursion compiled to term graph rewriting.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="tier-check the functions of a program")
    c.add_argument("file")
    c.add_argument("fn", nargs="*", help="functions to check (default: all)")

    def call(sp):
        sp.add_argument("file")
        sp.add_argument("fn")
        sp.add_argument("terms", nargs="*", metavar="term", help="argument terms or named term constants")
        sp.add_argument("--strategy", choices=STRATEGIES, default="innermost")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--max-steps", type=int, default=Limits.max_steps)
        sp.add_argument("--max-size", type=int, default=Limits.max_size)
        sp.add_argument("--no-share", action="store_true", help="build arguments as trees")

    r = sub.add_parser("run", help="reduce a call to normal form and print statistics")
    call(r)
    r.add_argument("--unfold", nargs="?", const=10**6, type=int, metavar="CAP", help="print the result term")
    r.add_argument("--tiers", action="store_true", help="print tier annotations in the result term")

    t = sub.add_parser("trace", help="print one JSON line per rewriting step")
    call(t)

    d = sub.add_parser("dot", help="print the initial and final graphs in DOT")
    call(d)
    d.add_argument("--which", choices=("both", "initial", "final"), default="both")

    b = sub.add_parser("bench", help="measure a size grid and fit a polynomial bound")
    b.add_argument("file")
    b.add_argument("fn")
    b.add_argument("--sizes", type=_sizes, default=_sizes("10..100"), help="a..b or a..b:step")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--unfold", action="store_true", help="add the unfolded result size column")
    b.add_argument("--fit", action="store_true", help="print the fitted bound to stderr")

    f = sub.add_parser("confluence", help="compare strategies on one call")
    call(f)
    f.add_argument("--trials", type=int, default=20)
    return p


def _load(path: str) -> Program:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse(fh.read())
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _compile(prog: Program, fn: str) -> CompiledProgram:
    fd = prog.functions.get(fn)
    if fd is None:
        raise UsageError(f"no function named {fn!r}")
    if fd.error is not None:
        raise fd.error
    return compile_program(fd.fn, fd.sig, prog.signatures[fd.signature], fn)


def _call_graph(args, prog: Program, p: CompiledProgram):
    terms = [prog.resolve_term(t, p.signature) for t in args.terms]
    if len(terms) != p.arity:
        raise UsageError(f"{args.fn} takes {p.arity} arguments, {len(terms)} given")
    return build_call_graph(p, terms, share=not args.no_share)


def _limits(args) -> Limits:
    return Limits(args.max_steps, args.max_size)


def cmd_check(args, out) -> int:
    prog = _load(args.file)
    names = args.fn or list(prog.functions)
    status = OK
    for name in names:
        if name not in prog.functions:
            raise UsageError(f"no function named {name!r}")
        try:
            p = _compile(prog, name)
            print(f"{name}: ok {p.tiersig}", file=out)
        except TierError as e:
            print(f"{name}: {e}", file=out)
            status = TIER
    return status


def cmd_run(args, out) -> int:
    prog = _load(args.file)
    p = _compile(prog, args.fn)
    g = _call_graph(args, prog, p)
    h, m = normalize(g, p.ruleset, args.strategy, limits=_limits(args), seed=args.seed)
    stats = m.as_dict()
    if args.unfold is not None:
        t = unfold(h, cap=args.unfold)
        stats["unfold_size"] = t.size
        print(format_term(t, tiers=args.tiers), file=out)
    print(json.dumps(stats), file=out)
    return OK


def cmd_trace(args, out) -> int:
    prog = _load(args.file)
    p = _compile(prog, args.fn)
    g = _call_graph(args, prog, p)

    def emit(rec: dict) -> None:
        print(json.dumps(rec), file=out)

    normalize(g, p.ruleset, args.strategy, limits=_limits(args), seed=args.seed, on_step=emit)
    return OK


def cmd_dot(args, out) -> int:
    prog = _load(args.file)
    p = _compile(prog, args.fn)
    g = _call_graph(args, prog, p)
    if args.which in ("both", "initial"):
        print(to_dot(g, "initial"), file=out)
    if args.which in ("both", "final"):
        h, _ = normalize(g, p.ruleset, args.strategy, limits=_limits(args), seed=args.seed)
        print(to_dot(h, "final"), file=out)
    return OK


def cmd_bench(args, out) -> int:
    prog = _load(args.file)
    p = _compile(prog, args.fn)
    points = [
        measure(sized_call_graph(p, n, args.seed), p.ruleset, unfold_cap=0 if args.unfold else None)
        for n in args.sizes
    ]
    out.write(grid_csv(points))
    if args.fit:
        try:
            fit = bound_fit(points)
            print(f"degree {fit.degree}: p(x) = {fit}", file=sys.stderr)
        except NoFit as e:
            print(f"no fit: {e}", file=sys.stderr)
    return OK


def cmd_confluence(args, out) -> int:
    prog = _load(args.file)
    p = _compile(prog, args.fn)
    g = _call_graph(args, prog, p)
    report = confluence_experiment(g, p.ruleset, trials=args.trials, seed=args.seed, limits=_limits(args))
    print(json.dumps(report.as_dict(), indent=2), file=out)
    return OK


COMMANDS = {
    "check": cmd_check,
    "run": cmd_run,
    "trace": cmd_trace,
    "dot": cmd_dot,
    "bench": cmd_bench,
    "confluence": cmd_confluence,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return COMMANDS[args.cmd](args, out)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return PARSE
    except TierError as e:
        print(f"tier error: {e}", file=sys.stderr)
        return TIER
    except (LimitExceeded, CapExceeded) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return LIMIT
    except (UsageError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
