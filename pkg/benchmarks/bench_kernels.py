"""Compare the compiled and pure-Python graph kernels.

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R]

Prints one line per kernel with the best time of each backend, then times a
whole innermost reduction under each backend (in a subprocess, since the
backend is chosen at import).
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit

from tiergraph import kernels
from tiergraph.algebra import Signature
from tiergraph.generators import random_dag_term
from tiergraph.graph import from_term

SIG = Signature.of(a=0, b=0, g=1, f=2, h=3)


def workload(n: int, seed: int = 0):
    g = from_term(random_dag_term(SIG, random.Random(seed), n))
    labels, succ, root = dict(g.graph.labels), dict(g.graph.succ), g.root
    preds = {v: set() for v in succ}
    for v, cs in succ.items():
        for c in cs:
            preds[c].add(v)
    _, post = kernels.python.dfs_orders(succ, [root])
    marked = set(random.Random(seed).sample(sorted(succ), 10))
    return labels, succ, preds, root, post, marked


def cases(mod, w):
    labels, succ, preds, root, post, marked = w
    return {
        "reachable": lambda: mod.reachable(succ, [root]),
        "dfs_orders": lambda: mod.dfs_orders(succ, [root]),
        "mark_below": lambda: mod.mark_below(succ, post, marked),
        "mark_above": lambda: mod.mark_above(succ, post, marked),
        "canonical_sequence": lambda: mod.canonical_sequence(labels, succ, [root]),
        "redirect+release": lambda: _redirect_release(mod, labels, succ, preds, root),
    }


def _redirect_release(mod, labels, succ, preds, root):
    # work on copies so every repetition starts from the same graph
    s, l = dict(succ), dict(labels)
    p = {v: set(ps) for v, ps in preds.items()}
    child = s[root][0]
    fresh = max(s) + 1
    s[fresh], l[fresh], p[fresh] = (), None, set()
    mod.redirect(s, p, child, fresh)
    if not p[child]:
        mod.release(l, s, p, child, root)


def best(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


END_TO_END = """
import time
from tiergraph import kernels
from tiergraph.corpus import CORPUS
from tiergraph.rewrite import normalize
ex = CORPUS["{fn}"]
g = ex.sized_graph({n})
t = time.perf_counter()
normalize(g, ex.compiled().ruleset, "{strategy}")
print(kernels.BACKEND, time.perf_counter() - t)
"""


def end_to_end(fn: str, n: int, strategy: str, pure: bool) -> tuple[str, float]:
    env = dict(os.environ)
    env.pop("TIERGRAPH_PURE_PYTHON", None)
    if pure:
        env["TIERGRAPH_PURE_PYTHON"] = "1"
    out = subprocess.run(
        [sys.executable, "-c", END_TO_END.format(fn=fn, n=n, strategy=strategy)],
        env=env, capture_output=True, text=True, check=True,
    ).stdout.split()
    return out[0], float(out[1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=20000, help="vertices in the kernel workload")
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args(argv)
    if kernels.compiled is None:
        print("compiled kernels are not built; only the pure-Python backend is available")
    w = workload(args.size)
    print(f"kernels on a {args.size}-vertex shared graph (best of {args.repeat}, ms)")
    print(f"{'kernel':20s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")
    py_cases = cases(kernels.python, w)
    c_cases = cases(kernels.compiled, w) if kernels.compiled is not None else {}
    for name, fn in py_cases.items():
        tp = best(fn, args.repeat) * 1e3
        if name in c_cases:
            tc = best(c_cases[name], args.repeat) * 1e3
            print(f"{name:20s} {tp:10.2f} {tc:10.2f} {tp / tc:7.1f}x")
        else:
            print(f"{name:20s} {tp:10.2f} {'-':>10s}")
    print()
    print("whole reductions (s)")
    for fn, n, strategy in (("mult", 200, "innermost"), ("pick", 400, "outermost"), ("mirror2", 2000, "innermost")):
        line = f"{fn:8s} |G|={n:<5d} {strategy:10s}"
        for pure in (True, False):
            backend, t = end_to_end(fn, n, strategy, pure)
            line += f" {backend}={t:.3f}"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
