"""Contexts and substitution, preservation checks, strategy experiments and
polynomial bound fitting."""

from __future__ import annotations

import csv
import hashlib
import io
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Callable, Iterable, Mapping, Sequence

from scipy.optimize import linprog

from . import rewrite
from .graph import LabelledGraph, TermGraph, canonical_form, properize, subgraph, unfold_size
from .rewrite import LimitExceeded, Limits, RuleSet, find_redexes, normalize, select_innermost

# -- contexts ----------------------------------------------------------------


@dataclass
class Context:
    """A term graph whose unlabelled vertices are holes."""

    graph: TermGraph

    @property
    def holes(self) -> list[int]:
        return [v for v, lab in self.graph.labels.items() if lab is None]


def substitute(
    c: Context | TermGraph, xi: Mapping[int, int], g: TermGraph, properize_result: bool = False
) -> tuple[TermGraph, dict[int, int]]:
    """Plug ``g`` into the holes of ``c`` named by ``xi``.

    Vertices of ``g`` are renamed apart from those of ``c``; the renaming is
    returned alongside the plugged graph.  Holes outside ``xi`` stay holes.
    """
    cg = c.graph if isinstance(c, Context) else c
    holes = set(xi)
    for h in holes:
        if h not in cg.graph or cg.labels[h] is not None:
            raise ValueError(f"vertex {h} is not a hole of the context")
    offset = cg.graph.next_id
    rename = {v: v + offset for v in g.graph.succ}
    labels: dict = {}
    succ: dict = {}
    for v, children in cg.succ.items():
        if v in holes:
            continue
        labels[v] = cg.labels[v]
        succ[v] = tuple(rename[xi[w]] if w in holes else w for w in children)
    for v, children in g.succ.items():
        labels[rename[v]] = g.labels[v]
        succ[rename[v]] = tuple(rename[w] for w in children)
    root = rename[xi[cg.root]] if cg.root in holes else cg.root
    out = TermGraph(LabelledGraph(labels, succ, offset + g.graph.next_id), root)
    return (properize(out) if properize_result else out), rename


def inner_redexes(p: TermGraph, rs: RuleSet, inside: Iterable[int]):
    inside = set(inside)
    return [r for r in find_redexes(p, rs) if r.root in inside]


def check_context_preservation(
    c: Context | TermGraph,
    xi: Mapping[int, int],
    g: TermGraph,
    rs: RuleSet,
) -> bool:
    """Fire one innermost redex lying in ``g`` inside ``c[xi <- g]`` and
    check that every redex-free part of ``g`` reachable from hole images is
    unchanged up to isomorphism.

    Checks each hole image on its own and all redex-free images together.
    Returns True when there is nothing to fire.
    """
    p, rename = substitute(c, xi, g)
    redexes = inner_redexes(p, rs, rename.values())
    if not redexes:
        return True
    all_roots = {r.root for r in find_redexes(p, rs)}
    redex = select_innermost(redexes, p)
    q, target = rewrite.fire_with_target(p, redex)
    clean = []
    for u in sorted({rename[v] for v in xi.values()}):
        reach = subgraph(p, (u,)).graph.succ
        if not any(r in reach for r in all_roots):
            clean.append(u)
    groups = [(u,) for u in clean] + ([tuple(clean)] if len(clean) > 1 else [])
    for roots in groups:
        after = tuple(target if u == redex.root else u for u in roots)
        if any(v not in q.graph for v in after):
            return False
        if canonical_form(subgraph(p, roots)) != canonical_form(subgraph(q, after)):
            return False
    return True


# -- strategy experiments -----------------------------------------------------


@dataclass
class Run:
    strategy: str
    steps: int | None
    max_size: int | None
    final_canonical_key: str | None
    seed: int | None = None
    error: str | None = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class ConfluenceReport:
    runs: list[Run]
    all_iso: bool
    ordered: bool
    strict: bool

    @property
    def ok(self) -> bool:
        return self.all_iso and self.ordered

    def as_dict(self) -> dict:
        return {
            "all_iso": self.all_iso,
            "ordered": self.ordered,
            "strict": self.strict,
            "runs": [r.as_dict() for r in self.runs],
        }


def _key(g: TermGraph) -> str:
    return hashlib.sha256(repr(canonical_form(g)).encode()).hexdigest()[:16]


def confluence_experiment(
    g: TermGraph,
    rs: RuleSet,
    trials: int = 20,
    seed: int = 0,
    limits: Limits = Limits(),
) -> ConfluenceReport:
    """Reduce ``g`` outermost, innermost and ``trials`` times at random.

    ``ordered`` holds when outermost <= random <= innermost in every trial;
    ``strict`` when some trial has outermost < innermost.
    """
    rng = random.Random(seed)
    runs: list[Run] = []
    keys: dict[int, tuple] = {}

    def go(strategy: str, s: int | None) -> Run:
        try:
            h, m = normalize(g, rs, strategy, limits=limits, seed=s)
        except LimitExceeded as e:
            return Run(strategy, None, e.metrics.max_size, None, s, str(e))
        keys[len(runs)] = canonical_form(h)
        return Run(strategy, m.steps, m.max_size, _key(h), s)

    runs.append(go("outermost", None))
    runs.append(go("innermost", None))
    for _ in range(trials):
        runs.append(go("any", rng.randrange(2**32)))
    forms = list(keys.values())
    all_iso = len(keys) == len(runs) and all(f == forms[0] for f in forms)
    n, k = runs[0].steps, runs[1].steps
    ordered = all_iso and all(n <= r.steps <= k for r in runs[2:]) and n <= k
    return ConfluenceReport(runs, all_iso, ordered, ordered and n < k)


# -- bound fitting --------------------------------------------------------------


class NoFit(Exception):
    pass


@dataclass
class GridPoint:
    size: int
    steps: int
    max_size: int
    final_size: int
    initial_tiers: dict[int, int]
    final_tiers: dict[int, int]
    unfold_size: int | None = None

    @property
    def work(self) -> int:
        return max(self.steps, self.max_size)

    def tier_growth(self) -> list[tuple[int, int]]:
        """Per tier ``i``: (size of all higher tiers in G, growth of tier i)."""
        tiers = set(self.initial_tiers) | set(self.final_tiers)
        out = []
        for i in sorted(tiers):
            above = sum(v for k, v in self.initial_tiers.items() if k > i)
            out.append((above, self.final_tiers.get(i, 0) - self.initial_tiers.get(i, 0)))
        return out


@dataclass
class BoundFit:
    degree: int
    coefficients: tuple[int, ...]  # constant term first
    checks: list[tuple[int, int, int]] = field(default_factory=list)  # (|G|, measured, bound)
    points: list[GridPoint] = field(default_factory=list)

    def __call__(self, x: int) -> int:
        return sum(c * x**k for k, c in enumerate(self.coefficients))

    def dominates(self, p: GridPoint) -> bool:
        return p.steps <= self(p.size) and p.max_size <= self(p.size) and self.bounds_tiers(p)

    def bounds_tiers(self, p: GridPoint) -> bool:
        return all(growth <= self(above) for above, growth in p.tier_growth())

    def __str__(self) -> str:
        terms = [f"{c}" if k == 0 else f"{c}*x" if k == 1 else f"{c}*x^{k}" for k, c in enumerate(self.coefficients) if c]
        return " + ".join(terms) or "0"


def measure(g: TermGraph, rs: RuleSet, limits: Limits = Limits(), unfold_cap: int | None = None) -> GridPoint:
    h, m = normalize(g, rs, "innermost", limits=limits)
    return GridPoint(
        size=m.initial_size,
        steps=m.steps,
        max_size=m.max_size,
        final_size=m.final_size,
        initial_tiers=m.initial_tier_sizes,
        final_tiers=m.tier_sizes_final,
        unfold_size=unfold_size(h) if unfold_cap is not None else None,
    )


def _fit_degree(points: Sequence[GridPoint], degree: int) -> tuple[int, ...] | None:
    """Natural coefficients of a degree-``degree`` polynomial dominating the
    measurements, minimizing its total over the points."""
    rows, rhs = [], []

    def dominate(x: int, y: int):
        rows.append([-(x**k) for k in range(degree + 1)])
        rhs.append(-y)

    for p in points:
        dominate(p.size, p.steps)
        dominate(p.size, p.max_size)
        for above, growth in p.tier_growth():
            dominate(above, growth)
    cost = [sum(p.size**k for p in points) for k in range(degree + 1)]
    res = linprog(
        cost,
        A_ub=rows,
        b_ub=rhs,
        bounds=[(0, None)] * (degree + 1),
        method="highs",
    )
    if res.status != 0:
        return None
    coeffs = tuple(int(ceil(Fraction(c).limit_denominator(10**6) - Fraction(1, 10**9))) for c in res.x)
    return tuple(max(c, 0) for c in coeffs)


def bound_fit(points: Sequence[GridPoint], degree_max: int = 3) -> BoundFit:
    """Fit on the lower half of the grid (by |G|), validate on the upper half.

    Returns the lowest degree whose natural-coefficient polynomial dominates
    steps, peak size and tier growth everywhere; raises :class:`NoFit`.
    """
    pts = sorted(points, key=lambda p: p.size)
    if len(pts) < 2:
        raise NoFit("need at least two grid points")
    half = len(pts) // 2
    lower = pts[:half]
    for d in range(degree_max + 1):
        coeffs = _fit_degree(lower, d)
        if coeffs is None:
            continue
        fit = BoundFit(d, coeffs, points=pts)
        if all(fit.dominates(p) for p in pts):
            fit.checks = [(p.size, p.work, fit(p.size)) for p in pts]
            return fit
    raise NoFit(f"no polynomial of degree <= {degree_max} dominates the measurements")


def grid(
    make_graph: Callable[[int], TermGraph],
    rs: RuleSet,
    sizes: Iterable[int],
    limits: Limits = Limits(),
    unfold: bool = False,
) -> list[GridPoint]:
    return [measure(make_graph(n), rs, limits, 0 if unfold else None) for n in sizes]


def grid_csv(points: Sequence[GridPoint]) -> str:
    tiers = sorted({t for p in points for t in (*p.initial_tiers, *p.final_tiers)})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["size", "steps", "max_size", "final_size"] + [f"tier{t}" for t in tiers]
    if any(p.unfold_size is not None for p in points):
        header.append("unfold_size")
    w.writerow(header)
    for p in points:
        row = [p.size, p.steps, p.max_size, p.final_size] + [p.final_tiers.get(t, 0) for t in tiers]
        if "unfold_size" in header:
            row.append(p.unfold_size)
        w.writerow(row)
    return buf.getvalue()
