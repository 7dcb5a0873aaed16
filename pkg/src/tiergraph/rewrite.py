"""Graph rewriting rules, redexes, firing, strategies and the reduction driver."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from . import kernels
from .algebra import Label, Signature
from .graph import (
    AnyRooted,
    GraphError,
    LabelledGraph,
    TermGraph,
    find_homomorphism,
    is_proper,
    properize,
    rooted_at,
    tier_sizes,
)

log = logging.getLogger(__name__)

STRATEGIES = ("innermost", "outermost", "any")


class RuleError(ValueError):
    pass


class UnfoldingError(ValueError):
    """The recurrence argument is not a constructor graph of the family's slice."""


class Rule:
    """A rule ``(body, left_root, right_root)``.

    ``pattern`` is the subgraph of the body at the left root; ``build_order``
    lists the vertices reachable from the right root but not from the left
    root, children before parents.
    """

    __slots__ = ("body", "left_root", "right_root", "name", "pattern", "left", "build_order")

    def __init__(self, body: LabelledGraph, left_root: int, right_root: int, name: str = ""):
        if body.labels.get(left_root) is None:
            raise RuleError("the left root must be labelled")
        if right_root not in body:
            raise RuleError("the right root is not a vertex of the body")
        body.validate()
        self.body = body
        self.left_root = left_root
        self.right_root = right_root
        self.name = name or f"rule:{body.labels[left_root].name}"
        self.pattern = rooted_at(body, left_root)
        self.left = frozenset(self.pattern.graph.succ)
        _, post = kernels.dfs_orders(body.succ, (right_root,))
        if right_root == left_root or left_root in post:
            raise RuleError("the right side reaches the left root")
        self.build_order = tuple(v for v in post if v not in self.left)

    @property
    def head(self) -> Label:
        return self.body.labels[self.left_root]

    @property
    def key(self) -> tuple[Label, Label | None]:
        """Index key: head label and the label of the first argument, if any."""
        children = self.body.succ[self.left_root]
        first = self.body.labels[children[0]] if children else None
        return self.head, first

    def __repr__(self) -> str:
        return f"<Rule {self.name}>"


@dataclass(frozen=True)
class UnfoldingFamily:
    """All unfolding rules for one recursive symbol.

    ``head`` is the recursive function symbol (arity n+1), ``tier`` the slice
    of ``signature`` the recurrence argument must live in, and ``steps`` the
    step symbols, one per constructor in signature order, each of arity
    ``2 * arity(constructor) + n``.
    """

    head: Label
    signature: Signature
    tier: int
    steps: tuple[Label, ...]

    def __post_init__(self):
        n = self.head.arity - 1
        if n < 0:
            raise RuleError("a recursive symbol takes at least the recurrence argument")
        if len(self.steps) != len(self.signature):
            raise RuleError("one step symbol per constructor is required")
        for (name, ar), step in zip(self.signature.symbols, self.steps):
            if step.arity != 2 * ar + n:
                raise RuleError(f"step symbol for {name} must have arity {2 * ar + n}, has {step.arity}")

    @property
    def n(self) -> int:
        return self.head.arity - 1

    def step_for(self, constructor: str) -> Label:
        return self.steps[self.signature.index(constructor)]

    def admits(self, lab: Label | None) -> bool:
        return (
            lab is not None
            and lab.tier == self.tier
            and lab.name in self.signature
            and self.signature.arity(lab.name) == lab.arity
        )


@dataclass(eq=False)
class Redex:
    rule: Rule
    mapping: dict[int, int]

    @property
    def root(self) -> int:
        return self.mapping[self.rule.left_root]


class RuleSet:
    def __init__(self, rules: Iterable[Rule] = (), families: Iterable[UnfoldingFamily] = ()):
        self.rules = list(rules)
        self.families = list(families)
        self._by_head: dict[Label, list[Rule]] = {}
        for r in self.rules:
            self._by_head.setdefault(r.head, []).append(r)
        self._family: dict[Label, UnfoldingFamily] = {}
        for fam in self.families:
            self._family.setdefault(fam.head, fam)

    def candidates(self, head: Label | None) -> list[Rule]:
        return self._by_head.get(head, [])

    def family(self, head: Label | None) -> UnfoldingFamily | None:
        return self._family.get(head)

    @property
    def heads(self) -> set[Label]:
        return set(self._by_head) | set(self._family)

    def __or__(self, other: "RuleSet") -> "RuleSet":
        return RuleSet(self.rules + other.rules, self.families + other.families)

    def __repr__(self) -> str:
        return f"<RuleSet {len(self.rules)} rules, {len(self.families)} unfolding families>"


# -- unfolding rules ---------------------------------------------------------


def _unfolding_layout(family: UnfoldingFamily, labels, succ, arg_root: int):
    _, post = kernels.dfs_orders(succ, (arg_root,))
    order = post[::-1]
    for v in order:
        if not family.admits(labels[v]):
            raise UnfoldingError(
                f"vertex {v} labelled {labels[v]} is not a constructor of tier {family.tier}"
            )
    return order


def _unfolding_body(family: UnfoldingFamily, labels, succ, order: list[int]) -> Rule:
    m, n = len(order), family.n
    idx = {v: k for k, v in enumerate(order)}
    xs = tuple(range(2 * m, 2 * m + n))
    y = 2 * m + n
    body_labels: dict[int, Label | None] = {}
    body_succ: dict[int, tuple[int, ...]] = {}
    for k, v in enumerate(order):
        body_labels[k] = labels[v]
        body_succ[k] = tuple(idx[c] for c in succ[v])
    for k in range(m):
        vs = body_succ[k]
        body_labels[m + k] = family.step_for(body_labels[k].name)
        body_succ[m + k] = vs + tuple(m + c for c in vs) + xs
    for x in xs:
        body_labels[x] = None
        body_succ[x] = ()
    body_labels[y] = family.head
    body_succ[y] = (0,) + xs
    body = LabelledGraph(body_labels, body_succ, y + 1)
    return Rule(body, y, m, name=f"unfold:{family.head.name}:{m}")


def synth_unfolding_rule(family: UnfoldingFamily, arg: AnyRooted) -> Rule:
    """The unfolding rule of ``family`` for the recurrence argument ``arg``.

    Body vertices are numbered ``v_1..v_m`` (a copy of ``arg`` in reverse
    postorder, ``v_1`` its root), then ``w_1..w_m``, ``x_1..x_n`` and ``y``.
    """
    root = arg.roots[0]
    order = _unfolding_layout(family, arg.graph.labels, arg.graph.succ, root)
    return _unfolding_body(family, arg.graph.labels, arg.graph.succ, order)


def unfolding_redex(family: UnfoldingFamily, g: AnyRooted | LabelledGraph, at: int) -> Redex | None:
    """The unfolding redex at ``at`` if its first argument is a constructor graph."""
    base = g if isinstance(g, LabelledGraph) else g.graph
    labels, succ = base.labels, base.succ
    if labels.get(at) != family.head:
        return None
    arg, *params = succ[at]
    try:
        order = _unfolding_layout(family, labels, succ, arg)
    except UnfoldingError:
        return None
    rule = _unfolding_body(family, labels, succ, order)
    m = len(order)
    mapping = {k: v for k, v in enumerate(order)}
    mapping.update({2 * m + q: p for q, p in enumerate(params)})
    mapping[rule.left_root] = at
    return Redex(rule, mapping)


# -- redexes and strategies --------------------------------------------------


def redexes_at(g: AnyRooted, rs: RuleSet, v: int, check: bool = False) -> list[Redex]:
    lab = g.graph.labels.get(v)
    out = []
    fam = rs.family(lab)
    if fam is not None:
        rdx = unfolding_redex(fam, g, v)
        if rdx is not None:
            if check:
                _cross_check(rdx, g)
            out.append(rdx)
    for rule in rs.candidates(lab):
        phi = find_homomorphism(rule.pattern, g, v)
        if phi is not None:
            out.append(Redex(rule, phi))
    return out


def _cross_check(rdx: Redex, g: AnyRooted) -> None:
    phi = find_homomorphism(rdx.rule.pattern, g, rdx.root)
    if phi != rdx.mapping:
        log.warning("generic matching disagrees with the unfolding redex at %s", rdx.root)


def find_redexes(g: AnyRooted, rs: RuleSet, check: bool = False) -> list[Redex]:
    """All redexes of ``g``, by matched root in creation order."""
    heads = rs.heads
    labels = g.graph.labels
    out: list[Redex] = []
    for v in sorted(g.graph.succ):
        if labels[v] in heads:
            out.extend(redexes_at(g, rs, v, check))
    return out


def _tiebreak_key(g: AnyRooted, tiebreak: str):
    if tiebreak == "creation":
        return lambda r: r.root
    if tiebreak == "preorder":
        pre, _ = kernels.dfs_orders(g.graph.succ, g.roots)
        pos = {v: k for k, v in enumerate(pre)}
        return lambda r: pos.get(r.root, len(pos) + r.root)
    raise ValueError(f"unknown tie-break {tiebreak!r}")


def select_innermost(redexes: Sequence[Redex], g: AnyRooted, tiebreak: str = "preorder") -> Redex:
    """A redex with no other redex reachable from it by a non-empty path.

    Ties go to the leftmost candidate: first in depth-first preorder from the
    root (``tiebreak="preorder"``) or lowest vertex id (``"creation"``).
    """
    if not redexes:
        raise ValueError("no redexes to choose from")
    _, post = kernels.dfs_orders(g.graph.succ, g.roots)
    below = kernels.mark_below(g.graph.succ, post, {r.root for r in redexes})
    return min((r for r in redexes if r.root not in below), key=_tiebreak_key(g, tiebreak))


def select_outermost(redexes: Sequence[Redex], g: AnyRooted, tiebreak: str = "preorder") -> Redex:
    """A redex not reachable by a non-empty path from any other redex."""
    if not redexes:
        raise ValueError("no redexes to choose from")
    _, post = kernels.dfs_orders(g.graph.succ, g.roots)
    above = kernels.mark_above(g.graph.succ, post, {r.root for r in redexes})
    return min((r for r in redexes if r.root not in above), key=_tiebreak_key(g, tiebreak))


# -- firing -------------------------------------------------------------------


class _Workspace:
    """A privately owned, mutable copy of a term graph with parent sets."""

    def __init__(self, g: TermGraph):
        self.graph = g.graph.copy()
        self.root = g.root
        preds: dict[int, set[int]] = {v: set() for v in self.graph.succ}
        for v, children in self.graph.succ.items():
            for c in children:
                preds[c].add(v)
        self.preds = preds

    @property
    def roots(self) -> tuple[int, ...]:
        return (self.root,)

    def view(self) -> TermGraph:
        return TermGraph(self.graph, self.root)

    def snapshot(self) -> TermGraph:
        return TermGraph(self.graph.copy(), self.root)

    def add(self, label: Label | None, children: tuple[int, ...]) -> int:
        v = self.graph.add_vertex(label, children)
        self.preds[v] = set()
        for c in children:
            self.preds[c].add(v)
        return v

    def __len__(self) -> int:
        return len(self.graph.succ)


def _build(ws: _Workspace, redex: Redex) -> int:
    """Copy the right-only part of the rule into the host; return the copy of
    the right root (or its image, when the right root lies on the left side)."""
    rule, phi = redex.rule, redex.mapping
    body = rule.body
    copies: dict[int, int] = {}
    for u in rule.build_order:
        children = tuple(copies[c] if c in copies else phi[c] for c in body.succ[u])
        copies[u] = ws.add(body.labels[u], children)
    s = rule.right_root
    return copies[s] if s in copies else phi[s]


def _redirect(ws: _Workspace, old: int, new: int) -> None:
    kernels.redirect(ws.graph.succ, ws.preds, old, new)
    if ws.root == old:
        ws.root = new


def _collect(ws: _Workspace, old: int) -> int:
    if old == ws.root or ws.preds.get(old) or old not in ws.graph.succ:
        return 0
    return kernels.release(ws.graph.labels, ws.graph.succ, ws.preds, old, ws.root)


def _fire(ws: _Workspace, redex: Redex) -> int:
    target = _build(ws, redex)
    _redirect(ws, redex.root, target)
    _collect(ws, redex.root)
    return target


def fire(g: TermGraph, redex: Redex) -> TermGraph:
    """Fire ``redex`` in ``g``: build, redirect, collect garbage.  ``g`` is not modified."""
    ws = _Workspace(g)
    _fire(ws, redex)
    return ws.snapshot()


def fire_with_target(g: TermGraph, redex: Redex) -> tuple[TermGraph, int]:
    """Like :func:`fire`, also returning the vertex that replaced the redex root."""
    ws = _Workspace(g)
    target = _fire(ws, redex)
    return ws.snapshot(), target


def fire_phases(g: TermGraph, redex: Redex) -> tuple[TermGraph, TermGraph, TermGraph]:
    """The graphs after the build, redirection and garbage collection phases."""
    ws = _Workspace(g)
    target = _build(ws, redex)
    after_build = ws.snapshot()
    _redirect(ws, redex.root, target)
    after_redirect = ws.snapshot()
    _collect(ws, redex.root)
    return after_build, after_redirect, ws.snapshot()


# -- reduction driver --------------------------------------------------------


@dataclass(frozen=True)
class Limits:
    max_steps: int = 10**7
    max_size: int = 10**7


@dataclass
class Metrics:
    """Measurements of one reduction ``G = H_0 -> H_1 -> ... -> H_m``.

    ``size_trace[j-1]`` is the vertex count of ``H_j``; ``max_size`` also
    includes ``H_0``.
    """

    steps: int = 0
    size_trace: list[int] = field(default_factory=list)
    initial_size: int = 0
    initial_tier_sizes: dict[int, int] = field(default_factory=dict)
    tier_sizes_final: dict[int, int] = field(default_factory=dict)
    max_size: int = 0

    @property
    def final_size(self) -> int:
        return self.size_trace[-1] if self.size_trace else self.initial_size

    def as_dict(self) -> dict:
        return {
            "steps": self.steps,
            "max_size": self.max_size,
            "final_size": self.final_size,
            "tier_sizes": {str(k): v for k, v in self.tier_sizes_final.items()},
        }


class LimitExceeded(Exception):
    def __init__(self, message: str, metrics: Metrics):
        super().__init__(message)
        self.metrics = metrics


def step(
    g: TermGraph,
    rs: RuleSet,
    strategy: str = "innermost",
    seed: int | random.Random | None = 0,
) -> TermGraph | None:
    """One rewriting step under ``strategy``; None when ``g`` is a normal form."""
    redexes = find_redexes(g, rs)
    if not redexes:
        return None
    return fire(g, _choose(redexes, g, strategy, _rng(seed)))


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def _choose(redexes, g, strategy: str, rng: random.Random, tiebreak: str = "preorder") -> Redex:
    if strategy == "innermost":
        return select_innermost(redexes, g, tiebreak)
    if strategy == "outermost":
        return select_outermost(redexes, g, tiebreak)
    if strategy == "any":
        return redexes[rng.randrange(len(redexes))]
    raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


def normalize(
    g: TermGraph,
    rs: RuleSet,
    strategy: str = "innermost",
    limits: Limits = Limits(),
    seed: int | random.Random | None = 0,
    on_step: Callable[[dict], None] | None = None,
    engine: str = "auto",
    tiebreak: str = "preorder",
    check: bool = False,
) -> tuple[TermGraph, Metrics]:
    """Rewrite ``g`` to normal form.

    Innermost reduction uses a depth-first evaluator (``engine="auto"``) that
    fires each vertex only after its whole subgraph is redex-free; every step
    it takes is an innermost step.  ``engine="scan"`` instead rescans the
    graph for all redexes at every step and applies the selector, which is
    what the other strategies always do.  ``check`` re-validates the graph
    after every step.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    ws = _Workspace(g)
    metrics = Metrics(
        initial_size=len(ws),
        initial_tier_sizes=tier_sizes(g),
        max_size=len(ws),
    )

    def record(redex: Redex) -> None:
        metrics.steps += 1
        n = len(ws)
        metrics.size_trace.append(n)
        if n > metrics.max_size:
            metrics.max_size = n
        if on_step is not None:
            on_step({"step": metrics.steps, "rule": redex.rule.name, "root": redex.root, "size": n})
        if check:
            ws.graph.validate()
            if not is_proper(ws.view()):
                raise GraphError("firing left unreachable vertices")
        if metrics.steps > limits.max_steps:
            raise LimitExceeded(f"more than {limits.max_steps} steps", metrics)
        if n > limits.max_size:
            raise LimitExceeded(f"graph grew beyond {limits.max_size} vertices", metrics)

    if strategy == "innermost" and engine == "auto":
        _innermost(ws, rs, record, check)
    elif engine in ("auto", "scan"):
        rng = _rng(seed)
        while True:
            view = ws.view()
            redexes = find_redexes(view, rs, check)
            if not redexes:
                break
            redex = _choose(redexes, view, strategy, rng, tiebreak)
            _fire(ws, redex)
            record(redex)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    metrics.tier_sizes_final = tier_sizes(ws.graph)
    return ws.snapshot(), metrics


def _innermost(ws: _Workspace, rs: RuleSet, record, check: bool) -> None:
    succ = ws.graph.succ
    heads = rs.heads
    done: set[int] = set()
    stack = [[ws.root, 0]]
    while stack:
        frame = stack[-1]
        v, k = frame
        children = succ[v]
        if k < len(children):
            c = children[k]
            if c in done:
                frame[1] = k + 1
            else:
                stack.append([c, 0])
            continue
        redex = None
        if ws.graph.labels[v] in heads:
            found = redexes_at(ws.view(), rs, v, check)
            redex = found[0] if found else None
        if redex is None:
            done.add(v)
            stack.pop()
            continue
        target = _fire(ws, redex)
        record(redex)
        if target in done:
            stack.pop()
        else:
            frame[0], frame[1] = target, 0


# -- overlap -------------------------------------------------------------------


@dataclass
class Overlap:
    """Two rules that can match at the same vertex; ``witness`` is a graph
    where both do (None when it is not constructed, as for families)."""

    first: Rule | UnfoldingFamily
    second: Rule | UnfoldingFamily
    witness: TermGraph | None = None

    def __bool__(self) -> bool:
        return False


def check_non_overlapping(rs: RuleSet) -> bool | Overlap:
    """True when no two rules of ``rs`` can match at one vertex.

    Rules with different heads never overlap.  Two finite rules with the
    same head are unified; the most general common instance is the witness.
    A finite rule or a second family sharing a family's head is reported
    without a witness.
    """
    fam_heads: dict[Label, UnfoldingFamily] = {}
    for fam in rs.families:
        if fam.head in fam_heads:
            return Overlap(fam_heads[fam.head], fam)
        fam_heads[fam.head] = fam
    by_head: dict[Label, list[Rule]] = {}
    for rule in rs.rules:
        if rule.head in fam_heads:
            return Overlap(fam_heads[rule.head], rule)
        by_head.setdefault(rule.head, []).append(rule)
    for group in by_head.values():
        for a in range(len(group)):
            for b in range(a + 1, len(group)):
                w = unify_patterns(group[a].pattern, group[b].pattern)
                if w is not None:
                    return Overlap(group[a], group[b], w)
    return True


def unify_patterns(p: TermGraph, q: TermGraph) -> TermGraph | None:
    """The smallest graph in which both patterns match at the root, or None."""
    parent: dict = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def node(tag, v):
        g = p if tag == 0 else q
        return g.labels[v], [(tag, c) for c in g.succ[v]]

    # representative labelled member of each class
    shape: dict = {}
    for tag, g in ((0, p), (1, q)):
        for v in g.graph.succ:
            x = (tag, v)
            parent[x] = x
            if g.labels[v] is not None:
                shape[x] = x
    work = [((0, p.root), (1, q.root))]
    while work:
        x, y = work.pop()
        rx, ry = find(x), find(y)
        if rx == ry:
            continue
        sx, sy = shape.get(rx), shape.get(ry)
        parent[ry] = rx
        if sx is None:
            if sy is not None:
                shape[rx] = sy
            continue
        if sy is None:
            continue
        lx, cx = node(*sx)
        ly, cy = node(*sy)
        if lx != ly:
            return None
        work.extend(zip(cx, cy))
    # injectivity: a class may hold at most one labelled vertex of each pattern
    seen = set()
    for tag, g in ((0, p), (1, q)):
        for v, lab in g.labels.items():
            if lab is not None:
                key = (find((tag, v)), tag)
                if key in seen:
                    return None
                seen.add(key)
    order = sorted({find(x) for x in parent})
    ids = {c: k for k, c in enumerate(order)}
    labels, succ = {}, {}
    for c in order:
        s = shape.get(c)
        if s is None:
            labels[ids[c]], succ[ids[c]] = None, ()
        else:
            lab, children = node(*s)
            labels[ids[c]], succ[ids[c]] = lab, tuple(ids[find(ch)] for ch in children)
    out = LabelledGraph(labels, succ, len(order))
    try:
        out.validate()
    except GraphError:
        return None
    return properize(TermGraph(out, ids[find((0, p.root))]))
