"""Translation of tiered recursive functions into graph rewriting systems."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .algebra import (
    Comp,
    Cond,
    Constr,
    Id,
    Label,
    Proj,
    Rec,
    Signature,
    Term,
    TieredFn,
    TierSig,
    annotate,
    check_tiers,
    kind,
    tier_annotate,
)
from .generators import random_dag_term
from .graph import LabelledGraph, TermGraph, add_term
from .rewrite import Limits, Metrics, Rule, RuleSet, UnfoldingFamily, normalize


class CompileError(ValueError):
    pass


@dataclass
class CompiledProgram:
    ruleset: RuleSet
    entry: Label
    tiersig: TierSig
    signature: Signature
    fn: TieredFn
    symbol_table: dict = field(default_factory=dict)

    @property
    def arity(self) -> int:
        return len(self.tiersig.inputs)


def compile_program(
    f: TieredFn, tiersig: TierSig | None, signature: Signature, name: str = "main"
) -> CompiledProgram:
    """Compile ``f`` at ``tiersig`` into a rule set over tier-annotated symbols.

    Undeclared inner tiers are filled in where forced; ``check_tiers`` must
    then accept the whole tree.
    """
    if tiersig is not None and f.sig != tiersig:
        f = annotate(f, tiersig, signature)
    sig = check_tiers(f, signature)
    c = _Compiler(signature)
    entry = c.symbol(f, name)
    return CompiledProgram(RuleSet(c.rules, c.families), entry, sig, signature, f, c.table)


class _Compiler:
    def __init__(self, signature: Signature):
        self.sig = signature
        self.table: dict[TieredFn, Label] = {}
        self.names: set[str] = set()
        self.rules: list[Rule] = []
        self.families: list[UnfoldingFamily] = []

    def symbol(self, f: TieredFn, path: str) -> Label:
        lab = self.table.get(f)
        if lab is not None:
            return lab
        name = f"{path}#{kind(f)}@{f.sig}"
        if name in self.names:
            raise CompileError(f"symbol name collision: {name}")
        self.names.add(name)
        lab = self.table[f] = Label(name, len(f.sig.inputs), None)
        self._emit(f, lab, path)
        return lab

    def _emit(self, f: TieredFn, head: Label, path: str) -> None:
        n = head.arity
        out = f.sig.output
        if isinstance(f, Rec):
            steps = tuple(self.symbol(g, f"{path}/{c}") for g, (c, _) in zip(f.branches, self.sig))
            self.families.append(UnfoldingFamily(head, self.sig, f.sig.inputs[0], steps))
            return
        if isinstance(f, Cond):
            j = f.sig.inputs[0]
            for g, (c, ar) in zip(f.branches, self.sig):
                branch = self.symbol(g, f"{path}/{c}")
                b = LabelledGraph()
                zs = [b.add_vertex(None) for _ in range(ar)]
                xs = [b.add_vertex(None) for _ in range(n - 1)]
                con = b.add_vertex(Label(c, ar, j), zs)
                y = b.add_vertex(head, [con, *xs])
                s = b.add_vertex(branch, [*zs, *xs])
                self.rules.append(Rule(b, y, s, name=f"{head.name}:{c}"))
            return
        b = LabelledGraph()
        xs = [b.add_vertex(None) for _ in range(n)]
        y = b.add_vertex(head, xs)
        if isinstance(f, Id):
            s = xs[0]
        elif isinstance(f, Proj):
            s = xs[f.m - 1]
        elif isinstance(f, Constr):
            s = b.add_vertex(Label(f.symbol, n, out), xs)
        elif isinstance(f, Comp):
            outer = self.symbol(f.outer, f"{path}/outer")
            inners = [self.symbol(g, f"{path}/inner{k + 1}") for k, g in enumerate(f.inners)]
            s = b.add_vertex(outer, [b.add_vertex(g, xs) for g in inners])
        else:  # pragma: no cover
            raise TypeError(f"not a tiered function: {f!r}")
        self.rules.append(Rule(b, y, s, name=head.name))


def build_call_graph(
    p: CompiledProgram, args: Sequence[Term], share: bool = True, share_args: bool = True
) -> TermGraph:
    """The graph ``entry(t_1^{i_1}, ..., t_n^{i_n})`` with hash-consed arguments.

    ``share=False`` builds every argument as a tree; ``share_args=False``
    keeps equal arguments in different positions apart.
    """
    if len(args) != p.arity:
        raise CompileError(f"{p.entry.name} takes {p.arity} arguments, {len(args)} given")
    g = LabelledGraph()
    table: dict = {}
    roots = []
    for t, tier in zip(args, p.tiersig.inputs):
        p.signature.check_term(t)
        roots.append(add_term(g, tier_annotate(t, tier), share, table if share_args else {}))
    return TermGraph(g, g.add_vertex(p.entry, roots))


def run(
    p: CompiledProgram,
    args: Sequence[Term],
    limits: Limits = Limits(),
    share: bool = True,
    **kwargs,
) -> tuple[TermGraph, Metrics]:
    """Reduce the call graph of ``p`` on ``args`` innermost to normal form."""
    g = build_call_graph(p, args, share=share)
    kwargs.setdefault("strategy", "innermost")
    return normalize(g, p.ruleset, limits=limits, **kwargs)


def sized_call_graph(p: CompiledProgram, n: int, seed: int = 0) -> TermGraph:
    """A call graph of at least ``n`` vertices built from random shared arguments.

    The argument budget is split evenly; when equal-tier arguments share
    vertices the budget is raised until the graph reaches ``n`` vertices.
    """
    k = p.arity
    budget = max(n - 1, k)
    for _ in range(64):
        rng = random.Random(seed * 7919 + n)
        sizes = [budget // k + (1 if j < budget % k else 0) for j in range(k)]
        g = build_call_graph(p, [random_dag_term(p.signature, rng, max(s, 1)) for s in sizes])
        if len(g) >= n:
            return g
        budget += n - len(g)
    return g
