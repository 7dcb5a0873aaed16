"""Free algebras, tiered recursive functions and a tree-level reference evaluator."""

from __future__ import annotations

import sys
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence, Union


class Label(NamedTuple):
    """A vertex label: a symbol with its arity and, for constructors, a tier.

    Defined-function symbols produced by the compiler carry ``tier=None``; so
    do plain (untiered) constructor symbols.
    """

    name: str
    arity: int
    tier: int | None = None

    def __str__(self) -> str:
        return self.name if self.tier is None else f"{self.name}^{self.tier}"


@dataclass(frozen=True)
class Signature:
    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple((str(n), int(a)) for n, a in self.symbols))
        seen = set()
        for name, arity in self.symbols:
            if name in seen:
                raise ValueError(f"duplicate symbol {name!r} in signature")
            if arity < 0:
                raise ValueError(f"negative arity for {name!r}")
            seen.add(name)
        object.__setattr__(self, "_index", {n: k for k, (n, _) in enumerate(self.symbols)})

    @classmethod
    def of(cls, **arities: int) -> "Signature":
        return cls(tuple(arities.items()))

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __iter__(self):
        return iter(self.symbols)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.symbols)

    def arity(self, name: str) -> int:
        return self.symbols[self._index[name]][1]

    def index(self, name: str) -> int:
        return self._index[name]

    def is_subsignature_of(self, other: "Signature") -> bool:
        return all(n in other and other.arity(n) == a for n, a in self.symbols)

    def tiered(self, tier: int) -> tuple[Label, ...]:
        """The slice of the tier-annotated signature at ``tier``."""
        return tuple(Label(n, a, tier) for n, a in self.symbols)

    def check_term(self, t: "Term") -> None:
        for node in t.nodes():
            if node.head not in self:
                raise ValueError(f"unknown symbol {node.head!r}")
            if len(node.children) != self.arity(node.head):
                raise ValueError(
                    f"{node.head!r} has arity {self.arity(node.head)}, got {len(node.children)} arguments"
                )


class Term:
    """An immutable first-order term; ``tier`` is set on tier-annotated terms.

    Terms built from a term graph may share Python objects, so the tree
    ``size`` can be exponentially larger than the memory they occupy.
    """

    __slots__ = ("head", "children", "tier", "size", "_hash")

    def __init__(self, head: str, children: Sequence["Term"] = (), tier: int | None = None):
        self.head = head
        self.children = tuple(children)
        self.tier = tier
        self.size = 1 + sum(c.size for c in self.children)
        self._hash = hash((head, tier, tuple(c._hash for c in self.children)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Term):
            return NotImplemented
        stack = [(self, other)]
        seen = set()
        while stack:
            a, b = stack.pop()
            if a is b or (id(a), id(b)) in seen:
                continue
            if (
                a._hash != b._hash
                or a.head != b.head
                or a.tier != b.tier
                or len(a.children) != len(b.children)
            ):
                return False
            seen.add((id(a), id(b)))
            stack.extend(zip(a.children, b.children))
        return True

    def nodes(self):
        """Distinct node objects, parents before children."""
        seen = set()
        stack = [self]
        while stack:
            t = stack.pop()
            if id(t) in seen:
                continue
            seen.add(id(t))
            yield t
            stack.extend(reversed(t.children))

    def __repr__(self) -> str:
        return f"Term({format_term(self)!r})"

    def __str__(self) -> str:
        return format_term(self)


def format_term(t: Term, tiers: bool = True) -> str:
    out: list[str] = []
    stack: list[Union[Term, str]] = [t]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        head = item.head if item.tier is None or not tiers else f"{item.head}^{item.tier}"
        out.append(head)
        if item.children:
            stack.append(")")
            for k, c in enumerate(reversed(item.children)):
                stack.append(c)
                if k < len(item.children) - 1:
                    stack.append(",")
            stack.append("(")
    return "".join(out)


def term(head: str, *children: Term) -> Term:
    return Term(head, children)


def numeral(k: int, zero: str = "z", succ: str = "s", tier: int | None = None) -> Term:
    t = Term(zero, (), tier)
    for _ in range(k):
        t = Term(succ, (t,), tier)
    return t


def tier_annotate(t: Term, tier: int) -> Term:
    """Label every symbol of ``t`` with ``tier``; shared subterm objects stay shared."""
    return _relabel(t, tier)


def erase(t: Term) -> Term:
    return _relabel(t, None)


def _relabel(t: Term, tier: int | None) -> Term:
    memo: dict[int, Term] = {}
    for node in reversed(list(t.nodes())):
        memo[id(node)] = Term(node.head, [memo[id(c)] for c in node.children], tier)
    return memo[id(t)]


# -- tiered functions -------------------------------------------------------


@dataclass(frozen=True)
class TierSig:
    inputs: tuple[int, ...]
    output: int

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(int(i) for i in self.inputs))

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.inputs)) + f")->{self.output}"

    @classmethod
    def parse(cls, text: str) -> "TierSig":
        left, _, right = text.replace(" ", "").partition("->")
        if not (left.startswith("(") and left.endswith(")")) or not right:
            raise ValueError(f"bad tier signature {text!r}")
        inner = left[1:-1]
        return cls(tuple(int(x) for x in inner.split(",")) if inner else (), int(right))


def tiers(text: str) -> TierSig:
    return TierSig.parse(text)


@dataclass(frozen=True)
class Id:
    sig: TierSig | None = None


@dataclass(frozen=True)
class Constr:
    symbol: str
    sig: TierSig | None = None


@dataclass(frozen=True)
class Proj:
    n: int
    m: int
    sig: TierSig | None = None


@dataclass(frozen=True)
class Comp:
    outer: "TieredFn"
    inners: tuple["TieredFn", ...]
    sig: TierSig | None = None

    def __post_init__(self):
        object.__setattr__(self, "inners", tuple(self.inners))


@dataclass(frozen=True)
class Rec:
    branches: tuple["TieredFn", ...]
    sig: TierSig | None = None

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))


@dataclass(frozen=True)
class Cond:
    branches: tuple["TieredFn", ...]
    sig: TierSig | None = None

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))


TieredFn = Union[Id, Constr, Proj, Comp, Rec, Cond]

KIND = {Id: "id", Constr: "con", Proj: "proj", Comp: "comp", Rec: "rec", Cond: "cond"}


def kind(f: TieredFn) -> str:
    return KIND[type(f)]


class TierError(Exception):
    """A tiered-recursion formation rule is violated.

    ``kind`` is one of ``"mismatch"``, ``"predicativity"``, ``"arity"``,
    ``"missing"`` or ``"undetermined"``; ``path`` locates the AST node.
    """

    def __init__(self, path: Sequence[str], kind: str, message: str):
        self.path = tuple(path)
        self.kind = kind
        self.message = message
        super().__init__(f"{'/'.join(self.path) or '<root>'}: {kind}: {message}")


def _branch_sig(sig: Signature, k: int, j: int, i: int, params: tuple[int, ...], rec: bool) -> TierSig:
    ar = sig.symbols[k][1]
    head = (j,) * ar + ((i,) * ar if rec else ())
    return TierSig(head + params, i)


def check_tiers(f: TieredFn, signature: Signature) -> TierSig:
    """Check every node against its formation rule and return the root's tiers.

    All nodes must carry a declared :class:`TierSig` (see :func:`annotate`).
    """
    _check(f, signature, ["root"])
    return f.sig


def _check(f: TieredFn, sig: Signature, path: list[str]) -> None:
    s = f.sig
    if s is None:
        raise TierError(path, "missing", f"{kind(f)} node has no declared tiers")
    ins, out = s.inputs, s.output
    if isinstance(f, Id):
        if len(ins) != 1:
            raise TierError(path, "arity", f"id takes one argument, declared {s}")
        if ins[0] != out:
            raise TierError(path, "mismatch", f"id must have tiers i->i, declared {s}")
    elif isinstance(f, Constr):
        if f.symbol not in sig:
            raise TierError(path, "arity", f"unknown constructor {f.symbol!r}")
        if len(ins) != sig.arity(f.symbol):
            raise TierError(path, "arity", f"con {f.symbol} has arity {sig.arity(f.symbol)}, declared {s}")
        if any(i != out for i in ins):
            raise TierError(path, "mismatch", f"con {f.symbol} must have tiers (i,...,i)->i, declared {s}")
    elif isinstance(f, Proj):
        if len(ins) != f.n or not 1 <= f.m <= f.n:
            raise TierError(path, "arity", f"proj {f.n} {f.m} declared {s}")
        if ins[f.m - 1] != out:
            raise TierError(path, "mismatch", f"proj {f.n} {f.m} needs input {f.m} at tier {out}, declared {s}")
    elif isinstance(f, Comp):
        osig = f.outer.sig
        if osig is None:
            raise TierError(path + ["outer"], "missing", "outer function has no declared tiers")
        if len(osig.inputs) != len(f.inners):
            raise TierError(path, "arity", f"outer takes {len(osig.inputs)} arguments, {len(f.inners)} given")
        if osig.output != out:
            raise TierError(path + ["outer"], "mismatch", f"outer returns tier {osig.output}, comp declared {s}")
        for k, g in enumerate(f.inners):
            p = path + [f"inner{k + 1}"]
            if g.sig is None:
                raise TierError(p, "missing", "inner function has no declared tiers")
            if g.sig.inputs != ins:
                raise TierError(p, "mismatch", f"inner inputs {g.sig} differ from comp inputs {s}")
            if g.sig.output != osig.inputs[k]:
                raise TierError(p, "mismatch", f"inner returns {g.sig.output}, outer expects {osig.inputs[k]}")
        _check(f.outer, sig, path + ["outer"])
        for k, g in enumerate(f.inners):
            _check(g, sig, path + [f"inner{k + 1}"])
    elif isinstance(f, (Rec, Cond)):
        name = kind(f)
        if len(ins) < 1:
            raise TierError(path, "arity", f"{name} needs a recurrence argument, declared {s}")
        if len(f.branches) != len(sig):
            raise TierError(path, "arity", f"{name} needs {len(sig)} branches, got {len(f.branches)}")
        j, params = ins[0], ins[1:]
        if isinstance(f, Rec) and not out < j:
            raise TierError(path, "predicativity", f"recurrence tier {j} must exceed result tier {out}")
        for k, g in enumerate(f.branches):
            p = path + [sig.symbols[k][0]]
            want = _branch_sig(sig, k, j, out, params, isinstance(f, Rec))
            if g.sig is None:
                raise TierError(p, "missing", "branch has no declared tiers")
            if g.sig != want:
                raise TierError(p, "mismatch", f"branch declared {g.sig}, expected {want}")
            _check(g, sig, p)
    else:  # pragma: no cover
        raise TypeError(f"not a tiered function: {f!r}")


def annotate(f: TieredFn, sig: TierSig, signature: Signature, path: Sequence[str] = ("root",)) -> TieredFn:
    """Fill in undeclared node tiers that the formation rules force.

    Nothing is guessed: a composition argument whose tier is not fixed by an
    explicit declaration, a projection/identity/constructor, or the outer
    function raises :class:`TierError` with kind ``"undetermined"``.
    """
    path = list(path)
    if f.sig is not None and f.sig != sig:
        raise TierError(path, "mismatch", f"declared {f.sig}, context requires {sig}")
    if isinstance(f, (Id, Constr, Proj)):
        return replace(f, sig=sig)
    if isinstance(f, Comp):
        outputs = []
        for k, g in enumerate(f.inners):
            t = _forced_output(g, sig.inputs)
            if t is None:
                t = _forced_outer_input(f.outer, k, sig.output)
            if t is None:
                raise TierError(path + [f"inner{k + 1}"], "undetermined", "result tier is not fixed; annotate it")
            outputs.append(t)
        outer = annotate(f.outer, TierSig(tuple(outputs), sig.output), signature, path + ["outer"])
        inners = tuple(
            annotate(g, TierSig(sig.inputs, outputs[k]), signature, path + [f"inner{k + 1}"])
            for k, g in enumerate(f.inners)
        )
        return Comp(outer, inners, sig)
    if isinstance(f, (Rec, Cond)):
        if not sig.inputs:
            raise TierError(path, "arity", f"{kind(f)} needs a recurrence argument, declared {sig}")
        if len(f.branches) != len(signature):
            raise TierError(path, "arity", f"{kind(f)} needs {len(signature)} branches, got {len(f.branches)}")
        j, params = sig.inputs[0], sig.inputs[1:]
        branches = tuple(
            annotate(
                g,
                _branch_sig(signature, k, j, sig.output, params, isinstance(f, Rec)),
                signature,
                path + [signature.symbols[k][0]],
            )
            for k, g in enumerate(f.branches)
        )
        return type(f)(branches, sig)
    raise TypeError(f"not a tiered function: {f!r}")  # pragma: no cover


def _forced_output(g: TieredFn, inputs: tuple[int, ...]) -> int | None:
    if g.sig is not None:
        return g.sig.output
    if isinstance(g, Id):
        return inputs[0] if len(inputs) == 1 else None
    if isinstance(g, Proj):
        return inputs[g.m - 1] if g.n == len(inputs) and 1 <= g.m <= g.n else None
    if isinstance(g, Constr):
        return inputs[0] if inputs and len(set(inputs)) == 1 else None
    if isinstance(g, Comp):
        outs = [_forced_output(h, inputs) for h in g.inners]
        if g.outer.sig is not None:
            return g.outer.sig.output
        if any(o is None for o in outs):
            return None
        return _forced_output(g.outer, tuple(outs))
    return None


def _forced_outer_input(outer: TieredFn, k: int, out: int) -> int | None:
    if outer.sig is not None:
        return outer.sig.inputs[k] if k < len(outer.sig.inputs) else None
    if isinstance(outer, (Id, Constr)):
        return out
    if isinstance(outer, Proj) and k == outer.m - 1:
        return out
    return None


def fn_arity(f: TieredFn, signature: Signature) -> int:
    if f.sig is not None:
        return len(f.sig.inputs)
    if isinstance(f, Id):
        return 1
    if isinstance(f, Constr):
        return signature.arity(f.symbol)
    if isinstance(f, Proj):
        return f.n
    raise ValueError("arity of an unannotated composite function is not fixed")


# -- reference evaluator ----------------------------------------------------


@dataclass(frozen=True)
class Budget:
    """Limits for :func:`eval_term`: largest term built and number of calls."""

    max_nodes: int = 10**6
    max_steps: int = 10**7


class BudgetExceeded(Exception):
    pass


def eval_term(f: TieredFn, args: Sequence[Term], signature: Signature, budget: Budget = Budget()) -> Term:
    """Evaluate ``f`` on plain terms by its defining equations, without sharing.

    Tier annotations on ``f`` are ignored; ``args`` must be untiered terms.
    """
    ev = _Evaluator(signature, budget)
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20000))
    try:
        return ev.apply(f, list(args))
    except RecursionError:
        raise BudgetExceeded("recursion too deep for the reference evaluator") from None
    finally:
        sys.setrecursionlimit(old)


class _Evaluator:
    def __init__(self, signature: Signature, budget: Budget):
        self.sig = signature
        self.budget = budget
        self.steps = 0

    def make(self, head: str, children: list[Term]) -> Term:
        size = 1 + sum(c.size for c in children)
        if size > self.budget.max_nodes:
            raise BudgetExceeded(f"term of {size} nodes exceeds budget {self.budget.max_nodes}")
        return Term(head, children)

    def apply(self, f: TieredFn, args: list[Term]) -> Term:
        self.steps += 1
        if self.steps > self.budget.max_steps:
            raise BudgetExceeded(f"more than {self.budget.max_steps} evaluation steps")
        if isinstance(f, Id):
            return args[0]
        if isinstance(f, Constr):
            return self.make(f.symbol, args)
        if isinstance(f, Proj):
            return args[f.m - 1]
        if isinstance(f, Comp):
            vals = [self.apply(g, args) for g in f.inners]
            return self.apply(f.outer, vals)
        head, params = args[0], args[1:]
        k = self.sig.index(head.head)
        children = list(head.children)
        if isinstance(f, Rec):
            recursive = [self.apply(f, [c, *params]) for c in children]
            return self.apply(f.branches[k], children + recursive + params)
        if isinstance(f, Cond):
            return self.apply(f.branches[k], children + params)
        raise TypeError(f"not a tiered function: {f!r}")  # pragma: no cover
