"""The ``.tg`` program format.

::

    sig nat { z:0, s:1 }
    fn sum @ (1,0)->0 = rec{ z => proj 1 1, s => comp(con s; proj 3 2) }
    term three = s(s(s(z)))

Every ``fn`` uses the most recent ``sig``.  Any expression may carry its own
``@ (..)->i`` annotation; tiers left out are filled in only where the
formation rules force them.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .algebra import (
    Comp,
    Cond,
    Constr,
    Id,
    Proj,
    Rec,
    Signature,
    Term,
    TieredFn,
    TierError,
    TierSig,
    annotate,
)

KEYWORDS = {"sig", "fn", "term", "id", "con", "proj", "comp", "rec", "cond"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>->|=>|[{}(),;:@=])
    """,
    re.VERBOSE,
)


class ParseError(Exception):
    def __init__(self, line: int, column: int, message: str):
        self.line, self.column, self.message = line, column, message
        super().__init__(f"{line}:{column}: {message}")


@dataclass(frozen=True)
class Ref:
    """A reference to a named function inside an expression."""

    name: str
    sig: TierSig | None = None


@dataclass
class FnDef:
    name: str
    sig: TierSig
    signature: str
    expr: object  # surface tree: TieredFn nodes plus Ref
    fn: TieredFn | None = None  # references resolved, tiers filled in
    error: TierError | None = None


@dataclass
class Program:
    signatures: dict[str, Signature] = field(default_factory=dict)
    functions: dict[str, FnDef] = field(default_factory=dict)
    terms: dict[str, Term] = field(default_factory=dict)

    def signature_of(self, fn: str) -> Signature:
        return self.signatures[self.functions[fn].signature]

    def resolve_term(self, text: str, signature: Signature | None = None) -> Term:
        """Parse ``text`` as a term, or look it up as a named term constant."""
        text = text.strip()
        if text in self.terms:
            return self.terms[text]
        t = parse_term(text)
        if signature is not None:
            signature.check_term(t)
        return t


class _Tokens:
    def __init__(self, src: str):
        self.toks: list[tuple[str, str, int, int]] = []
        line, start, pos = 1, 0, 0
        while pos < len(src):
            m = _TOKEN.match(src, pos)
            if m is None:
                raise ParseError(line, pos - start + 1, f"unexpected character {src[pos]!r}")
            kind = m.lastgroup
            if kind == "nl":
                line, start = line + 1, m.end()
            elif kind != "ws":
                self.toks.append((kind, m.group(), line, pos - start + 1))
            pos = m.end()
        self.toks.append(("eof", "", line, pos - start + 1))
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        tok = self.toks[self.i]
        self.i = min(self.i + 1, len(self.toks) - 1)
        return tok

    def error(self, message: str, tok=None) -> ParseError:
        _, _, line, col = tok or self.peek()
        return ParseError(line, col, message)

    def expect(self, value: str):
        tok = self.next()
        if tok[1] != value or tok[0] == "eof":
            raise self.error(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok)
        return tok

    def accept(self, value: str) -> bool:
        if self.peek()[1] == value and self.peek()[0] != "eof":
            self.next()
            return True
        return False

    def name(self, what: str = "a name") -> str:
        tok = self.next()
        if tok[0] != "name":
            raise self.error(f"expected {what}, found {tok[1] or 'end of input'!r}", tok)
        return tok[1]

    def number(self) -> int:
        tok = self.next()
        if tok[0] != "num":
            raise self.error(f"expected a number, found {tok[1] or 'end of input'!r}", tok)
        return int(tok[1])


def parse(src: str) -> Program:
    """Parse a program; references are resolved and tiers checked for shape.

    Raises :class:`ParseError` for syntax and name errors and for tiers that
    cannot be filled in.  Other tier errors are recorded on the ``FnDef``.
    """
    ts = _Tokens(src)
    prog = Program()
    current: str | None = None
    while ts.peek()[0] != "eof":
        tok = ts.peek()
        if ts.accept("sig"):
            name = ts.name("a signature name")
            prog.signatures[name] = _signature(ts)
            current = name
        elif ts.accept("fn"):
            name_tok = ts.peek()
            name = ts.name("a function name")
            if name in KEYWORDS:
                raise ts.error(f"{name!r} is a keyword", name_tok)
            if name in prog.functions:
                raise ts.error(f"function {name!r} is defined twice", name_tok)
            if current is None:
                raise ts.error("fn before any sig declaration", tok)
            ts.expect("@")
            sig = _tiersig(ts)
            ts.expect("=")
            sigobj = prog.signatures[current]
            expr = _expr(ts, sigobj, prog)
            fd = FnDef(name, sig, current, expr)
            try:
                fd.fn = annotate(_resolve(expr, prog), sig, sigobj, (name,))
            except TierError as e:
                if e.kind == "undetermined":
                    raise ParseError(name_tok[2], name_tok[3], str(e)) from None
                fd.error = e
                fd.fn = replace(_resolve(expr, prog, strict=False), sig=sig)
            prog.functions[name] = fd
        elif ts.accept("term"):
            name = ts.name("a term name")
            ts.expect("=")
            prog.terms[name] = _term(ts)
        else:
            raise ts.error(f"expected 'sig', 'fn' or 'term', found {tok[1]!r}")
    return prog


def _signature(ts: _Tokens) -> Signature:
    ts.expect("{")
    symbols = []
    if not ts.accept("}"):
        while True:
            tok = ts.peek()
            sym = ts.name("a constructor name")
            if sym in KEYWORDS:
                raise ts.error(f"{sym!r} is a keyword", tok)
            if any(sym == s for s, _ in symbols):
                raise ts.error(f"duplicate constructor {sym!r}", tok)
            ts.expect(":")
            symbols.append((sym, ts.number()))
            if ts.accept("}"):
                break
            ts.expect(",")
    return Signature(tuple(symbols))


def _tiersig(ts: _Tokens) -> TierSig:
    ts.expect("(")
    ins = []
    if not ts.accept(")"):
        ins.append(ts.number())
        while ts.accept(","):
            ins.append(ts.number())
        ts.expect(")")
    ts.expect("->")
    return TierSig(tuple(ins), ts.number())


def _expr(ts: _Tokens, sig: Signature, prog: Program):
    tok = ts.peek()
    word = ts.name("an expression")
    if word == "id":
        e = Id()
    elif word == "con":
        ctok = ts.peek()
        sym = ts.name("a constructor name")
        if sym not in sig:
            raise ts.error(f"unknown constructor {sym!r}", ctok)
        e = Constr(sym)
    elif word == "proj":
        ptok = ts.peek()
        n, m = ts.number(), ts.number()
        if not 1 <= m <= n:
            raise ts.error(f"proj {n} {m}: need 1 <= m <= n", ptok)
        e = Proj(n, m)
    elif word == "comp":
        ts.expect("(")
        outer = _expr(ts, sig, prog)
        ts.expect(";")
        inners = []
        if not ts.accept(")"):
            inners.append(_expr(ts, sig, prog))
            while ts.accept(","):
                inners.append(_expr(ts, sig, prog))
            ts.expect(")")
        e = Comp(outer, tuple(inners))
    elif word in ("rec", "cond"):
        e = _branches(ts, sig, prog, Rec if word == "rec" else Cond)
    elif word in prog.functions:
        e = Ref(word)
    else:
        raise ts.error(f"unknown function {word!r}", tok)
    if ts.accept("@"):
        e = replace(e, sig=_tiersig(ts))
    return e


def _branches(ts: _Tokens, sig: Signature, prog: Program, cls):
    open_tok = ts.expect("{")
    got: dict[str, object] = {}
    if not ts.accept("}"):
        while True:
            tok = ts.peek()
            sym = ts.name("a constructor name")
            if sym not in sig:
                raise ts.error(f"unknown constructor {sym!r}", tok)
            if sym in got:
                raise ts.error(f"duplicate branch for {sym!r}", tok)
            ts.expect("=>")
            got[sym] = _expr(ts, sig, prog)
            if ts.accept("}"):
                break
            ts.expect(",")
    missing = [s for s in sig.names if s not in got]
    if missing:
        raise ts.error(f"missing branch for constructor {missing[0]!r}", open_tok)
    return cls(tuple(got[s] for s in sig.names))


def _resolve(e, prog: Program, strict: bool = True) -> TieredFn:
    """Inline references.  ``strict=False`` skips the checks, to keep a
    best-effort tree next to a recorded error."""
    if isinstance(e, Ref):
        target = prog.functions[e.name]
        if strict and target.error is not None:
            err = target.error
            raise TierError([e.name, *err.path], err.kind, err.message)
        if strict and e.sig is not None and e.sig != target.fn.sig:
            raise TierError([e.name], "mismatch", f"{e.name} is declared {target.fn.sig}, used at {e.sig}")
        return target.fn
    if isinstance(e, Comp):
        return Comp(
            _resolve(e.outer, prog, strict), tuple(_resolve(g, prog, strict) for g in e.inners), e.sig
        )
    if isinstance(e, (Rec, Cond)):
        return type(e)(tuple(_resolve(g, prog, strict) for g in e.branches), e.sig)
    return e


def _term(ts: _Tokens) -> Term:
    head = ts.name("a symbol")
    children = []
    if ts.accept("("):
        if not ts.accept(")"):
            children.append(_term(ts))
            while ts.accept(","):
                children.append(_term(ts))
            ts.expect(")")
    return Term(head, children)


def parse_term(text: str) -> Term:
    """Parse ``s(s(z))``-style terms (no tiers)."""
    ts = _Tokens(text)
    # iterative to allow very deep terms
    stack: list[tuple[str, list]] = []
    result = None
    while True:
        tok = ts.peek()
        head = ts.name("a symbol")
        if ts.accept("("):
            if ts.accept(")"):
                node = Term(head, ())
            else:
                stack.append((head, []))
                continue
        else:
            node = Term(head, ())
        while True:
            if not stack:
                result = node
                break
            stack[-1][1].append(node)
            if ts.accept(","):
                break
            ts.expect(")")
            h, cs = stack.pop()
            node = Term(h, cs)
        if result is not None:
            break
    if ts.peek()[0] != "eof":
        raise ts.error(f"unexpected {ts.peek()[1]!r} after term")
    return result


# -- printing ------------------------------------------------------------------


def format_expr(e) -> str:
    if isinstance(e, Ref):
        s = e.name
    elif isinstance(e, Id):
        s = "id"
    elif isinstance(e, Constr):
        s = f"con {e.symbol}"
    elif isinstance(e, Proj):
        s = f"proj {e.n} {e.m}"
    elif isinstance(e, Comp):
        s = f"comp({format_expr(e.outer)}; {', '.join(format_expr(g) for g in e.inners)})"
    else:
        raise TypeError(e)
    return s if e.sig is None else f"{s} @ {e.sig}"


def _format_branches(e, sig: Signature, indent: str) -> str:
    word = "rec" if isinstance(e, Rec) else "cond"
    inner = indent + "  "
    lines = [f"{inner}{c} => {_format(g, sig, inner)}" for g, (c, _) in zip(e.branches, sig)]
    s = f"{word}{{\n" + ",\n".join(lines) + f"\n{indent}}}"
    return s if e.sig is None else f"{s} @ {e.sig}"


def _format(e, sig: Signature, indent: str = "") -> str:
    if isinstance(e, (Rec, Cond)):
        return _format_branches(e, sig, indent)
    if isinstance(e, Comp) and _has_branches(e):
        inner = indent + "  "
        parts = [_format(e.outer, sig, inner)] + [_format(g, sig, inner) for g in e.inners]
        s = f"comp(\n{inner}{parts[0]};\n" + ",\n".join(inner + p for p in parts[1:]) + f"\n{indent})"
        return s if e.sig is None else f"{s} @ {e.sig}"
    return format_expr(e)


def _has_branches(e) -> bool:
    if isinstance(e, (Rec, Cond)):
        return True
    if isinstance(e, Comp):
        return _has_branches(e.outer) or any(_has_branches(g) for g in e.inners)
    return False


def format_program(prog: Program) -> str:
    out = []
    by_sig: dict[str, list[FnDef]] = {}
    for fd in prog.functions.values():
        by_sig.setdefault(fd.signature, []).append(fd)
    for name, sig in prog.signatures.items():
        syms = ", ".join(f"{n}:{a}" for n, a in sig)
        out.append(f"sig {name} {{ {syms} }}")
        for fd in by_sig.get(name, []):
            out.append(f"fn {fd.name} @ {fd.sig} = {_format(fd.expr, sig)}")
        out.append("")
    for name, t in prog.terms.items():
        out.append(f"term {name} = {t}")
    return "\n".join(out).rstrip() + "\n"
