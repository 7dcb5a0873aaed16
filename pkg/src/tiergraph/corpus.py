"""The bundled example programs and input families for them."""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .algebra import Signature, Term, numeral
from .compile import CompiledProgram, compile_program, sized_call_graph
from .dsl import Program, parse
from .generators import random_term
from .graph import TermGraph


@lru_cache(maxsize=None)
def load(name: str) -> Program:
    """Parse ``programs/<name>.tg``."""
    return parse(resources.files(__package__).joinpath("programs").joinpath(f"{name}.tg").read_text("utf-8"))


def program_path(name: str) -> str:
    return str(resources.files(__package__).joinpath("programs").joinpath(f"{name}.tg"))


@dataclass(frozen=True)
class Example:
    file: str
    fn: str
    depth: int = 5  # height of random tree inputs for oracle comparisons

    @property
    def program(self) -> Program:
        return load(self.file)

    @property
    def signature(self) -> Signature:
        return self.program.signature_of(self.fn)

    def compiled(self) -> CompiledProgram:
        return _compiled(self.file, self.fn)

    def random_args(self, rng: random.Random) -> list[Term]:
        p = self.compiled()
        return [random_term(self.signature, rng, rng.randint(0, self.depth)) for _ in range(p.arity)]

    def sized_graph(self, n: int, seed: int = 0) -> TermGraph:
        """A call graph with about ``n`` vertices (arguments split evenly)."""
        return sized_call_graph(self.compiled(), n, seed)


@lru_cache(maxsize=None)
def _compiled(file: str, fn: str) -> CompiledProgram:
    fd = load(file).functions[fn]
    if fd.error is not None:
        raise fd.error
    return compile_program(fd.fn, fd.sig, load(file).signatures[fd.signature], fn)


CORPUS: dict[str, Example] = {
    "sum": Example("nat", "sum", 8),
    "double": Example("nat", "double", 8),
    "mult": Example("nat", "mult", 6),
    "add3": Example("nat", "add3", 8),
    "pred": Example("nat", "pred", 8),
    "flip": Example("nat", "flip", 8),
    "parity": Example("nat", "parity", 8),
    "choose": Example("nat", "choose", 6),
    "pick": Example("nat", "pick", 8),
    "mirror": Example("tree", "mirror", 6),
    "mirror2": Example("tree", "mirror2", 6),
    "leftmost": Example("tree", "leftmost", 6),
    "append": Example("words", "append", 10),
    "swap": Example("words", "swap", 10),
    "fulltree": Example("fulltree", "fulltree", 6),
    "recolour": Example("colours", "recolour", 5),
}


def word(bits: str) -> Term:
    """``"ab"`` -> ``a(b(e))``."""
    t = Term("e")
    for c in reversed(bits):
        t = Term(c, (t,))
    return t


def nat(k: int) -> Term:
    return numeral(k)
