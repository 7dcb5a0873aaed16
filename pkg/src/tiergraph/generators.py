"""Random inputs: bounded-depth trees and exactly sized shared DAGs."""

from __future__ import annotations

import random

from .algebra import Signature, Term


def random_term(sig: Signature, rng: random.Random, depth: int) -> Term:
    """A random tree of height at most ``depth`` (leaves are nullary symbols)."""
    leaves = [n for n, a in sig if a == 0]
    if not leaves:
        raise ValueError("signature has no nullary constructor")
    if depth <= 0:
        return Term(rng.choice(leaves))
    name, ar = rng.choice(sig.symbols)
    return Term(name, [random_term(sig, rng, depth - 1) for _ in range(ar)])


def random_dag_term(sig: Signature, rng: random.Random, n: int) -> Term:
    """A term whose maximally shared graph has exactly ``n`` vertices.

    Vertex ``k`` takes vertex ``k-1`` as its first child, so heights grow
    strictly and no two vertices coincide; other children are earlier
    vertices picked at random.
    """
    leaves = [name for name, a in sig if a == 0]
    inner = [(name, a) for name, a in sig if a > 0]
    if not leaves:
        raise ValueError("signature has no nullary constructor")
    nodes = [Term(rng.choice(leaves))]
    if not inner:
        return nodes[0]
    for _ in range(n - 1):
        name, ar = rng.choice(inner)
        children = [nodes[-1]] + [rng.choice(nodes) for _ in range(ar - 1)]
        nodes.append(Term(name, children))
    return nodes[-1]


def ladder(node: str, leaf: str, n: int) -> Term:
    """``t_1 = leaf``, ``t_k = node(t_{k-1}, t_{k-1})``: n vertices shared, 2^n - 1 unfolded."""
    t = Term(leaf)
    for _ in range(n - 1):
        t = Term(node, (t, t))
    return t
