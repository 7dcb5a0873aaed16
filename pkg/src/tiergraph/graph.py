"""Labelled graphs, term graphs and the operations the rewriting engine needs.

Vertices are integers handed out in increasing order by the owning
:class:`LabelledGraph`, so creation order is the numeric order.  A vertex
labelled ``None`` is unlabelled (a hole, drawn as ``⊥``).
"""

from __future__ import annotations

import json
from typing import Iterable, Sequence

from . import kernels
from .algebra import Label, Term

BOTTOM = "⊥"


class CapExceeded(Exception):
    """Unfolding a term graph would produce a term larger than the cap."""


class GraphError(ValueError):
    pass


class LabelledGraph:
    __slots__ = ("labels", "succ", "next_id")

    def __init__(self, labels=None, succ=None, next_id: int | None = None):
        self.labels: dict[int, Label | None] = {} if labels is None else labels
        self.succ: dict[int, tuple[int, ...]] = {} if succ is None else succ
        if next_id is None:
            next_id = max(self.succ, default=-1) + 1
        self.next_id = next_id

    def add_vertex(self, label: Label | None, children: Sequence[int] = ()) -> int:
        children = tuple(children)
        if label is None and children:
            raise GraphError("an unlabelled vertex has no successors")
        if label is not None and len(children) != label.arity:
            raise GraphError(f"{label} has arity {label.arity}, got {len(children)} children")
        v = self.next_id
        self.next_id += 1
        self.labels[v] = label
        self.succ[v] = children
        return v

    def copy(self) -> "LabelledGraph":
        return LabelledGraph(dict(self.labels), dict(self.succ), self.next_id)

    def __len__(self) -> int:
        return len(self.succ)

    def __contains__(self, v: object) -> bool:
        return v in self.succ

    @property
    def vertices(self) -> list[int]:
        return list(self.succ)

    def is_closed(self) -> bool:
        return all(lab is not None for lab in self.labels.values())

    def validate(self) -> None:
        """Check arities, dangling edges and acyclicity; raise GraphError."""
        for v, children in self.succ.items():
            lab = self.labels[v]
            want = 0 if lab is None else lab.arity
            if len(children) != want:
                raise GraphError(f"vertex {v} labelled {lab} has {len(children)} successors")
            for c in children:
                if c not in self.succ:
                    raise GraphError(f"vertex {v} points at missing vertex {c}")
        state: dict[int, int] = {}
        for start in self.succ:
            if start in state:
                continue
            stack = [(start, iter(self.succ[start]))]
            state[start] = 1
            while stack:
                v, it = stack[-1]
                c = next(it, None)
                if c is None:
                    state[v] = 2
                    stack.pop()
                elif state.get(c) == 1:
                    raise GraphError(f"cycle through vertex {c}")
                elif c not in state:
                    state[c] = 1
                    stack.append((c, iter(self.succ[c])))

    def __repr__(self) -> str:
        return f"<LabelledGraph {len(self)} vertices>"


class TermGraph:
    """A labelled graph with a root vertex."""

    __slots__ = ("graph", "root")

    def __init__(self, graph: LabelledGraph, root: int):
        if root not in graph:
            raise GraphError(f"root {root} is not a vertex")
        self.graph = graph
        self.root = root

    @property
    def roots(self) -> tuple[int, ...]:
        return (self.root,)

    @property
    def labels(self):
        return self.graph.labels

    @property
    def succ(self):
        return self.graph.succ

    def copy(self) -> "TermGraph":
        return TermGraph(self.graph.copy(), self.root)

    def __len__(self) -> int:
        return len(self.graph)

    def __repr__(self) -> str:
        return f"<TermGraph root={self.root} {len(self)} vertices>"


class MultiRootedTermGraph:
    __slots__ = ("graph", "roots")

    def __init__(self, graph: LabelledGraph, roots: Sequence[int]):
        roots = tuple(roots)
        if not roots:
            raise GraphError("a multi-rooted term graph needs at least one root")
        for r in roots:
            if r not in graph:
                raise GraphError(f"root {r} is not a vertex")
        self.graph = graph
        self.roots = roots

    @property
    def labels(self):
        return self.graph.labels

    @property
    def succ(self):
        return self.graph.succ

    def rooted(self, k: int = 0) -> TermGraph:
        return TermGraph(self.graph, self.roots[k])

    def __len__(self) -> int:
        return len(self.graph)

    def __repr__(self) -> str:
        return f"<MultiRootedTermGraph roots={self.roots} {len(self)} vertices>"


AnyRooted = TermGraph | MultiRootedTermGraph


# -- construction and unfolding --------------------------------------------


def add_term(g: LabelledGraph, t: Term, share: bool = True, table: dict | None = None) -> int:
    """Add ``t`` to ``g`` and return the vertex representing it.

    With ``share`` the construction is hash-consed against ``table`` (a dict
    from ``(label, children)`` to vertex), so structurally equal subterms map
    to a single vertex.  Without it every term node gets its own vertex.
    """
    if not share:
        return _add_tree(g, t)
    if table is None:
        table = {}
    built: dict[int, int] = {}
    stack = [(t, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in built:
            continue
        if not expanded:
            stack.append((node, True))
            stack.extend((c, False) for c in reversed(node.children) if id(c) not in built)
            continue
        label = Label(node.head, len(node.children), node.tier)
        key = (label, tuple(built[id(c)] for c in node.children))
        v = table.get(key)
        if v is None:
            v = table[key] = g.add_vertex(label, key[1])
        built[id(node)] = v
    return built[id(t)]


def _add_tree(g: LabelledGraph, t: Term) -> int:
    out: list[int] = []
    stack = [(t, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            k = len(node.children)
            children = out[len(out) - k :] if k else []
            del out[len(out) - k :]
            out.append(g.add_vertex(Label(node.head, k, node.tier), children))
        else:
            stack.append((node, True))
            stack.extend((c, False) for c in reversed(node.children))
    return out[0]


def from_term(t: Term, share: bool = True) -> TermGraph:
    """A term graph whose unfolding is ``t``; maximally shared by default."""
    g = LabelledGraph()
    return TermGraph(g, add_term(g, t, share))


def unfold(g: AnyRooted, cap: int = 10**6, root: int | None = None) -> Term:
    """The term obtained by expanding ``g`` from its root, or CapExceeded."""
    if root is None:
        root = g.roots[0]
    labels, succ = g.graph.labels, g.graph.succ
    _, post = kernels.dfs_orders(succ, (root,))
    size: dict[int, int] = {}
    for v in post:
        size[v] = 1 + sum(size[c] for c in succ[v])
    if size[root] > cap:
        raise CapExceeded(f"unfolding has {size[root]} nodes, cap is {cap}")
    built: dict[int, Term] = {}
    for v in post:
        lab = labels[v]
        if lab is None:
            raise GraphError(f"cannot unfold: vertex {v} is unlabelled")
        built[v] = Term(lab.name, [built[c] for c in succ[v]], lab.tier)
    return built[root]


def unfold_size(g: AnyRooted, root: int | None = None) -> int:
    """Number of nodes of the unfolded term, computed without building it."""
    if root is None:
        root = g.roots[0]
    succ = g.graph.succ
    _, post = kernels.dfs_orders(succ, (root,))
    size: dict[int, int] = {}
    for v in post:
        size[v] = 1 + sum(size[c] for c in succ[v])
    return size[root]


# -- structure --------------------------------------------------------------


def subgraph(g: LabelledGraph | AnyRooted, roots: Iterable[int]) -> MultiRootedTermGraph:
    """The part of ``g`` reachable from ``roots``, keeping vertex ids."""
    base = g if isinstance(g, LabelledGraph) else g.graph
    roots = tuple(roots)
    live = kernels.reachable(base.succ, roots)
    labels = {v: base.labels[v] for v in base.succ if v in live}
    succ = {v: base.succ[v] for v in labels}
    return MultiRootedTermGraph(LabelledGraph(labels, succ, base.next_id), roots)


def rooted_at(g: LabelledGraph | AnyRooted, v: int) -> TermGraph:
    return subgraph(g, (v,)).rooted()


def is_proper(g: AnyRooted) -> bool:
    return len(kernels.reachable(g.graph.succ, g.roots)) == len(g.graph)


def properize(g: TermGraph) -> TermGraph:
    """Drop every vertex unreachable from the root (a copy)."""
    h = g.copy()
    kernels.collect(h.graph.labels, h.graph.succ, (h.root,))
    return h


def size(g: LabelledGraph | AnyRooted) -> int:
    return len(g)


def tier_size(g: LabelledGraph | AnyRooted, tier: int) -> int:
    """Vertices whose label is a constructor at ``tier``.

    Function-symbol labels carry no tier and are never counted.
    """
    labels = g.labels if isinstance(g, LabelledGraph) else g.graph.labels
    return sum(1 for lab in labels.values() if lab is not None and lab.tier == tier)


def tier_sizes(g: LabelledGraph | AnyRooted) -> dict[int, int]:
    labels = g.labels if isinstance(g, LabelledGraph) else g.graph.labels
    out: dict[int, int] = {}
    for lab in labels.values():
        if lab is not None and lab.tier is not None:
            out[lab.tier] = out.get(lab.tier, 0) + 1
    return dict(sorted(out.items()))


# -- matching and isomorphism -----------------------------------------------


def find_homomorphism(pattern: TermGraph, target: LabelledGraph | AnyRooted, at: int) -> dict[int, int] | None:
    """An injective homomorphism from ``pattern`` into ``target`` sending the
    pattern root to ``at``, or None.

    Labelled pattern vertices must map to distinct target vertices with the
    same label, children in order.  Unlabelled pattern vertices match any
    target vertex, shared or not.  Rooted ordered patterns admit at most one
    such map, so no backtracking is involved.
    """
    tg = target if isinstance(target, LabelledGraph) else target.graph
    pl, ps = pattern.graph.labels, pattern.graph.succ
    tl, ts = tg.labels, tg.succ
    if at not in ts:
        return None
    phi: dict[int, int] = {}
    image: set[int] = set()
    stack = [(pattern.root, at)]
    while stack:
        p, t = stack.pop()
        seen = phi.get(p)
        if seen is not None:
            if seen != t:
                return None
            continue
        phi[p] = t
        lab = pl[p]
        if lab is None:
            continue
        if tl[t] != lab or t in image:
            return None
        image.add(t)
        stack.extend(reversed(list(zip(ps[p], ts[t]))))
    return phi


def is_homomorphism(pattern: TermGraph, target: LabelledGraph | AnyRooted, phi: dict[int, int]) -> bool:
    """Directly re-check the label and order equations plus injectivity."""
    tg = target if isinstance(target, LabelledGraph) else target.graph
    labelled = [v for v in pattern.graph.succ if pattern.graph.labels[v] is not None]
    for v in labelled:
        if tg.labels.get(phi[v]) != pattern.graph.labels[v]:
            return False
        if tg.succ[phi[v]] != tuple(phi[c] for c in pattern.graph.succ[v]):
            return False
    return len({phi[v] for v in labelled}) == len(labelled)


def canonical_form(g: AnyRooted) -> tuple:
    """A key equal for two proper rooted graphs exactly when they are isomorphic.

    Vertices are renumbered in depth-first discovery order from the roots,
    following edge order; for rooted ordered graphs this numbering is forced
    by any isomorphism, so the renumbered structure is canonical.
    """
    return kernels.canonical_sequence(g.graph.labels, g.graph.succ, g.roots)


def iso(g: AnyRooted, h: AnyRooted) -> bool:
    return canonical_form(g) == canonical_form(h)


# -- serialization ----------------------------------------------------------


def _dot_label(lab: Label | None) -> str:
    return BOTTOM if lab is None else str(lab)


def to_dot(g: AnyRooted, name: str = "G") -> str:
    roots = set(g.roots)
    lines = [f"digraph {name} {{"]
    for v in g.graph.succ:
        extra = ", peripheries=2" if v in roots else ""
        text = _dot_label(g.graph.labels[v]).replace('"', '\\"')
        lines.append(f'  v{v} [label="{text}"{extra}];')
    for v, children in g.graph.succ.items():
        for k, c in enumerate(children):
            lines.append(f'  v{v} -> v{c} [label="{k}"];')
    lines.append("}")
    return "\n".join(lines)


def to_json(g: AnyRooted) -> dict:
    def label(lab):
        return None if lab is None else {"name": lab.name, "arity": lab.arity, "tier": lab.tier}

    doc = {
        "vertices": [str(v) for v in g.graph.succ],
        "alpha": {str(v): [str(c) for c in cs] for v, cs in g.graph.succ.items()},
        "delta": {str(v): label(lab) for v, lab in g.graph.labels.items()},
    }
    if isinstance(g, TermGraph):
        doc["root"] = str(g.root)
    else:
        doc["roots"] = [str(r) for r in g.roots]
    return doc


def from_json(doc: dict | str) -> AnyRooted:
    if isinstance(doc, str):
        doc = json.loads(doc)
    labels = {}
    succ = {}
    for v in doc["vertices"]:
        lab = doc["delta"].get(v)
        labels[int(v)] = None if lab is None else Label(lab["name"], lab["arity"], lab["tier"])
        succ[int(v)] = tuple(int(c) for c in doc["alpha"].get(v, ()))
    g = LabelledGraph(labels, succ)
    g.validate()
    if "root" in doc:
        return TermGraph(g, int(doc["root"]))
    return MultiRootedTermGraph(g, [int(r) for r in doc["roots"]])
