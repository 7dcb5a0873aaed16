"""Slow reference implementations used to cross-check the library."""

from __future__ import annotations

import itertools


def brute_iso(g, h) -> bool:
    """Backtracking search for a root- and order-preserving bijection."""
    lg, sg = g.graph.labels, g.graph.succ
    lh, sh = h.graph.labels, h.graph.succ
    if len(sg) != len(sh) or len(g.roots) != len(h.roots):
        return False
    verts = sorted(sg)
    cands = {v: [w for w in sh if lh[w] == lg[v] and len(sh[w]) == len(sg[v])] for v in verts}

    def extend(m: dict, used: set, k: int) -> bool:
        if k == len(verts):
            return all(tuple(m[c] for c in sg[v]) == sh[m[v]] for v in verts) and all(
                m[a] == b for a, b in zip(g.roots, h.roots)
            )
        v = verts[k]
        for w in cands[v]:
            if w in used:
                continue
            m[v] = w
            used.add(w)
            if extend(m, used, k + 1):
                return True
            del m[v]
            used.discard(w)
        return False

    return extend({}, set(), 0)


def brute_homomorphisms(pattern, target, at):
    """All maps from pattern vertices to target vertices satisfying the
    homomorphism equations and labelled-vertex injectivity, with root -> at."""
    pv = sorted(pattern.graph.succ)
    tv = sorted(target.graph.succ) if hasattr(target, "graph") else sorted(target.succ)
    tl = target.graph.labels if hasattr(target, "graph") else target.labels
    ts = target.graph.succ if hasattr(target, "graph") else target.succ
    pl, ps = pattern.graph.labels, pattern.graph.succ
    out = []
    for image in itertools.product(tv, repeat=len(pv)):
        m = dict(zip(pv, image))
        if m[pattern.root] != at:
            continue
        ok = True
        labelled = [m[v] for v in pv if pl[v] is not None]
        if len(set(labelled)) != len(labelled):
            continue
        for v in pv:
            if pl[v] is None:
                continue
            if tl[m[v]] != pl[v] or ts[m[v]] != tuple(m[c] for c in ps[v]):
                ok = False
                break
        if ok:
            out.append(m)
    return out


def count_distinct_subterms(t) -> int:
    seen = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if u in seen:
            continue
        seen.add(u)
        stack.extend(u.children)
    return len(seen)


def tree_size(t) -> int:
    return 1 + sum(tree_size(c) for c in t.children)
