"""Pure-Python graph kernels; ``_ckernels.pyx`` is the compiled twin.

Graphs are passed as ``succ`` (vertex -> tuple of children) and, where
labels matter, ``labels`` (vertex -> label or None).  Workspace kernels also
take ``preds`` (vertex -> set of distinct parents).
"""


def reachable(succ, roots):
    seen = set()
    stack = list(roots)
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(succ[v])
    return seen


def dfs_orders(succ, roots):
    """Preorder (first visit) and postorder of a DFS following edge order."""
    pre = []
    post = []
    seen = set()
    for r in roots:
        if r in seen:
            continue
        seen.add(r)
        pre.append(r)
        stack = [(r, 0)]
        while stack:
            v, k = stack[-1]
            children = succ[v]
            if k < len(children):
                stack[-1] = (v, k + 1)
                c = children[k]
                if c not in seen:
                    seen.add(c)
                    pre.append(c)
                    stack.append((c, 0))
            else:
                stack.pop()
                post.append(v)
    return pre, post


def mark_below(succ, postorder, marked):
    """Vertices with a marked vertex reachable by a non-empty path."""
    below = set()
    for v in postorder:
        for c in succ[v]:
            if c in marked or c in below:
                below.add(v)
                break
    return below


def mark_above(succ, postorder, marked):
    """Vertices reachable by a non-empty path from a marked vertex."""
    above = set()
    for k in range(len(postorder) - 1, -1, -1):
        v = postorder[k]
        if v in marked or v in above:
            for c in succ[v]:
                above.add(c)
    return above


def canonical_sequence(labels, succ, roots):
    pre, _ = dfs_orders(succ, roots)
    index = {v: k for k, v in enumerate(pre)}
    body = tuple((labels[v], tuple(index[c] for c in succ[v])) for v in pre)
    return tuple(index[r] for r in roots), body


def collect(labels, succ, roots):
    """Delete every vertex unreachable from ``roots``; return how many."""
    live = reachable(succ, roots)
    dead = [v for v in succ if v not in live]
    for v in dead:
        del succ[v]
        del labels[v]
    return len(dead)


def redirect(succ, preds, old, new):
    """Point every edge into ``old`` at ``new``; returns the parents touched."""
    if old == new:
        return []
    parents = preds[old]
    np = preds[new]
    for p in parents:
        succ[p] = tuple(new if c == old else c for c in succ[p])
        np.add(p)
    touched = list(parents)
    parents.clear()
    return touched


def release(labels, succ, preds, v, root):
    """Delete ``v`` (no parents left) and cascade to orphaned descendants.

    ``root`` is never deleted even when it has no parents.
    """
    freed = 0
    stack = [v]
    while stack:
        u = stack.pop()
        children = succ.pop(u)
        del labels[u]
        del preds[u]
        freed += 1
        for c in set(children):
            ps = preds[c]
            ps.discard(u)
            if not ps and c != root:
                stack.append(c)
    return freed
