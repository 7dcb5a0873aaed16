# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled graph kernels; same contracts as ``_pykernels``."""


cpdef set reachable(dict succ, roots):
    cdef set seen = set()
    cdef list stack = list(roots)
    cdef object v, c
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        for c in <tuple>succ[v]:
            stack.append(c)
    return seen


cpdef tuple dfs_orders(dict succ, roots):
    cdef list pre = []
    cdef list post = []
    cdef set seen = set()
    cdef list vstack
    cdef list kstack
    cdef tuple children
    cdef Py_ssize_t k, top
    cdef object r, v, c
    for r in roots:
        if r in seen:
            continue
        seen.add(r)
        pre.append(r)
        vstack = [r]
        kstack = [0]
        while vstack:
            top = len(vstack) - 1
            v = vstack[top]
            k = kstack[top]
            children = <tuple>succ[v]
            if k < len(children):
                kstack[top] = k + 1
                c = children[k]
                if c not in seen:
                    seen.add(c)
                    pre.append(c)
                    vstack.append(c)
                    kstack.append(0)
            else:
                vstack.pop()
                kstack.pop()
                post.append(v)
    return pre, post


cpdef set mark_below(dict succ, list postorder, marked):
    cdef set below = set()
    cdef object v, c
    for v in postorder:
        for c in <tuple>succ[v]:
            if c in marked or c in below:
                below.add(v)
                break
    return below


cpdef set mark_above(dict succ, list postorder, marked):
    cdef set above = set()
    cdef Py_ssize_t k
    cdef object v, c
    for k in range(len(postorder) - 1, -1, -1):
        v = postorder[k]
        if v in marked or v in above:
            for c in <tuple>succ[v]:
                above.add(c)
    return above


cpdef tuple canonical_sequence(dict labels, dict succ, roots):
    cdef list pre
    cdef dict index = {}
    cdef Py_ssize_t k
    cdef object v, c
    cdef list body = []
    pre = dfs_orders(succ, roots)[0]
    for k in range(len(pre)):
        index[pre[k]] = k
    for v in pre:
        body.append((labels[v], tuple([index[c] for c in <tuple>succ[v]])))
    return tuple([index[r] for r in roots]), tuple(body)


cpdef Py_ssize_t collect(dict labels, dict succ, roots):
    cdef set live = reachable(succ, roots)
    cdef list dead = [v for v in succ if v not in live]
    cdef object v
    for v in dead:
        del succ[v]
        del labels[v]
    return len(dead)


cpdef list redirect(dict succ, dict preds, object old, object new):
    if old == new:
        return []
    cdef set parents = <set>preds[old]
    cdef set np = <set>preds[new]
    cdef object p, c
    cdef tuple ch
    cdef list out
    for p in parents:
        ch = <tuple>succ[p]
        out = []
        for c in ch:
            out.append(new if c == old else c)
        succ[p] = tuple(out)
        np.add(p)
    cdef list touched = list(parents)
    parents.clear()
    return touched


cpdef Py_ssize_t release(dict labels, dict succ, dict preds, object v, object root):
    cdef Py_ssize_t freed = 0
    cdef list stack = [v]
    cdef object u, c
    cdef tuple children
    cdef set ps
    while stack:
        u = stack.pop()
        children = <tuple>succ.pop(u)
        del labels[u]
        del preds[u]
        freed += 1
        for c in set(children):
            ps = <set>preds[c]
            ps.discard(u)
            if not ps and c != root:
                stack.append(c)
    return freed
