"""Both kernel backends against each other and against direct definitions."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tiergraph import kernels
from tiergraph.algebra import Label, Signature
from tiergraph.generators import random_dag_term
from tiergraph.graph import from_term

MIX = Signature.of(a=0, b=0, g=1, f=2, h=3)
BACKENDS = [kernels.python] + ([kernels.compiled] if kernels.compiled is not None else [])
by_backend = pytest.mark.parametrize("backend", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])


def _graph(seed, n):
    g = from_term(random_dag_term(MIX, random.Random(seed), n))
    return dict(g.graph.labels), dict(g.graph.succ), g.root


def _preds(succ):
    preds = {v: set() for v in succ}
    for v, cs in succ.items():
        for c in cs:
            preds[c].add(v)
    return preds


def _paths_from(succ, v):
    out = set()
    stack = list(succ[v])
    while stack:
        u = stack.pop()
        if u not in out:
            out.add(u)
            stack.extend(succ[u])
    return out


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")


@by_backend
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 60))
def test_traversals(backend, seed, n):
    labels, succ, root = _graph(seed, n)
    assert backend.reachable(succ, [root]) == set(succ)
    pre, post = backend.dfs_orders(succ, [root])
    assert pre[0] == root and post[-1] == root
    assert sorted(pre) == sorted(post) == sorted(succ)
    pos = {v: k for k, v in enumerate(post)}
    assert all(pos[c] < pos[v] for v in succ for c in succ[v])
    assert (pre, post) == kernels.python.dfs_orders(succ, [root])
    rng = random.Random(seed)
    marked = set(rng.sample(sorted(succ), min(3, len(succ))))
    below = backend.mark_below(succ, post, marked)
    assert below == {v for v in succ if _paths_from(succ, v) & marked}
    above = backend.mark_above(succ, post, marked)
    assert above == {v for v in succ if any(v in _paths_from(succ, m) for m in marked)}
    assert backend.canonical_sequence(labels, succ, [root]) == kernels.python.canonical_sequence(labels, succ, [root])


@by_backend
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 60))
def test_redirect_and_release(backend, seed, n):
    labels, succ, root = _graph(seed, n)
    preds = _preds(succ)
    rng = random.Random(seed)
    old = rng.choice([v for v in succ if v != root])
    # redirect ``old`` to a vertex that cannot reach it
    fresh = max(succ) + 1
    succ[fresh], labels[fresh], preds[fresh] = (), Label("a", 0), set()
    candidates = [v for v in succ if v != old and old not in _paths_from(succ, v)]
    new = rng.choice(candidates)
    parents = set(preds[old])
    touched = backend.redirect(succ, preds, old, new)
    assert set(touched) == parents
    assert not preds[old]
    assert all(old not in succ[p] for p in parents)
    assert parents <= preds[new]
    assert preds == _preds(succ)
    freed = backend.release(labels, succ, preds, old, root)
    assert root in succ
    assert set(succ) - {fresh} == kernels.python.reachable(succ, [root]) - {fresh}
    assert freed >= 1 and old not in succ
    assert preds == _preds(succ)


def test_redirect_to_self_is_a_no_op(backend):
    labels, succ, root = _graph(1, 10)
    preds = _preds(succ)
    before = {k: set(v) for k, v in preds.items()}
    assert backend.redirect(succ, preds, root, root) == []
    assert preds == before


def test_release_keeps_root(backend):
    labels, succ, root = _graph(2, 10)
    preds = _preds(succ)
    child = succ[root][0]
    # detach the root's subgraph as if the root had been replaced by its child
    succ_copy = dict(succ)
    assert backend.release(labels, succ_copy, preds, root, child) >= 1
    assert child in succ_copy


def test_collect(backend):
    labels, succ, root = _graph(3, 20)
    extra = max(succ) + 1
    succ[extra] = (root,)
    labels[extra] = None
    assert backend.collect(labels, succ, [root]) == 1
    assert extra not in succ and extra not in labels
