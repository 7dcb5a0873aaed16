import random

import pytest

from tiergraph import rewrite
from tiergraph.algebra import Label, numeral
from tiergraph.compile import build_call_graph
from tiergraph.corpus import CORPUS
from tiergraph.graph import LabelledGraph, TermGraph, is_proper
from tiergraph.harness import (
    BoundFit,
    Context,
    GridPoint,
    NoFit,
    bound_fit,
    check_context_preservation,
    confluence_experiment,
    grid,
    grid_csv,
    substitute,
)
from tiergraph.rewrite import step

from oracles import brute_iso


def lab(name, arity):
    return Label(name, arity)


def test_substitution_example():
    c = LabelledGraph()
    hole_a, hole_b = c.add_vertex(None), c.add_vertex(None)
    h4 = c.add_vertex(lab("h4", 0))
    h3 = c.add_vertex(lab("h3", 2), [h4, h4])
    h2 = c.add_vertex(lab("h2", 1), [hole_b])
    h1 = c.add_vertex(lab("h1", 3), [h2, h3, hole_a])
    ctx = Context(TermGraph(c, h1))
    assert sorted(ctx.holes) == [hole_a, hole_b]

    g = LabelledGraph()
    g3 = g.add_vertex(lab("g3", 0))
    g2 = g.add_vertex(lab("g2", 1), [g3])
    g1 = g.add_vertex(lab("g1", 2), [g2, g2])
    out, rename = substitute(ctx, {hole_b: g1, hole_a: g3}, TermGraph(g, g1))

    e = LabelledGraph()
    e3 = e.add_vertex(lab("g3", 0))
    e2 = e.add_vertex(lab("g2", 1), [e3])
    e1 = e.add_vertex(lab("g1", 2), [e2, e2])
    e4 = e.add_vertex(lab("h4", 0))
    eh3 = e.add_vertex(lab("h3", 2), [e4, e4])
    eh2 = e.add_vertex(lab("h2", 1), [e1])
    eh1 = e.add_vertex(lab("h1", 3), [eh2, eh3, e3])
    assert brute_iso(out, TermGraph(e, eh1))
    assert out.root == h1 and len(out) == 7
    assert set(rename.values()).isdisjoint(c.succ)


def test_substitution_at_a_root_hole_and_partial():
    c = LabelledGraph()
    hole = c.add_vertex(None)
    g = LabelledGraph()
    a = g.add_vertex(lab("a", 0))
    out, rename = substitute(TermGraph(c, hole), {hole: a}, TermGraph(g, a))
    assert out.root == rename[a] and len(out) == 1

    c = LabelledGraph()
    x, y = c.add_vertex(None), c.add_vertex(None)
    r = c.add_vertex(lab("f", 2), [x, y])
    out, _ = substitute(TermGraph(c, r), {x: a}, TermGraph(g, a))
    assert out.labels[out.succ[out.root][1]] is None
    with pytest.raises(ValueError):
        substitute(TermGraph(c, r), {r: a}, TermGraph(g, a))


def test_substitution_can_be_properized():
    c = LabelledGraph()
    x = c.add_vertex(None)
    r = c.add_vertex(lab("k", 1), [x])
    g = LabelledGraph()
    a = g.add_vertex(lab("a", 0))
    g.add_vertex(lab("b", 0))  # not reached from the plugged vertex
    out, _ = substitute(TermGraph(c, r), {x: a}, TermGraph(g, a), properize_result=True)
    assert is_proper(out) and len(out) == 2


# -- context preservation --------------------------------------------------------


def plugged_instance(p, args, rng, warmup=0):
    """A context ``K(holes)`` over a call graph advanced by ``warmup`` random steps."""
    g = build_call_graph(p, args)
    for _ in range(warmup):
        nxt = step(g, p.ruleset, "any", rng)
        if nxt is None:
            break
        g = nxt
    verts = sorted(g.graph.succ)
    picks = [g.root] + rng.sample(verts, min(len(verts), rng.randint(1, 3)))
    c = LabelledGraph()
    holes = [c.add_vertex(None) for _ in picks]
    root = c.add_vertex(Label("ctx", len(holes)), holes)
    return Context(TermGraph(c, root)), dict(zip(holes, picks)), g


def test_context_preservation_holds():
    rng = random.Random(11)
    for trial in range(100):
        p = CORPUS["sum" if trial % 2 else "mult"].compiled()
        args = [numeral(rng.randint(0, 4)) for _ in range(2)]
        ctx, xi, g = plugged_instance(p, args, rng, warmup=rng.randint(0, 6))
        assert check_context_preservation(ctx, xi, g, p.ruleset), trial


def _faulty_redirect(ws, old, new):
    """Redirect as usual, then also steal every edge into old's last child."""
    last = ws.graph.succ[old][-1] if ws.graph.succ.get(old) else None
    rewrite.kernels.redirect(ws.graph.succ, ws.preds, old, new)
    if last is not None and last != new and last in ws.graph.succ:
        rewrite.kernels.redirect(ws.graph.succ, ws.preds, last, new)
    if ws.root == old:
        ws.root = new


def mutation_instance():
    p = CORPUS["mult"].compiled()
    y = numeral(2)
    x = numeral(4)  # s(s(y)): the second argument is shared inside the first
    g = build_call_graph(p, [x, y])
    arg_x = g.succ[g.root][0]
    c = LabelledGraph()
    h1, h2 = c.add_vertex(None), c.add_vertex(None)
    root = c.add_vertex(Label("ctx", 2), [h1, h2])
    return Context(TermGraph(c, root)), {h1: g.root, h2: arg_x}, g, p


def test_faulty_redirection_is_detected(monkeypatch):
    ctx, xi, g, p = mutation_instance()
    assert check_context_preservation(ctx, xi, g, p.ruleset)
    monkeypatch.setattr(rewrite, "_redirect", _faulty_redirect)
    assert not check_context_preservation(ctx, xi, g, p.ruleset)


# -- strategies --------------------------------------------------------------------


def test_confluence_on_pick():
    p = CORPUS["pick"].compiled()
    g = build_call_graph(p, [numeral(3), numeral(4)])
    rep = confluence_experiment(g, p.ruleset, trials=10, seed=1)
    assert rep.all_iso and rep.ordered and rep.strict and rep.ok
    outer, inner = rep.runs[0], rep.runs[1]
    assert outer.strategy == "outermost" and inner.strategy == "innermost"
    assert outer.steps < inner.steps
    assert len({r.final_canonical_key for r in rep.runs}) == 1
    d = rep.as_dict()
    assert len(d["runs"]) == 12 and d["strict"] is True


def test_confluence_without_erasure_is_not_strict():
    p = CORPUS["sum"].compiled()
    g = build_call_graph(p, [numeral(3), numeral(2)])
    rep = confluence_experiment(g, p.ruleset, trials=5)
    assert rep.ok and not rep.strict


def test_confluence_reports_limit_hits():
    p = CORPUS["sum"].compiled()
    g = build_call_graph(p, [numeral(3), numeral(2)])
    rep = confluence_experiment(g, p.ruleset, trials=2, limits=rewrite.Limits(max_steps=1))
    assert not rep.all_iso and not rep.ok
    assert all(r.error for r in rep.runs)


# -- bound fitting -----------------------------------------------------------------


def synthetic(f, sizes=range(10, 101, 10)):
    return [GridPoint(n, f(n), n, n, {1: n}, {0: 1}) for n in sizes]


def test_bound_fit_picks_the_lowest_degree():
    assert bound_fit(synthetic(lambda n: 3 * n + 4)).degree == 1
    fit = bound_fit(synthetic(lambda n: n * n // 2 + n))
    assert fit.degree == 2
    assert all(m <= b for _, m, b in fit.checks)
    assert bound_fit(synthetic(lambda n: n**3 // 7)).degree == 3
    with pytest.raises(NoFit):
        bound_fit(synthetic(lambda n: 2 ** (n // 5)))
    with pytest.raises(NoFit):
        bound_fit(synthetic(lambda n: n)[:1])


def test_bound_fit_validates_beyond_the_fitting_half():
    # linear on the lower half, quadratic jump above it
    pts = synthetic(lambda n: n if n <= 50 else n * n)
    with pytest.raises(NoFit):
        bound_fit(pts)


def test_bound_fit_covers_tier_growth():
    pts = [GridPoint(n, 1, 1, 1, {1: n}, {0: n * n}) for n in range(10, 101, 10)]
    fit = bound_fit(pts)
    assert fit.degree == 2 and all(fit.bounds_tiers(p) for p in pts)


def test_bound_fit_str_and_call():
    f = BoundFit(2, (1, 0, 3))
    assert f(2) == 13 and str(f) == "1 + 3*x^2"


def test_grid_and_csv():
    ex = CORPUS["sum"]
    pts = grid(ex.sized_graph, ex.compiled().ruleset, range(10, 41, 10), unfold=True)
    assert [p.size for p in pts] == sorted(p.size for p in pts)
    text = grid_csv(pts)
    lines = text.strip().split("\n")
    assert lines[0] == "size,steps,max_size,final_size,tier0,tier1,unfold_size"
    assert len(lines) == 5
    first = lines[1].split(",")
    assert int(first[0]) == pts[0].size and int(first[1]) == pts[0].steps
    fit = bound_fit(pts)
    assert fit.degree == 1
