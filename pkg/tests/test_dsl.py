import pytest

from tiergraph.algebra import Comp, Cond, Constr, Proj, Rec, TierError, term, tiers
from tiergraph.corpus import load
from tiergraph.dsl import ParseError, Ref, format_program, parse, parse_term


def test_sum_parses_to_the_expected_tree():
    prog = parse(
        """
        sig nat { z:0, s:1 }
        fn sum @ (1,0)->0 = rec{ z => proj 1 1, s => comp(con s; proj 3 2) }
        """
    )
    fd = prog.functions["sum"]
    assert fd.sig == tiers("(1,0)->0") and fd.signature == "nat" and fd.error is None
    assert fd.expr == Rec((Proj(1, 1), Comp(Constr("s"), (Proj(3, 2),))))
    assert fd.fn == Rec(
        (
            Proj(1, 1, tiers("(0)->0")),
            Comp(Constr("s", tiers("(0)->0")), (Proj(3, 2, tiers("(1,0,0)->0")),), tiers("(1,0,0)->0")),
        ),
        tiers("(1,0)->0"),
    )


def test_references_and_annotations():
    prog = parse(
        """
        sig nat { z:0, s:1 }
        fn pred @ (0)->0 = cond{ z => con z, s => proj 1 1 }
        fn twice @ (0)->0 = comp(pred @ (0)->0; pred)
        term one = s(z)
        """
    )
    assert prog.functions["twice"].expr == Comp(Ref("pred", tiers("(0)->0")), (Ref("pred"),))
    assert prog.functions["twice"].fn.outer == prog.functions["pred"].fn
    assert prog.terms["one"] == term("s", term("z"))
    assert prog.resolve_term("one") == prog.resolve_term("s(z)")


def test_reference_at_the_wrong_tiers_is_a_tier_error():
    prog = parse(
        """
        sig nat { z:0, s:1 }
        fn pred @ (0)->0 = cond{ z => con z, s => proj 1 1 }
        fn up @ (1)->1 = comp(pred @ (1)->1; id)
        """
    )
    assert isinstance(prog.functions["up"].error, TierError)


@pytest.mark.parametrize(
    "src, where, message",
    [
        ("sig n { z:0, s:1 }\nfn f @ (1)->0 = rec{ z => con z }", (2, 20), "missing branch for constructor 's'"),
        ("sig n { z:0 }\nfn f @ (0)->0 = prox 1 1", (2, 17), "unknown"),
        ("fn f @ (0)->0 = id", (1, 1), "fn before any sig"),
        ("sig n { z:0 }\nfn f @ (0)->0 = id\nfn f @ (0)->0 = id", (3, 4), "defined twice"),
        ("sig n { z:0 }\nfn f @ (0->0 = id", (2, 10), "expected"),
        ("sig n { z:0 } $", (1, 15), "unexpected character"),
    ],
)
def test_parse_errors(src, where, message):
    with pytest.raises(ParseError) as e:
        parse(src)
    assert (e.value.line, e.value.column) == where
    assert message in e.value.message


def test_undetermined_tiers_are_a_parse_error():
    src = "sig n { z:0, s:1 }\nfn f @ (1)->0 = comp(rec{ z => con z, s => con z }; rec{ z => con z, s => con z })"
    with pytest.raises(ParseError):
        parse(src)


def test_parse_term_deep_and_malformed():
    t = parse_term("s(" * 5000 + "z" + ")" * 5000)
    assert t.size == 5001
    assert parse_term("f(a, g(b))") == term("f", term("a"), term("g", term("b")))
    for bad in ("f(a", "f(a))", "(a)", "f(a,)"):
        with pytest.raises(ParseError):
            parse_term(bad)


@pytest.mark.parametrize("name", ["nat", "tree", "words", "fulltree", "colours", "bad"])
def test_pretty_printer_round_trips(name):
    prog = load(name)
    text = format_program(prog)
    again = parse(text)
    assert format_program(again) == text
    assert {k: f.expr for k, f in again.functions.items()} == {k: f.expr for k, f in prog.functions.items()}
    assert {k: f.fn for k, f in again.functions.items()} == {k: f.fn for k, f in prog.functions.items()}
    assert again.terms == prog.terms
