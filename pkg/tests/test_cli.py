import io
import json
import shutil
import subprocess

import pytest

from tiergraph.cli import main
from tiergraph.algebra import format_term
from tiergraph.corpus import program_path, word

NAT = program_path("nat")
BAD = program_path("bad")


def call(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_run_golden():
    code, out = call("run", NAT, "sum", "two", "three", "--unfold")
    assert code == 0
    term, stats = out.splitlines()
    assert term == "s(s(s(s(s(z)))))"
    assert json.loads(stats) == {
        "steps": 8,
        "max_size": 9,
        "final_size": 6,
        "tier_sizes": {"0": 6},
        "unfold_size": 6,
    }


def test_run_with_tiers_and_literal_terms():
    code, out = call("run", NAT, "sum", "s(z)", "s(s(z))", "--unfold", "--tiers")
    assert code == 0
    assert out.splitlines()[0] == "s^0(s^0(s^0(z^0)))"


def test_strategies_agree_on_the_result():
    outs = {call("run", NAT, "pick", "three", "two", "--unfold", "--strategy", s)[1].splitlines()[0]
            for s in ("innermost", "outermost", "any")}
    assert outs == {"s(s(s(s(z))))"}


def test_trace_lines():
    code, out = call("trace", NAT, "sum", "s(z)", "z")
    assert code == 0
    recs = [json.loads(line) for line in out.splitlines()]
    assert [r["step"] for r in recs] == list(range(1, len(recs) + 1))
    assert recs[0]["rule"] == "unfold:sum#rec@(1,0)->0:2"
    assert set(recs[0]) == {"step", "rule", "root", "size"}


def test_check(capsys):
    code, out = call("check", NAT)
    assert code == 0
    assert "sum: ok (1,0)->0" in out.splitlines()
    code, out = call("check", BAD)
    assert code == 1
    assert out.strip() == "exp: root/s/outer: predicativity: recurrence tier 0 must exceed result tier 0"


def test_dot():
    code, out = call("dot", NAT, "pred", "z", "--which", "final")
    assert code == 0
    assert out.startswith("digraph final {") and 'label="z^0", peripheries=2' in out
    code, out = call("dot", NAT, "pred", "z")
    assert out.count("digraph") == 2


def test_bench_csv_and_fit(capsys):
    code, out = call("bench", NAT, "sum", "--sizes", "10..30", "--fit")
    assert code == 0
    assert out.splitlines() == [
        "size,steps,max_size,final_size,tier0,tier1",
        "10,14,13,8,8,0",
        "20,29,28,18,18,0",
        "30,44,43,28,28,0",
    ]
    assert "degree 1" in capsys.readouterr().err


def test_confluence_json():
    code, out = call("confluence", NAT, "pick", "three", "two", "--trials", "4")
    assert code == 0
    rep = json.loads(out)
    assert rep["all_iso"] and rep["ordered"] and rep["strict"]
    assert len(rep["runs"]) == 6


@pytest.mark.parametrize(
    "argv, code, message",
    [
        (["run", NAT, "sum", "two"], 4, "takes 2 arguments"),
        (["run", NAT, "nope"], 4, "no function named"),
        (["run", "missing.tg", "f"], 4, "cannot read"),
        (["run", NAT, "sum", "s(", "z"], 3, "parse error"),
        (["run", NAT, "sum", "q", "z"], 4, ""),
        (["run", NAT, "sum", "two", "three", "--max-steps", "3"], 2, "LimitExceeded"),
        (["run", NAT, "mult", "three", "three", "--unfold=3"], 2, "CapExceeded"),
        (["run", BAD, "exp", "two"], 1, "predicativity"),
        (["bench", NAT, "sum", "--sizes", "ten"], 4, "expected a..b"),
        ([], 4, "required"),
    ],
)
def test_exit_codes(capsys, argv, code, message):
    got, _ = call(*argv)
    assert got == code
    assert message in capsys.readouterr().err


@pytest.mark.skipif(shutil.which("tiergraph") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["tiergraph", "run", NAT, "double", "two", "--unfold"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "s(s(s(s(z))))"


def test_check_rejects_sum_at_equal_tiers(tmp_path):
    src = tmp_path / "flat.tg"
    src.write_text(
        "sig nat { z:0, s:1 }\n"
        "fn sum @ (0,0)->0 = rec{ z => proj 1 1, s => comp(con s; proj 3 2) }\n"
    )
    code, out = call("check", str(src))
    assert code == 1
    assert out.startswith("sum: ") and "predicativity" in out


def test_fulltree_prints_size_without_unfolding(capsys):
    bits = "abbaabbaabba"
    w = format_term(word(bits), tiers=False)
    code, out = call("run", program_path("fulltree"), "fulltree", w)
    assert code == 0
    stats = json.loads(out)
    assert stats["final_size"] == len(bits) + 1 and "unfold_size" not in stats
    code, _ = call("run", program_path("fulltree"), "fulltree", w, "--unfold=100")
    assert code == 2 and "CapExceeded" in capsys.readouterr().err
