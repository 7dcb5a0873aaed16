"""Tiered recursive functions compiled to term graph rewriting systems."""

from .algebra import (
    Comp,
    Cond,
    Constr,
    Id,
    Label,
    Proj,
    Rec,
    Signature,
    Term,
    TierError,
    TierSig,
    check_tiers,
    eval_term,
    tier_annotate,
)
from .compile import CompiledProgram, build_call_graph, compile_program, run
from .graph import LabelledGraph, TermGraph, from_term, iso, unfold
from .rewrite import Limits, Metrics, Rule, RuleSet, normalize

__version__ = "0.1.0"
