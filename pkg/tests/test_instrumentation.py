import random

import pytest

from gen import PRESERVATION_CASES, letters, preservation_mismatches, random_execution
from axver.errors import UnsupportedAxiom
from axver.executions import (
    Assign, AssignFn, AssumeEq, AssumeNegRel, AssumeRel, build_exec_nfa, kappa, teval,
)
from axver.instrumentation import Homomorphism, build_pipeline, homomorphism_for, instrument
from axver.syntax import AUX_VAR, AxiomSet, load, parse_program

V = ("x", "y", "z")


def test_refl_image():
    h = homomorphism_for("refl", "R")
    a = AssignFn("x", "f", ("y",))
    assert h.image(a) == (a, AssumeRel("R", ("x", "x")))


def test_irref_image():
    a = AssignFn("x", "f", ("y",))
    assert homomorphism_for("irref", "R").image(a) == (a, AssumeNegRel("R", ("x", "x")))


def test_symm_images():
    h = homomorphism_for("symm", "R")
    assert h.image(AssumeRel("R", ("x", "y"))) == (AssumeRel("R", ("x", "y")),
                                                   AssumeRel("R", ("y", "x")))
    assert h.image(AssumeNegRel("R", ("x", "y"))) == (AssumeNegRel("R", ("x", "y")),
                                                      AssumeNegRel("R", ("y", "x")))
    assert h.image(Assign("x", "y")) == (Assign("x", "y"),)
    assert h.image(AssumeRel("S", ("x", "y"))) == (AssumeRel("S", ("x", "y")),)


def test_comm_image():
    a = AssignFn("z", "f", ("x", "y"))
    assert homomorphism_for("comm", "f").image(a) == (
        a, AssignFn(AUX_VAR, "f", ("y", "x")), AssumeEq("z", AUX_VAR))


def test_comm_image_reads_operands_first():
    a = AssignFn("x", "f", ("x", "y"))
    word = homomorphism_for("comm", "f").image(a)
    assert word[0] == AssignFn(AUX_VAR, "f", ("y", "x"))
    # Both applications see the operands' values from before the letter.
    assert teval(word[:2], "x").args == tuple(reversed(teval(word[:1], AUX_VAR).args))


def test_idem_image():
    a = AssignFn("y", "f", ("x",))
    assert homomorphism_for("idem", "f").image(a) == (
        a, AssignFn(AUX_VAR, "f", ("y",)), AssumeEq("y", AUX_VAR))


@pytest.mark.parametrize("kind", ["trans", "sto", "assoc"])
def test_no_homomorphism(kind):
    with pytest.raises(UnsupportedAxiom):
        homomorphism_for(kind, "R")


def test_prologue_covers_initial_values():
    h = homomorphism_for("refl", "R")
    assert h.apply((), V) == tuple(AssumeRel("R", (v, v)) for v in V)
    assert homomorphism_for("symm", "R").prologue(V) == ()


def test_pipeline_order():
    ax = AxiomSet.of(rel={"R": {"refl"}, "S": {"trans"}}, fn={"f": {"comm"}})
    p = build_pipeline(ax)
    assert [h.tag for h in p.hom_sequence] == ["refl:R", "comm:f"]
    assert p.residual == {"S"}


def test_empty_pipeline():
    p = build_pipeline(AxiomSet())
    assert p.hom_sequence == () and not p.residual and not p.translate_sto


def test_sto_pipeline():
    p = build_pipeline(AxiomSet.of(rel={"L": {"sto"}}))
    assert p.translate_sto == {"L"}
    assert [h.tag for h in p.hom_sequence] == ["irref:L"]
    assert p.residual == {"L"}


def test_relational_before_functional():
    ax = AxiomSet.of(rel={"Z": {"symm", "refl"}, "A": {"irref"}},
                     fn={"a": {"idem"}, "b": {"comm"}})
    tags = [h.tag for h in build_pipeline(ax).hom_sequence]
    assert tags == ["irref:A", "refl:Z", "symm:Z", "idem:a", "comm:b"]


def test_pipeline_is_deterministic():
    ax = AxiomSet.of(rel={"R": {"refl", "symm"}}, fn={"f": {"comm"}})
    assert build_pipeline(ax) == build_pipeline(AxiomSet.of(fn={"f": {"comm"}},
                                                            rel={"R": {"symm", "refl"}}))


def test_unsupported_pipeline():
    ax = parse_program("axioms { function f: associative; } vars x; program { skip; }").axioms
    with pytest.raises(UnsupportedAxiom):
        build_pipeline(ax)


def _nfa(source):
    p, _sig, ax, _post = load(source)
    return build_exec_nfa(p, ax), ax


def test_instrument_with_empty_pipeline_is_identity():
    n, _ = _nfa("vars x, y; program { while (x != y) { x := f(y); } }")
    assert instrument(n, build_pipeline(AxiomSet())) is n


def test_refl_then_irref_on_single_edge():
    n, _ = _nfa("vars x, y; program { x := f(y); }")
    ax = AxiomSet.of(rel={"R": {"refl"}, "Q": {"irref"}})
    words = instrument(n, build_pipeline(ax)).words(10)
    # irref:Q runs first; refl:R then inserts right after the assignment.
    body = (AssignFn("x", "f", ("y",)), AssumeRel("R", ("x", "x")), AssumeNegRel("Q", ("x", "x")))
    prologue = (AssumeNegRel("Q", ("x", "x")), AssumeNegRel("Q", ("y", "y")),
                AssumeRel("R", ("x", "x")), AssumeRel("R", ("y", "y")))
    assert words == {prologue + body}


@pytest.mark.parametrize("source,ax", [
    ("vars x, y; program { while (x != y) { x := f(x, y); } }",
     AxiomSet.of(fn={"f": {"comm"}}, rel={"R": {"refl"}})),
    ("vars x, y, z; program { if (R(x, y)) then { z := g(x); } else { assume(!(R(y, z))); } }",
     AxiomSet.of(rel={"R": {"symm", "irref"}}, fn={"g": {"idem"}})),
])
def test_nfa_image_matches_word_image(source, ax):
    n, _ = _nfa(source)
    pipeline = build_pipeline(ax)
    inst = instrument(n, pipeline)
    expected = {pipeline.apply(w, n.all_variables()) for w in n.words(6)}
    got = inst.words(40)
    assert expected <= got
    assert all(inst.accepts(w) for w in expected)


def test_relational_homomorphisms_keep_terms():
    rng = random.Random(3)
    alphabet = letters(V)
    for kind in ("refl", "irref", "symm"):
        h = Homomorphism(kind, "R")
        for _ in range(200):
            w = random_execution(rng, alphabet, 10)
            hw = h.apply(w, V)
            for v in V:
                assert teval(w, v) == teval(hw, v)
            assert kappa(w) <= kappa(hw)


@pytest.mark.parametrize("kind", sorted(PRESERVATION_CASES))
def test_preservation_sample(kind):
    assert preservation_mismatches(kind, 300, seed=99) == []
