import random

import pytest

from axver.errors import ParseError
from axver.executions import (
    Assign, AssignFn, AssumeEq, AssumeNegRel, AssumeNeq, AssumeRel, DataModel, Eq, Rel,
    app, append_post_violation, apply_homomorphism, build_exec_nfa, computed_terms,
    exec_words, format_execution, init, kappa, parse_execution, parse_letter, prepend_word,
    run_on_model, teval,
)
from axver.instrumentation import Homomorphism
from axver.syntax import AxiomSet, load

RHO3 = parse_execution("z1 := f(x, y) · z2 := f(y, x) · z3 := g(z1)")

SMALL_PROGRAMS = [
    "vars x, y; program { while (x != y) { skip; } }",
    "vars x, y; program { if (x == y) then { x := f(y); } else { y := x; } }",
    "vars x, y, z; program { while (x != y) { x := f(x); if (R(x, z)) then { z := x; } } }",
    "vars x, y; program { if (x == y && R(x, y)) then { x := g(x, y); } }",
    "vars x, y; program { while (!(R(x, y))) { y := f(y); } x := y; }",
    "axioms { relation lt: sto; } vars a, b; program { while (!(a < b)) { a := f(a); } }",
    "axioms { relation lt: sto; } vars a, b; program { if (a <= b) then { b := a; } }",
]


def test_letter_round_trip():
    for text in ["x := y", "x := f(y, z)", "assume(x == y)", "assume(x != y)",
                 "assume(R(x, y))", "assume(!R(x, y))", "v* := f(x)"]:
        a = parse_letter(text)
        assert parse_letter(str(a)) == a


def test_parse_execution_separators():
    word = parse_execution("x := y · assume(x = y)\n# comment\ny := f(x)")
    assert word == (Assign("x", "y"), AssumeEq("x", "y"), AssignFn("y", "f", ("x",)))
    assert parse_execution(format_execution(word)) == word
    assert format_execution(()) == "ε"


def test_bad_letter():
    with pytest.raises(ParseError):
        parse_letter("x := ")


def test_teval_empty():
    assert teval((), "x") == init("x")


def test_teval_rho3():
    assert teval(RHO3, "z3") == app("g", app("f", init("x"), init("y")))


def test_teval_copy():
    rho = RHO3 + (Assign("x", "z2"),)
    assert teval(rho, "x") == teval(RHO3, "z2")


def test_terms_are_hash_consed():
    assert app("f", init("x")) is app("f", init("x"))


def test_kappa():
    assert kappa(()) == frozenset()
    assert kappa((AssumeEq("x", "y"),)) == {Eq(init("x"), init("y"))}
    rho = (AssignFn("z1", "f", ("x", "y")), AssumeRel("R", ("z1", "x")))
    assert kappa(rho) == {Rel("R", (app("f", init("x"), init("y")), init("x")))}


def test_computed_terms():
    x, y = init("x"), init("y")
    assert computed_terms((), ["x", "y"]) == {x, y}
    fxy, fyx = app("f", x, y), app("f", y, x)
    expected = {x, y, init("z1"), init("z2"), init("z3"), fxy, fyx, app("g", fxy)}
    assert computed_terms(RHO3) == expected


def test_teval_in_computed_terms():
    rng = random.Random(3)
    letters = [Assign("x", "y"), AssignFn("x", "f", ("y",)), AssignFn("y", "g", ("x", "y")),
               AssumeEq("x", "y"), Assign("y", "x")]
    for _ in range(200):
        rho = tuple(rng.choice(letters) for _ in range(rng.randint(0, 8)))
        terms = computed_terms(rho, ["x", "y"])
        for i in range(len(rho) + 1):
            for v in ("x", "y"):
                assert teval(rho[:i], v) in terms


def _core(source):
    p, _, ax, post = load(source)
    return p, ax, post


@pytest.mark.parametrize("source", SMALL_PROGRAMS)
def test_nfa_matches_recursive_enumeration(source):
    p, ax, _ = _core(source)
    n = build_exec_nfa(p, ax)
    assert n.words(8) == exec_words(p.body, ax, 8)


def test_while_language():
    p, ax, _ = _core(SMALL_PROGRAMS[0])
    n = build_exec_nfa(p, ax)
    neq, eq = AssumeNeq("x", "y"), AssumeEq("x", "y")
    assert n.words(4) == {(neq,) * k + (eq,) for k in range(4)}


def test_sto_negation_is_split():
    p, ax, _ = _core("axioms { relation lt: sto; } vars x, y; program { assume(!(lt(x, y))); }")
    n = build_exec_nfa(p, ax)
    assert n.words(2) == {(AssumeRel("lt", ("y", "x")),), (AssumeEq("x", "y"),)}


@pytest.mark.parametrize("source", SMALL_PROGRAMS[5:])
def test_no_negative_sto_edges(source):
    p, ax, _ = _core(source)
    n = build_exec_nfa(p, ax)
    assert not any(isinstance(e.letter, AssumeNegRel) and e.letter.rel in ax.sto for e in n.edges)


def test_post_violation_on_skip():
    p, ax, post = _core("vars x, y; program { skip; } post: x == y;")
    n = append_post_violation(build_exec_nfa(p, ax), post, ax)
    assert n.words(3) == {(AssumeNeq("x", "y"),)}


def test_post_violation_sto():
    p, ax, post = _core("axioms { relation R: sto; } vars x, y; program { skip; } post: R(x, y);")
    n = append_post_violation(build_exec_nfa(p, ax), post, ax)
    assert n.words(3) == {(AssumeRel("R", ("y", "x")),), (AssumeEq("x", "y"),)}


def test_sorted_search_post_suffix(corpus):
    p, ax, post = _core(corpus("sorted_search.axv"))
    n = append_post_violation(build_exec_nfa(p, ax), post, ax)
    tails = {w[-2:] for w in n.words(30)}
    assert tails
    assert all(t[0] == AssumeEq("sorted", "T") for t in tails)
    assert all(isinstance(t[1], AssumeNeq) and {t[1].x, t[1].y} == {"found", "exists"}
               for t in tails)


def test_homomorphism_single_edge():
    p, ax, _ = _core("vars x, y; program { x := f(y); }")
    n = apply_homomorphism(build_exec_nfa(p, ax), Homomorphism("refl", "R"))
    assert n.words(3) == {(AssignFn("x", "f", ("y",)), AssumeRel("R", ("x", "x")))}


def test_homomorphism_empty_language():
    p, ax, _ = _core("vars x, y; program { assume(x == y); }")
    n = build_exec_nfa(p, ax)
    empty = type(n)(n.n_states, n.initial, [], n.edges, n.variables)
    assert empty.is_empty()
    assert apply_homomorphism(empty, Homomorphism("comm", "g")).is_empty()


@pytest.mark.parametrize("kind,symbol", [("refl", "R"), ("irref", "R"), ("symm", "R"),
                                         ("comm", "g"), ("idem", "f")])
@pytest.mark.parametrize("source", SMALL_PROGRAMS[:5])
def test_homomorphic_image_of_language(source, kind, symbol):
    p, ax, _ = _core(source)
    h = Homomorphism(kind, symbol)
    n = build_exec_nfa(p, ax)
    def img(w):
        return tuple(b for a in w for b in h.image(a))

    # Images never shrink a word, so preimages of length <= 12 cover every
    # image word of length <= 12.
    assert apply_homomorphism(n, h).words(12) == {img(w) for w in n.words(12) if len(img(w)) <= 12}


def test_prepend_word():
    p, ax, _ = _core("vars x, y; program { x := y; }")
    n = prepend_word(build_exec_nfa(p, ax), (AssumeEq("x", "x"),))
    assert n.words(2) == {(AssumeEq("x", "x"), Assign("x", "y"))}


def test_words_agree_with_accepts():
    p, ax, _ = _core(SMALL_PROGRAMS[2])
    n = build_exec_nfa(p, ax)
    for w in n.words(6):
        assert n.accepts(w)
    assert not n.accepts((Assign("x", "y"),))


def test_trim_and_epsilon_removal_keep_language():
    for source in SMALL_PROGRAMS:
        p, ax, _ = _core(source)
        n = build_exec_nfa(p, ax)
        assert n.without_epsilon().words(7) == n.words(7) == n.trim().words(7)
        assert not n.without_epsilon().has_epsilon


def test_prefix_closed():
    p, ax, _ = _core(SMALL_PROGRAMS[1])
    n = build_exec_nfa(p, ax)
    words = n.words(4)
    prefixes = {w[:i] for w in words for i in range(len(w) + 1)}
    assert n.prefix_closed().words(4) == prefixes


def test_run_on_model_follows_guards():
    p, ax, _ = _core("vars x, y; program { while (x != y) { x := f(x); } }")
    model = DataModel({"x": 0, "y": 3}, {"f": {(i,): i + 1 for i in range(3)}})
    word = run_on_model(p, model, ax)
    # x := f(x) goes through a desugaring temporary.
    step = (AssignFn("__t0", "f", ("x",)), Assign("x", "__t0"))
    assert word == ((AssumeNeq("x", "y"),) + step) * 3 + (AssumeEq("x", "y"),)
    assert build_exec_nfa(p, ax).accepts(word)


def test_run_on_model_with_post():
    p, ax, post = _core("vars x, y; program { x := f(y); } post: x == y;")
    model = DataModel({"x": 0, "y": 1}, {"f": {(1,): 2}})
    word = run_on_model(p, model, ax, post=post)
    assert word[-1] == AssumeNeq("x", "y")
    good = DataModel({"x": 0, "y": 1}, {"f": {(1,): 1}})
    with pytest.raises(ValueError):
        run_on_model(p, good, ax, post=post)


def test_run_on_model_undefined_function():
    p, ax, _ = _core("vars x, y; program { x := f(y); }")
    with pytest.raises(KeyError):
        run_on_model(p, DataModel({"x": 0, "y": 1}), ax)
