import random

import pytest

import figure2
from gen import letters, random_execution
from axver import oracle
from axver.errors import UnsupportedAxiom
from axver.executions import (
    AssignFn, AssumeEq, AssumeNegRel, AssumeNeq, AssumeRel, Eq, app, init, parse_execution,
)
from axver.syntax import AxiomSet, parse_program

X, Y = init("x"), init("y")
TRANS = AxiomSet.of(rel={"R": {"trans"}})
SPO = AxiomSet.of(rel={"R": {"irref", "trans"}})
COMM = AxiomSet.of(fn={"f": {"comm"}})

SIGMA = "assume(x = y) · x' := f(x) · y' := f(y) · x' := f(x') · y' := f(y')"
FIRST = parse_execution(SIGMA + " · assume(x = y)")
SECOND = parse_execution("z1 := f(x, y) · z2 := f(y, x) · z3 := g(z1) · z4 := g(z2)"
                         " · z3 := z5 · z6 := g(z1)")


def test_closure_single_equality():
    part = oracle.closure([X, Y], [Eq(X, Y)])
    assert len(part.classes()) == 1


def test_closure_commutativity():
    fxy, fyx = app("f", X, Y), app("f", Y, X)
    terms = [app("g", fxy), app("g", fyx)]
    assert not oracle.closure(terms, []).same(*terms)
    assert oracle.closure(terms, [], COMM).same(*terms)


def test_closure_idempotence():
    fx = app("f", X)
    part = oracle.closure([fx, app("f", fx)], [], AxiomSet.of(fn={"f": {"idem"}}))
    assert part.same(fx, app("f", fx))
    assert not part.same(X, fx)


def test_closure_is_subterm_closed():
    part = oracle.closure([app("f", app("g", X))], [])
    assert app("g", X) in part and X in part


def _random_terms(rng, n):
    pool = [X, Y, init("z")]
    for _ in range(n):
        if rng.random() < 0.5:
            pool.append(app("f", rng.choice(pool)))
        else:
            pool.append(app("g", rng.choice(pool), rng.choice(pool)))
    return pool


def test_closure_fixpoint_and_monotone():
    rng = random.Random(11)
    ax = AxiomSet.of(fn={"g": {"comm"}, "f": {"idem"}})
    for _ in range(150):
        terms = _random_terms(rng, 6)
        eqs = [Eq(rng.choice(terms), rng.choice(terms)) for _ in range(rng.randint(0, 3))]
        part = oracle.closure(terms, eqs, ax)
        # Adding the equalities already implied changes nothing.
        implied = [Eq(t, u) for c in part.classes() for t in c for u in c]
        again = oracle.closure(terms, eqs + implied, ax)
        assert sorted(map(sorted, map(lambda c: map(str, c), again.classes()))) == \
            sorted(map(sorted, map(lambda c: map(str, c), part.classes())))
        extra = Eq(rng.choice(terms), rng.choice(terms))
        bigger = oracle.closure(terms, eqs + [extra], ax)
        for c in part.classes():
            assert len({bigger.find(t) for t in c}) == 1


def test_minimal_model_equality():
    m = oracle.minimal_model((AssumeEq("x", "y"),))
    assert m.consistent and m.element(X) == m.element(Y)


def test_minimal_model_spo_cycle():
    rho = (AssumeRel("R", ("x", "y")), AssumeRel("R", ("y", "x")))
    m = oracle.minimal_model(rho, SPO)
    x = m.element(X)
    assert (x, x) in m.rel_pos["R"]
    assert not m.consistent


def test_minimal_model_derived_negative():
    rho = (AssumeRel("R", ("x", "y")), AssumeNegRel("R", ("x", "z")))
    m = oracle.minimal_model(rho, TRANS)
    assert (m.element(Y), m.element(init("z"))) in m.rel_neg["R"]
    assert m.consistent
    assert not oracle.is_feasible(rho + (AssumeRel("R", ("y", "z")),), TRANS)


def test_fn_table():
    m = oracle.minimal_model(parse_execution("y := f(x) · assume(y = x)"))
    x = m.element(X)
    assert m.fn_table["f"][(x,)] == x


def test_sorted_search_model(corpus):
    _p, ax, _post, word = figure2.word(corpus("sorted_search.axv"))
    assert oracle.is_feasible(word)
    assert not oracle.is_feasible(word, ax)
    assert not oracle.is_feasible(word, ax.replace_sto_with_spo())


def test_disequality_contradiction():
    assert not oracle.is_feasible((AssumeEq("x", "y"), AssumeNeq("x", "y")))
    assert oracle.first_infeasible_position(
        parse_execution("y := f(x) · assume(x = y) · z := f(y) · assume(z != y)")) == 3


def test_sto_negative_atoms_need_translation():
    sto = AxiomSet.of(rel={"lt": {"sto"}})
    with pytest.raises(ValueError):
        oracle.is_feasible((AssumeNegRel("lt", ("x", "y")),), sto)


def test_unsupported_axiom_is_refused():
    ax = parse_program("axioms { function f: associative; } vars x; program { skip; }").axioms
    with pytest.raises(UnsupportedAxiom):
        oracle.is_feasible((), ax)


def test_entails_eq():
    rho = parse_execution("assume(x = y) · x' := f(x) · y' := f(y)")
    assert oracle.entails_eq(rho, AxiomSet(), app("f", X), app("f", Y))
    assert not oracle.entails_eq((), AxiomSet(), X, Y)
    rho = parse_execution("z1 := f(x, y) · z2 := f(y, x)")
    assert oracle.entails_eq(rho, COMM, app("f", X, Y), app("f", Y, X))
    assert not oracle.entails_eq(rho, AxiomSet(), app("f", X, Y), app("f", Y, X))


def test_entails_eq_ignores_relational_atoms():
    rng = random.Random(5)
    alphabet = letters(["x", "y", "z"])
    for _ in range(300):
        rho = random_execution(rng, alphabet, 8)
        bare = tuple(a for a in rho if not isinstance(a, (AssumeRel, AssumeNegRel, AssumeNeq)))
        terms = sorted(oracle.minimal_model(rho).class_of, key=str)
        t, u = rng.choice(terms), rng.choice(terms)
        assert oracle.entails_eq(rho, TRANS, t, u) == oracle.entails_eq(bare, TRANS, t, u)


def test_feasibility_is_prefix_closed():
    rng = random.Random(8)
    alphabet = letters(["x", "y", "z"])
    for _ in range(300):
        rho = random_execution(rng, alphabet, 10)
        pos = oracle.first_infeasible_position(rho, TRANS)
        for i in range(len(rho) + 1):
            assert oracle.is_feasible(rho[:i], TRANS) == (pos is None or i <= pos)


def test_first_worked_example_is_coherent():
    assert oracle.is_coherent(FIRST)


def test_second_worked_example():
    verdict = oracle.is_coherent(SECOND)
    assert not verdict
    assert verdict.violation.position == 5
    assert verdict.violation.kind == "memoizing"
    assert oracle.is_coherent(SECOND, COMM)


def test_trivial_coherent():
    assert oracle.is_coherent((AssignFn("x", "f", ("x",)),))


def test_early_assume_violation():
    # f(y) is dropped before the assume makes it equal to the held f(x).
    rho = parse_execution("x' := f(x) · y' := f(y) · y' := x · assume(x = y)")
    verdict = oracle.is_coherent(rho)
    assert not verdict and verdict.violation.kind == "early-assume"
    assert verdict.violation.position == 3
    # Without a dropped superterm the same assume is early.
    assert oracle.is_coherent(parse_execution("y' := f(y) · y' := x · assume(x = y)"))


def test_tracker_matches_batch_check():
    rng = random.Random(9)
    alphabet = letters(["x", "y", "z"], relations={})
    for _ in range(300):
        rho = random_execution(rng, alphabet, 8)
        tracker = oracle.CoherenceTracker(AxiomSet(), ["x", "y", "z"])
        first = None
        for i, a in enumerate(rho):
            v = tracker.push(a)
            if v is not None and first is None:
                first = i
        verdict = oracle.is_coherent(rho, AxiomSet(), ["x", "y", "z"])
        assert (verdict.violation.position if not verdict else None) == first


def test_tracker_copy_is_independent():
    t = oracle.CoherenceTracker(AxiomSet(), ["x", "y"])
    t.push(AssignFn("x", "f", ("y",)))
    c = t.copy()
    c.push(AssumeEq("x", "y"))
    assert t.feasible() and len(t.ev.atoms) == 0 and len(c.ev.atoms) == 1
