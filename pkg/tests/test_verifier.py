import pytest

from axver import oracle, verifier
from axver.errors import StateLimitExceeded, UnsupportedAxiom
from axver.executions import (
    AssumeNegRel, append_post_violation, build_exec_nfa, parse_execution,
)
from axver.syntax import AxiomSet, load

SMALL = [
    ("vars x, y, z; program { x := f(y); if (x == z) then { z := y; } } post: z != y;",
     "refuted"),
    ("vars x, y; program { while (x != y) { x := f(x); } } post: x == y;", "verified"),
    ("vars x, y, z; program { while (x != y) { x := f(x); if (R(x, z)) then { z := x; } } }"
     " post: R(x, z) => x == z;", "refuted"),
    ("axioms { relation R: transitive; } vars x, y, z; program {"
     " assume(R(x, y)); assume(R(y, z)); } post: R(x, z);", "verified"),
    ("vars x, y, z; program { assume(R(x, y)); assume(R(y, z)); } post: R(x, z);", "refuted"),
    ("axioms { relation R: symmetric; } vars x, y; program { assume(R(x, y)); }"
     " post: R(y, x);", "verified"),
    ("axioms { function f: commutative; } vars x, y, a, b; program {"
     " a := f(x, y); b := f(y, x); } post: a == b;", "verified"),
    ("vars x, y, a, b; program { a := f(x, y); b := f(y, x); } post: a == b;", "refuted"),
]


def _load(source):
    p, _sig, ax, post = load(source)
    return p, ax, post


@pytest.mark.parametrize("source,outcome", SMALL)
def test_small_programs(source, outcome):
    p, ax, post = _load(source)
    v = verifier.verify(p, post, ax)
    assert v.outcome == outcome
    assert not v.notes


@pytest.mark.parametrize("source,outcome", [s for s in SMALL if s[1] == "refuted"])
def test_witness_is_shortest(source, outcome):
    p, ax, post = _load(source)
    v = verifier.verify(p, post, ax)
    found = verifier.counterexamples(p, post, ax, max_len=len(v.counterexample))
    assert found
    assert min(map(len, found)) == len(v.counterexample)
    shorter = verifier.counterexamples(p, post, ax, max_len=len(v.counterexample) - 1)
    assert shorter == []


@pytest.mark.parametrize("source,outcome", [s for s in SMALL if s[1] == "refuted"])
def test_counterexample_is_valid(source, outcome):
    p, ax, post = _load(source)
    v = verifier.verify(p, post, ax)
    violating = append_post_violation(build_exec_nfa(p, ax), post, ax)
    assert violating.accepts(v.counterexample)
    assert oracle.is_feasible(v.counterexample, ax)


def test_sorted_search(corpus):
    p, ax, post = _load(corpus("sorted_search.axv"))
    assert verifier.check_coherence(p, ax).outcome == "coherent"
    v = verifier.verify(p, post, ax)
    assert v.outcome == "verified"
    assert v.stats["states"] <= 10**6
    free = verifier.verify(p, post, AxiomSet())
    assert free.outcome == "refuted" and not free.notes
    assert oracle.is_feasible(free.counterexample)
    assert not oracle.is_feasible(free.counterexample, ax.replace_sto_with_spo())


def test_verbatim_sorted_search_is_incoherent(corpus):
    p, ax, post = _load(corpus("sorted_search_verbatim.axv"))
    v = verifier.verify(p, post, ax)
    assert v.outcome == "incoherent"
    assert not oracle.is_coherent(v.counterexample, ax)


def test_incoherent_program(corpus):
    p, ax, _post = _load(corpus("recompute_dropped.axv"))
    v = verifier.check_coherence(p, ax)
    assert v.outcome == "incoherent" and v.violation in ("memoizing", "early-assume")
    verdict = oracle.is_coherent(v.counterexample, ax)
    assert not verdict
    assert verdict.violation.position == len(v.counterexample) - 1


def test_threads_give_identical_results(corpus):
    for name in ("sorted_search.axv", "reach_chain.axv", "recompute_dropped.axv"):
        p, ax, post = _load(corpus(name))
        one = verifier.verify(p, post, ax)
        two = verifier.verify(p, post, ax, threads=3)
        assert (one.outcome, one.counterexample, one.stats["states"]) == \
            (two.outcome, two.counterexample, two.stats["states"])


def test_state_limit(corpus):
    p, ax, post = _load(corpus("sorted_search.axv"))
    with pytest.raises(StateLimitExceeded):
        verifier.verify(p, post, ax, max_states=50)


def test_report_schema():
    p, ax, post = _load(SMALL[0][0])
    report = verifier.verify(p, post, ax).report()
    assert set(report) >= {"outcome", "counterexample", "stats", "axioms_echo"}
    assert set(report["stats"]) >= {"states", "frontier_peak", "millis"}
    assert all(isinstance(a, str) for a in report["counterexample"])
    p, ax, post = _load(SMALL[1][0])
    assert verifier.verify(p, post, ax).report()["counterexample"] is None


def test_worked_example_trace():
    rho = parse_execution("z1 := f(x, y) · z2 := f(y, x) · z3 := g(z1) · z4 := g(z2)"
                          " · z3 := z5 · z6 := g(z1)")
    r = verifier.check_trace(rho)
    assert r.outcome == "incoherent" and r.agree
    assert r.report()["oracle"]["violation_letter"] == 6
    r = verifier.check_trace(rho, AxiomSet.of(fn={"f": {"comm"}}))
    assert r.outcome == "feasible" and r.agree


def test_trace_infeasible():
    rho = parse_execution("assume(R(x, y)) · assume(!R(x, z)) · assume(R(y, z))")
    r = verifier.check_trace(rho, AxiomSet.of(rel={"R": {"trans"}}))
    assert r.outcome == "infeasible" and r.agree and r.infeasible_at == 2
    assert r.violated_atom == "assume(R(y, z))"


def test_trace_rejects_negated_total_order():
    with pytest.raises(UnsupportedAxiom):
        verifier.check_trace((AssumeNegRel("lt", ("x", "y")),), AxiomSet.of(rel={"lt": {"sto"}}))


def test_load_trace(corpus):
    rho, ax = verifier.load_trace(corpus("memoizing_comm.trace"))
    assert ax.fn("f") == {"comm"} and len(rho) == 6
    with pytest.raises(UnsupportedAxiom):
        verifier.load_trace(corpus("assoc_word.trace"))
    rho, ax = verifier.load_trace(corpus("assoc_word_free.trace"))
    assert verifier.check_trace(rho, ax).agree
