"""Coherence checking and verification of programs modulo axioms.

Both decision procedures explore, breadth first, the product of an
instrumented execution NFA with the streaming congruence-closure kernel.
Product nodes are ``(nfa_state, kernel_state)`` pairs and are never
revisited.  The first goal node found at the lowest depth gives a
shortest witness, which is mapped back to the program's own letters
through the provenance the NFA edges carry and re-checked against the
oracle before it is reported.
"""

from __future__ import annotations

import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from axver import oracle
from axver.errors import StateLimitExceeded, UnsupportedAxiom
from axver.executions import (
    AssignFn, AssumeNegRel, AssumeRel, Edge, ExecNFA, Letter, append_post_violation,
    build_exec_nfa, letter_vars, parse_execution,
)
from axver.instrumentation import Pipeline, build_pipeline, instrument
from axver.scc_automaton import VIOLATION_KINDS, Space, kernel
from axver.syntax import (
    AxiomSet, PostCondition, Program, Signature, parse_program, validate_axioms,
)

OUTCOMES = ("verified", "refuted", "incoherent", "coherent", "unsupported")


@dataclass
class Verdict:
    """Result of ``check_coherence`` or ``verify``.

    ``counterexample`` is written in the program's letters; ``witness``
    is the instrumented word the automaton actually read.
    """

    outcome: str
    counterexample: tuple[Letter, ...] | None = None
    witness: tuple[Letter, ...] | None = None
    violation: str | None = None
    stats: dict = field(default_factory=dict)
    axioms: AxiomSet = field(default_factory=AxiomSet)
    notes: list[str] = field(default_factory=list)

    def report(self) -> dict:
        ce = None if self.counterexample is None else [str(a) for a in self.counterexample]
        out = {"outcome": self.outcome, "counterexample": ce, "stats": dict(self.stats),
               "axioms_echo": self.axioms.echo()}
        if self.violation:
            out["violation"] = self.violation
        if self.notes:
            out["notes"] = list(self.notes)
        return out


# --------------------------------------------------------------------------
# Product exploration
# --------------------------------------------------------------------------


@dataclass
class _Search:
    """Breadth-first product search.

    In coherence mode the goal is any transition flagging a violation;
    otherwise it is reaching an accepting NFA state without rejecting.
    """

    nfa: ExecNFA
    space: Space
    trans: frozenset
    coherence: bool
    max_states: int | None = None
    threads: int = 1

    def __post_init__(self):
        self.adj = self.nfa.adjacency()
        self.codes = {}
        for e in self.nfa.edges:
            if e.letter not in self.codes:
                self.codes[e.letter] = self.space.encode(e.letter)
        self.parent: dict = {}
        self.states = 0
        self.frontier_peak = 0
        self.violation = None

    def _expand(self, chunk):
        """Successors of a frontier chunk; pure, so chunks may run concurrently."""
        out = []
        trans, aux, codes, adj = self.trans, self.space.aux, self.codes, self.adj
        step = kernel.step
        for node in chunk:
            s, q = node
            for e in adj[s]:
                q2, v = step(q, codes[e.letter], trans, aux)
                if q2 is None:
                    continue
                out.append((node, e, (e.dst, q2), v))
        return out

    def run(self):
        """Return the goal path as a list of edges, or None."""
        start = (self.nfa.initial, kernel.initial(len(self.space), self.coherence))
        self.parent = {start: None}
        if not self.coherence and start[0] in self.nfa.accepting:
            return []
        frontier = [start]
        pool = ThreadPoolExecutor(self.threads) if self.threads > 1 else None
        try:
            while frontier:
                self.frontier_peak = max(self.frontier_peak, len(frontier))
                if pool is None:
                    results = [self._expand(frontier)]
                else:
                    size = -(-len(frontier) // self.threads)
                    chunks = [frontier[i:i + size] for i in range(0, len(frontier), size)]
                    results = list(pool.map(self._expand, chunks))
                nxt = []
                # Merging in chunk order keeps the result independent of scheduling.
                for part in results:
                    for node, e, child, v in part:
                        if self.coherence and v != kernel.OK:
                            self.violation = VIOLATION_KINDS[v]
                            return self._path(node) + [e]
                        if child in self.parent:
                            continue
                        self.parent[child] = (node, e)
                        if self.max_states is not None and len(self.parent) > self.max_states:
                            raise StateLimitExceeded(self.max_states)
                        if not self.coherence and child[0] in self.nfa.accepting:
                            return self._path(child)
                        nxt.append(child)
                frontier = nxt
            return None
        finally:
            self.states = len(self.parent)
            if pool is not None:
                pool.shutdown()

    def _path(self, node) -> list[Edge]:
        edges = []
        while self.parent[node] is not None:
            node, e = self.parent[node]
            edges.append(e)
        edges.reverse()
        return edges


def _preimage(edges: Sequence[Edge]) -> tuple[Letter, ...]:
    """Program letters whose images the path spells (the prologue has none)."""
    return tuple(e.origin for e in edges if e.head and e.origin is not None)


def _stats(search: _Search, t0: float) -> dict:
    return {"states": search.states, "frontier_peak": search.frontier_peak,
            "millis": round((time.perf_counter() - t0) * 1000, 1)}


def _prepare(p: Program, ax: AxiomSet) -> tuple[Pipeline, ExecNFA]:
    pipeline = build_pipeline(ax)
    return pipeline, build_exec_nfa(p, ax)


def _coherence_search(n: ExecNFA, pipeline: Pipeline, ax: AxiomSet, max_states, threads, t0,
                      found: str = "incoherent", ok: str = "coherent") -> Verdict:
    inst = instrument(n, pipeline).prefix_closed()
    space = Space(inst.all_variables())
    search = _Search(inst, space, frozenset(), True, max_states, threads)
    path = search.run()
    if path is None:
        return Verdict(ok, stats=_stats(search, t0), axioms=ax)
    witness = tuple(e.letter for e in path)
    verdict = Verdict(found, _preimage(path), witness, search.violation, _stats(search, t0), ax)
    check = oracle.is_coherent(witness, AxiomSet(), inst.all_variables())
    if check.coherent:
        verdict.notes.append("the oracle does not confirm this violation")
    return verdict


def check_coherence(p: Program, ax: AxiomSet = AxiomSet(), *, max_states: int | None = None,
                    threads: int = 1) -> Verdict:
    """Decide whether every execution of ``p`` is coherent modulo ``ax``."""
    t0 = time.perf_counter()
    pipeline, n = _prepare(p, ax)
    return _coherence_search(n, pipeline, ax, max_states, threads, t0)


def verify(p: Program, post: PostCondition, ax: AxiomSet = AxiomSet(), *,
           max_states: int | None = None, threads: int = 1) -> Verdict:
    """Decide whether ``post`` holds after every feasible execution of ``p``.

    Coherence is a precondition; it is checked on the executions of
    ``p; assume(!post)`` first and a failure is reported as incoherent.
    """
    t0 = time.perf_counter()
    pipeline, n = _prepare(p, ax)
    violating = append_post_violation(n, post, ax)
    return verify_language(violating, pipeline, max_states=max_states, threads=threads, t0=t0)


def verify_language(violating: ExecNFA, pipeline: Pipeline, *, max_states: int | None = None,
                    threads: int = 1, t0: float | None = None) -> Verdict:
    """Emptiness of the feasible part of ``violating`` under ``pipeline``.

    ``violating`` must already carry any total-order translation; this is
    what lets a translated language be re-checked under a different
    pipeline.
    """
    t0 = time.perf_counter() if t0 is None else t0
    ax = pipeline.axioms
    gate = _coherence_search(violating, pipeline, ax, max_states, threads, t0)
    if gate.outcome == "incoherent":
        return gate
    inst = instrument(violating, pipeline).without_epsilon()
    space = Space(inst.all_variables(), pipeline.residual)
    search = _Search(inst, space, pipeline.residual, False, max_states, threads)
    path = search.run()
    stats = _stats(search, t0)
    stats["states"] += gate.stats["states"]
    stats["frontier_peak"] = max(stats["frontier_peak"], gate.stats["frontier_peak"])
    if path is None:
        return Verdict("verified", stats=stats, axioms=ax)
    witness = tuple(e.letter for e in path)
    ce = _preimage(path)
    verdict = Verdict("refuted", ce, witness, stats=stats, axioms=ax)
    if not violating.accepts(ce):
        verdict.notes.append("the counterexample is not an execution of the program")
    if not (oracle.is_feasible(witness, pipeline.residual_axioms)
            and oracle.is_feasible(ce, ax)):
        verdict.notes.append("the oracle finds the counterexample infeasible")
    return verdict


def counterexamples(p: Program, post: PostCondition, ax: AxiomSet = AxiomSet(), *,
                    max_len: int, limit: int = 100) -> list[tuple[Letter, ...]]:
    """Feasible executions of ``p; assume(!post)`` up to ``max_len`` letters.

    Unlike ``verify`` this walks paths rather than product states, so it
    lists distinct witnesses in order of length.  Only for small bounds.
    """
    pipeline, n = _prepare(p, ax)
    violating = append_post_violation(n, post, ax)
    inst = instrument(violating, pipeline).without_epsilon()
    space = Space(inst.all_variables(), pipeline.residual)
    adj = inst.adjacency()
    codes = {e.letter: space.encode(e.letter) for e in inst.edges}
    found: list = []
    seen = set()
    level = [(inst.initial, kernel.initial(len(space), False), ())]
    # Every cycle of the NFA passes a program letter, so the bound ends the walk.
    while level:
        nxt = []
        for s, q, path in level:
            if s in inst.accepting:
                ce = _preimage(path)
                if len(ce) <= max_len and ce not in seen:
                    seen.add(ce)
                    found.append(ce)
                    if len(found) >= limit:
                        return found
            for e in adj[s]:
                if len(_preimage(path + (e,))) > max_len:
                    continue
                q2, _ = kernel.step(q, codes[e.letter], space.trans, space.aux)
                if q2 is not None:
                    nxt.append((e.dst, q2, path + (e,)))
        level = nxt
    return found


# --------------------------------------------------------------------------
# Single traces
# --------------------------------------------------------------------------


@dataclass
class TraceReport:
    """Oracle and automaton verdicts on one execution, side by side."""

    trace: tuple[Letter, ...]
    instrumented: tuple[Letter, ...]
    oracle_feasible: bool
    violated_atom: str | None
    infeasible_at: int | None
    oracle_coherent: bool
    oracle_violation: str | None
    oracle_violation_at: int | None
    automaton_feasible: bool
    automaton_coherent: bool
    automaton_violation: str | None
    automaton_violation_at: int | None

    @property
    def agree(self) -> bool:
        """Coherence verdicts match, and on coherent traces feasibility does too."""
        if self.oracle_coherent != self.automaton_coherent:
            return False
        if self.oracle_violation_at != self.automaton_violation_at:
            return False
        return not self.oracle_coherent or self.oracle_feasible == self.automaton_feasible

    @property
    def outcome(self) -> str:
        if not self.oracle_coherent:
            return "incoherent"
        return "feasible" if self.oracle_feasible else "infeasible"

    def report(self) -> dict:
        """JSON-ready summary; letter numbers here count from 1."""

        def letter(i):
            return None if i is None else i + 1

        return {
            "outcome": self.outcome,
            "agree": self.agree,
            "oracle": {"feasible": self.oracle_feasible, "violated_atom": self.violated_atom,
                       "infeasible_letter": letter(self.infeasible_at),
                       "coherent": self.oracle_coherent, "violation": self.oracle_violation,
                       "violation_letter": letter(self.oracle_violation_at)},
            "automaton": {"feasible": self.automaton_feasible,
                          "coherent": self.automaton_coherent,
                          "violation": self.automaton_violation,
                          "violation_letter": letter(self.automaton_violation_at)},
            "instrumented": [str(a) for a in self.instrumented],
        }


def _instrument_word(rho: Sequence[Letter], pipeline: Pipeline, variables) -> tuple[list, list]:
    """Instrumented word and, per letter, the index of the letter it came from."""
    word = list(pipeline.prologue(variables))
    origin = [None] * len(word)
    for i, a in enumerate(rho):
        image = pipeline.image(a)
        word += image
        origin += [i] * len(image)
    return word, origin


def check_trace(rho: Sequence[Letter], ax: AxiomSet = AxiomSet()) -> TraceReport:
    """Judge one execution with the oracle and with the automata.

    Disagreements are reported through ``agree``, never hidden.  Negated
    atoms of a strict total order are rejected: a single trace cannot
    carry the case split they stand for.
    """
    rho = tuple(rho)
    pipeline = build_pipeline(ax)
    for a in rho:
        if isinstance(a, AssumeNegRel) and a.rel in ax.sto:
            raise UnsupportedAxiom(
                "sto-negation", f"{a}: write the case split lt(y, x) or x = y as separate traces")
    variables = letter_vars(rho)
    model = oracle.minimal_model(rho, ax)
    infeasible_at = None if model.consistent else oracle.first_infeasible_position(rho, ax)
    violated = None if infeasible_at is None else str(rho[infeasible_at])
    coherence = oracle.is_coherent(rho, ax)

    word, origin = _instrument_word(rho, pipeline, variables)
    space = Space(letter_vars(word), pipeline.residual)
    q = kernel.initial(len(space), False)
    for a in word:
        q, _ = kernel.step(q, space.encode(a), space.trans, space.aux)
        if q is None:
            break
    c = kernel.initial(len(space), True)
    auto_violation = auto_at = None
    for i, a in enumerate(word):
        c, v = kernel.step(c, space.encode(a), frozenset(), space.aux)
        if v != kernel.OK:
            auto_violation, auto_at = VIOLATION_KINDS[v], origin[i]
            break
    ov = coherence.violation
    return TraceReport(
        rho, tuple(word), model.consistent, violated, infeasible_at,
        coherence.coherent, ov.kind if ov else None, ov.position if ov else None,
        q is not None, auto_violation is None, auto_violation, auto_at,
    )


_AXIOMS_BLOCK = re.compile(r"^\s*axioms\s*\{.*?\}", re.S)


def load_trace(source: str) -> tuple[tuple[Letter, ...], AxiomSet]:
    """Parse a trace file: an optional ``axioms { ... }`` block, then one letter per line."""
    ax = AxiomSet()
    sig = Signature()
    m = _AXIOMS_BLOCK.match(source)
    if m:
        parsed = parse_program(m.group(0))
        ax, sig = parsed.axioms, parsed.signature
        # Keep line numbers of the letters meaningful.
        source = "\n" * m.group(0).count("\n") + source[m.end():]
    rho = parse_execution(source)
    for a in rho:
        if isinstance(a, AssignFn):
            sig.declare_function(a.f, len(a.args))
        elif isinstance(a, (AssumeRel, AssumeNegRel)):
            sig.declare_relation(a.rel, len(a.args))
    return rho, validate_axioms(ax, sig)


__all__ = [
    "OUTCOMES", "TraceReport", "Verdict", "check_coherence", "check_trace", "counterexamples",
    "load_trace", "verify", "verify_language",
]
