"""Axiom elimination by string homomorphisms.

Each supported axiom other than transitivity is removed by rewriting
executions: the homomorphism inserts the assumes that the axiom would
have implied, so that checking the image modulo fewer axioms answers the
original question.  ``build_pipeline`` orders the rewrites (relational
ones first) and leaves the transitive relations to the automaton.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from axver.errors import UnsupportedAxiom
from axver.executions import (
    AssignFn, AssumeEq, AssumeNegRel, AssumeRel, ExecNFA, Letter, apply_homomorphism,
    letter_vars, prepend_word,
)
from axver.oracle import check_supported
from axver.syntax import AUX_VAR, AxiomSet

RELATIONAL = ("refl", "irref", "symm")
FUNCTIONAL = ("comm", "idem")


@dataclass(frozen=True)
class Homomorphism:
    """Letter-to-word map eliminating one axiom on one symbol.

    ``kind`` is the property and ``symbol`` the relation or function it
    constrains.  Letters outside the trigger pattern map to themselves.
    """

    kind: str
    symbol: str

    def __post_init__(self):
        if self.kind not in RELATIONAL + FUNCTIONAL:
            raise UnsupportedAxiom(self.kind, f"no homomorphism eliminates {self.kind} on {self.symbol}")

    @property
    def tag(self) -> str:
        return f"{self.kind}:{self.symbol}"

    @property
    def relational(self) -> bool:
        return self.kind in RELATIONAL

    def image(self, a: Letter) -> tuple[Letter, ...]:
        k, s = self.kind, self.symbol
        if k in ("refl", "irref"):
            if isinstance(a, AssignFn):
                lit = AssumeRel if k == "refl" else AssumeNegRel
                return (a, lit(s, (a.x, a.x)))
            return (a,)
        if k == "symm":
            if isinstance(a, (AssumeRel, AssumeNegRel)) and a.rel == s:
                x, y = a.args
                return (a, type(a)(s, (y, x)))
            return (a,)
        if not (isinstance(a, AssignFn) and a.f == s):
            return (a,)
        if k == "comm":
            x, y = a.args
            if a.x in a.args:
                # Reading the operands after the assignment would be wrong,
                # so the swapped application is computed first.
                return (AssignFn(AUX_VAR, s, (y, x)), a, AssumeEq(a.x, AUX_VAR))
            return (a, AssignFn(AUX_VAR, s, (y, x)), AssumeEq(a.x, AUX_VAR))
        # idem: the result applied once more must give itself back.
        return (a, AssignFn(AUX_VAR, s, (a.x,)), AssumeEq(a.x, AUX_VAR))

    def prologue(self, variables: Iterable[str]) -> tuple[Letter, ...]:
        """Assumes covering the initial values, which no assignment produced.

        Only reflexivity and irreflexivity constrain every element; the
        image of an assignment covers computed values, and this covers the
        rest.
        """
        if self.kind == "refl":
            return tuple(AssumeRel(self.symbol, (v, v)) for v in variables if v != AUX_VAR)
        if self.kind == "irref":
            return tuple(AssumeNegRel(self.symbol, (v, v)) for v in variables if v != AUX_VAR)
        return ()

    def apply(self, word: Sequence[Letter], variables: Iterable[str] = (),
              prologue: bool = True) -> tuple[Letter, ...]:
        names = tuple(dict.fromkeys(tuple(variables) + letter_vars(word)))
        out = list(self.prologue(names)) if prologue else []
        for a in word:
            out.extend(self.image(a))
        return tuple(out)

    def __str__(self):
        return f"h[{self.tag}]"


def homomorphism_for(kind: str, symbol: str) -> Homomorphism:
    if kind in ("trans", "sto"):
        raise UnsupportedAxiom(kind, f"{kind} on {symbol} has no homomorphism; "
                                     "the automaton handles it")
    return Homomorphism(kind, symbol)


@dataclass(frozen=True)
class Pipeline:
    translate_sto: frozenset[str] = frozenset()
    hom_sequence: tuple[Homomorphism, ...] = ()
    residual: frozenset[str] = frozenset()
    axioms: AxiomSet = field(default_factory=AxiomSet, compare=False)

    @property
    def residual_axioms(self) -> AxiomSet:
        """The axioms left for the automaton: transitivity only."""
        return AxiomSet.of(rel={r: {"trans"} for r in self.residual})

    def image(self, a: Letter) -> tuple[Letter, ...]:
        word = (a,)
        for h in self.hom_sequence:
            word = tuple(b for x in word for b in h.image(x))
        return word

    def prologue(self, variables: Iterable[str]) -> tuple[Letter, ...]:
        """Initial-value assumes of every step, pushed through the later steps."""
        variables = tuple(variables)
        out: list[Letter] = []
        for i, h in enumerate(self.hom_sequence):
            for a in h.prologue(variables):
                word = (a,)
                for later in self.hom_sequence[i + 1:]:
                    word = tuple(b for x in word for b in later.image(x))
                out.extend(word)
        return tuple(out)

    def apply(self, word: Sequence[Letter], variables: Iterable[str] = ()) -> tuple[Letter, ...]:
        """Instrument a single execution (already translated for total orders)."""
        variables = tuple(dict.fromkeys(tuple(variables) + letter_vars(word)))
        return self.prologue(variables) + tuple(b for a in word for b in self.image(a))

    def describe(self) -> list[str]:
        lines = [f"translate {r} (total order)" for r in sorted(self.translate_sto)]
        lines += [str(h) for h in self.hom_sequence]
        lines += [f"automaton: {r} transitive" for r in sorted(self.residual)]
        return lines


def build_pipeline(ax: AxiomSet) -> Pipeline:
    """Order the eliminations: relational properties, then functional ones."""
    check_supported(ax)
    rel = []
    for r, _ in ax.rel_props:
        props = ax.effective(r)
        rel += [Homomorphism(p, r) for p in RELATIONAL if p in props]
    fun = []
    for f, props in ax.fn_props:
        fun += [Homomorphism(p, f) for p in FUNCTIONAL if p in props]
    rel.sort(key=lambda h: (h.symbol, h.kind))
    fun.sort(key=lambda h: (h.symbol, h.kind))
    return Pipeline(frozenset(ax.sto), tuple(rel + fun), frozenset(ax.transitive), ax)


def instrument(n: ExecNFA, p: Pipeline) -> ExecNFA:
    """Fold the pipeline's homomorphisms over ``n`` and prepend the prologue."""
    for h in p.hom_sequence:
        n = apply_homomorphism(n, h)
    return prepend_word(n, p.prologue(n.all_variables()))
