"""Term-level reference semantics.

Everything here works on explicit ground terms: congruence closure over
the computed terms of an execution, the minimal model built from its
assumptions, and direct checks of feasibility and coherence.  It is slow
but simple, and the automata are tested against it.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from axver.errors import UnsupportedAxiom
from axver.executions import (
    ASSUMES, AssignFn, AssumeEq, AssumeNegRel, Eq, Evaluator, Letter, Neq, NegRel, Rel, Term,
    assigned_var, letter_vars,
)
from axver.syntax import AUX_VAR, AxiomSet

NO_AXIOMS = AxiomSet()


class TermPartition:
    """Union-find over a subterm-closed set of terms.

    Class ids are the index of the first member in ``terms`` order.
    """

    def __init__(self, terms: Sequence[Term], parent: list[int]):
        self.terms = tuple(terms)
        self.index = {t: i for i, t in enumerate(self.terms)}
        self._root = [self._find(parent, i) for i in range(len(parent))]

    @staticmethod
    def _find(parent, i):
        while parent[i] != i:
            i = parent[i]
        return i

    def find(self, t: Term) -> int:
        return self._root[self.index[t]]

    def same(self, a: Term, b: Term) -> bool:
        return self.find(a) == self.find(b)

    def __contains__(self, t: Term) -> bool:
        return t in self.index

    def members(self, t: Term) -> frozenset[Term]:
        r = self.find(t)
        return frozenset(u for u, i in zip(self.terms, self._root) if i == r)

    def classes(self) -> list[frozenset[Term]]:
        groups: dict[int, list[Term]] = {}
        for t, r in zip(self.terms, self._root):
            groups.setdefault(r, []).append(t)
        return [frozenset(g) for _, g in sorted(groups.items())]

    def roots(self) -> list[int]:
        return list(self._root)


def _subterm_closed(terms: Iterable[Term]) -> list[Term]:
    out: dict[Term, None] = {}

    def add(t: Term):
        if t in out:
            return
        for a in t.args:
            add(a)
        out[t] = None

    for t in terms:
        add(t)
    return list(out)


def closure(terms: Iterable[Term], eqs: Iterable, ax: AxiomSet = NO_AXIOMS) -> TermPartition:
    """Least congruence over ``terms`` containing ``eqs``.

    Saturated under commutativity and idempotence for the flagged
    functions, without creating terms that are not already present.
    ``eqs`` holds ``Eq`` atoms or term pairs.
    """
    terms = _subterm_closed(terms)
    index = {t: i for i, t in enumerate(terms)}
    parent = list(range(len(terms)))

    def find(i: int) -> int:
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    def union(i: int, j: int) -> bool:
        ri, rj = find(i), find(j)
        if ri == rj:
            return False
        if ri < rj:
            parent[rj] = ri
        else:
            parent[ri] = rj
        return True

    for e in eqs:
        left, right = (e.left, e.right) if isinstance(e, Eq) else e
        union(index[left], index[right])

    comm = ax.functions_with("comm")
    idem = ax.functions_with("idem")
    apps = [(i, t.head, tuple(index[a] for a in t.args)) for i, t in enumerate(terms) if t.args]
    changed = True
    while changed:
        changed = False
        has_app: dict[str, set[int]] = defaultdict(set)
        if idem:
            for i, f, _ in apps:
                has_app[f].add(find(i))
        table: dict[tuple, int] = {}
        for i, f, args in apps:
            key = tuple(find(a) for a in args)
            if f in comm:
                key = tuple(sorted(key))
            j = table.setdefault((f, key), i)
            if j != i and union(i, j):
                changed = True
            # f(s) = s whenever s is itself (equal to) an f-application.
            if f in idem and find(args[0]) in has_app[f] and union(i, args[0]):
                changed = True
    return TermPartition(terms, parent)


# --------------------------------------------------------------------------
# Minimal model and feasibility
# --------------------------------------------------------------------------


@dataclass
class MinimalModel:
    partition: TermPartition
    universe: tuple[frozenset[Term], ...]
    class_of: dict[Term, int]
    fn_table: dict[str, dict[tuple[int, ...], int]]
    rel_pos: dict[str, frozenset[tuple[int, ...]]]
    rel_neg: dict[str, frozenset[tuple[int, ...]]]
    consistent: bool
    conflicts: tuple[str, ...] = field(default=())

    def element(self, t: Term) -> int:
        return self.class_of[t]

    def describe(self) -> str:
        lines = [f"e{i} = {{{', '.join(sorted(map(str, c)))}}}" for i, c in enumerate(self.universe)]
        for r, tuples in sorted(self.rel_pos.items()):
            lines.append(f"{r}+ = {sorted(tuples)}")
        for r, tuples in sorted(self.rel_neg.items()):
            lines.append(f"{r}- = {sorted(tuples)}")
        lines.append("consistent" if self.consistent else "inconsistent: " + "; ".join(self.conflicts))
        return "\n".join(lines)


def check_supported(ax: AxiomSet) -> None:
    for kind, text in ax.rejected:
        raise UnsupportedAxiom(kind, text)


def transitive_closure(pairs: Iterable[tuple[int, int]]) -> set[tuple[int, int]]:
    succ: dict[int, set[int]] = defaultdict(set)
    for a, b in pairs:
        succ[a].add(b)
    out = set()
    for a in list(succ):
        seen, stack = set(), list(succ[a])
        while stack:
            b = stack.pop()
            if b not in seen:
                seen.add(b)
                stack.extend(succ.get(b, ()))
        out.update((a, b) for b in seen)
    return out


def derived_negatives(pos: set, neg: set, symmetric: bool = False) -> set:
    """Close ``neg`` under R(x,y) & !R(x,z) => !R(y,z) and R(y,z) & !R(x,z) => !R(x,y)."""
    neg = set(neg)
    succ: dict[int, set[int]] = defaultdict(set)
    pred: dict[int, set[int]] = defaultdict(set)
    for a, b in pos:
        succ[a].add(b)
        pred[b].add(a)
    work = list(neg)
    while work:
        x, z = work.pop()
        new = [(y, z) for y in succ.get(x, ())] + [(x, y) for y in pred.get(z, ())]
        if symmetric:
            new.append((z, x))
        for pair in new:
            if pair not in neg:
                neg.add(pair)
                work.append(pair)
    return neg


def _relational_closure(props: frozenset, pos: set, neg: set, n_elems: int):
    if "refl" in props:
        pos |= {(c, c) for c in range(n_elems)}
    if "symm" in props:
        pos |= {(b, a) for a, b in pos}
        neg |= {(b, a) for a, b in neg}
    if "trans" in props:
        pos = transitive_closure(pos) | pos
        neg = derived_negatives(pos, neg, "symm" in props)
    return pos, neg


def model_from_atoms(terms: Sequence[Term], atoms: Sequence, ax: AxiomSet) -> MinimalModel:
    check_supported(ax)
    eqs = [a for a in atoms if isinstance(a, Eq)]
    part = closure(terms, eqs, ax)
    number: dict[int, int] = {}
    groups: list[list[Term]] = []
    class_of: dict[Term, int] = {}
    for t, r in zip(part.terms, part.roots()):
        c = number.get(r)
        if c is None:
            c = number[r] = len(groups)
            groups.append([])
        groups[c].append(t)
        class_of[t] = c
    classes = [frozenset(g) for g in groups]
    fn_table: dict[str, dict] = defaultdict(dict)
    for t in part.terms:
        if t.args:
            fn_table[t.head][tuple([class_of[a] for a in t.args])] = class_of[t]
    pos: dict[str, set] = defaultdict(set)
    neg: dict[str, set] = defaultdict(set)
    sto = ax.sto
    conflicts = []
    for a in atoms:
        if isinstance(a, Neq) and class_of[a.left] == class_of[a.right]:
            conflicts.append(f"{a} contradicts {a.left} = {a.right}")
        elif isinstance(a, Rel):
            pos[a.rel].add(tuple(class_of[t] for t in a.args))
        elif isinstance(a, NegRel):
            if a.rel in sto:
                raise ValueError(
                    f"negative atom {a} on strict total order {a.rel}; translate the execution first")
            neg[a.rel].add(tuple(class_of[t] for t in a.args))
    rel_pos, rel_neg = {}, {}
    for r in sorted(set(pos) | set(neg) | {name for name, _ in ax.rel_props}):
        props = ax.effective(r)
        p, n = _relational_closure(props, set(pos.get(r, ())), set(neg.get(r, ())), len(classes))
        rel_pos[r], rel_neg[r] = frozenset(p), frozenset(n)
        for tup in sorted(p & n):
            conflicts.append(f"{r}{tup} is both required and excluded")
        if "irref" in props:
            for tup in sorted(p):
                if tup[0] == tup[1]:
                    conflicts.append(f"{r}{tup} violates irreflexivity")
    return MinimalModel(part, tuple(classes), class_of, dict(fn_table), rel_pos, rel_neg,
                        not conflicts, tuple(conflicts))


def minimal_model(rho: Sequence[Letter], ax: AxiomSet = NO_AXIOMS,
                  variables: Iterable[str] = ()) -> MinimalModel:
    ev = Evaluator(tuple(variables) + letter_vars(rho))
    for a in rho:
        ev.step(a)
    return model_from_atoms(list(ev.terms), ev.atoms, ax)


def is_feasible(rho: Sequence[Letter], ax: AxiomSet = NO_AXIOMS) -> bool:
    """Whether some model of ``ax`` satisfies every assumption of ``rho``."""
    return minimal_model(rho, ax).consistent


def first_infeasible_position(rho: Sequence[Letter], ax: AxiomSet = NO_AXIOMS) -> int | None:
    """Index of the letter whose assumption first makes ``rho`` infeasible."""
    if is_feasible(rho, ax):
        return None
    lo, hi = 0, len(rho)  # prefix rho[:lo] feasible, rho[:hi] not
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if is_feasible(rho[:mid], ax):
            lo = mid
        else:
            hi = mid
    return hi - 1


def entails_eq(rho: Sequence[Letter], ax: AxiomSet, t1: Term, t2: Term) -> bool:
    """Whether the equalities of ``rho`` (with ``ax``) force ``t1 = t2``."""
    ev = Evaluator(letter_vars(rho))
    for a in rho:
        ev.step(a)
    eqs = [a for a in ev.atoms if isinstance(a, Eq)]
    return closure(list(ev.terms) + [t1, t2], eqs, ax).same(t1, t2)


# --------------------------------------------------------------------------
# Coherence
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    position: int
    kind: str  # "memoizing" or "early-assume"
    witness: tuple[Term, ...]

    def __str__(self):
        return f"{self.kind} violation at letter {self.position + 1}: " + ", ".join(map(str, self.witness))


@dataclass(frozen=True)
class CoherenceVerdict:
    coherent: bool
    violation: Violation | None = None

    def __bool__(self):
        return self.coherent


class CoherenceTracker:
    """Incremental form of ``is_coherent``: feed letters one at a time.

    ``push`` returns the violation caused by the letter, if any.  The
    tracker stays usable after a violation (later letters are judged
    against the same history), and ``copy`` forks it cheaply, which is
    what exhaustive searches over executions need.
    """

    def __init__(self, ax: AxiomSet = NO_AXIOMS, variables: Iterable[str] = ()):
        check_supported(ax)
        self.ax = ax
        self.ev = Evaluator(variables)
        self.eqs: list[Eq] = []
        self.aux_live = False
        self.position = 0
        self._part: TermPartition | None = None
        self._model: tuple | None = None

    def partition(self) -> TermPartition:
        """Closure of the equalities so far over the terms so far (cached)."""
        if self._part is None or len(self._part.terms) != len(self.ev.terms):
            self._part = closure(list(self.ev.terms), self.eqs, self.ax)
        return self._part

    def copy(self) -> "CoherenceTracker":
        other = object.__new__(CoherenceTracker)
        other.ax = self.ax
        ev = object.__new__(Evaluator)
        ev.env = dict(self.ev.env)
        ev.terms = dict(self.ev.terms)
        ev.atoms = list(self.ev.atoms)
        other.ev = ev
        other.eqs = list(self.eqs)
        other.aux_live = self.aux_live
        other.position = self.position
        other._part = self._part
        other._model = self._model
        return other

    def window(self) -> list[Term]:
        return [t for v, t in self.ev.env.items() if v != AUX_VAR or self.aux_live]

    def check(self, a: Letter) -> Violation | None:
        """The violation ``a`` would cause after the letters pushed so far."""
        ev, ax, i = self.ev, self.ax, self.position
        if isinstance(a, AssignFn):
            t = ev.computed(a)
            part = closure(list(ev.terms) + [t], self.eqs, ax)
            r = part.find(t)
            earlier = next((u for u in ev.terms if part.find(u) == r), None)
            if earlier is not None and not any(part.find(w) == r for w in self.window()):
                return Violation(i, "memoizing", (t, earlier))
        elif isinstance(a, AssumeEq):
            terms = list(ev.terms)
            new = Eq(ev.value(a.x), ev.value(a.y))
            before = self.partition()
            if before.same(new.left, new.right):
                return None
            after = closure(terms, self.eqs + [new], ax)
            held = {before.find(w) for w in self.window()}
            for t in terms:
                if before.find(t) in held:
                    continue
                for u in after.members(t):
                    if not before.same(t, u):
                        return Violation(i, "early-assume", (t, u))
        return None

    def push(self, a: Letter) -> Violation | None:
        violation = self.check(a)
        self.ev.step(a)
        if not isinstance(a, ASSUMES) or isinstance(a, AssumeEq):
            self._part = None
        if isinstance(a, AssumeEq):
            self.eqs.append(self.ev.atoms[-1])
        if assigned_var(a) == AUX_VAR:
            self.aux_live = True
        elif self.aux_live and AUX_VAR in a.variables:
            self.aux_live = False
        self.position += 1
        return violation

    def model(self) -> MinimalModel:
        """Minimal model of everything pushed so far (cached).

        Terms and atoms only ever grow, so their counts identify them.
        """
        stamp = (len(self.ev.terms), len(self.ev.atoms))
        if self._model is None or self._model[0] != stamp:
            self._model = (stamp, model_from_atoms(list(self.ev.terms), self.ev.atoms, self.ax))
        return self._model[1]

    def feasible(self) -> bool:
        return self.model().consistent

    def key(self, with_atoms: bool = True) -> tuple:
        """Everything later verdicts depend on; equal keys judge extensions alike."""
        ev = self.ev
        atoms = frozenset(ev.atoms) if with_atoms else frozenset(self.eqs)
        return (frozenset(ev.terms), atoms, tuple(sorted(ev.env.items())), self.aux_live)


def is_coherent(rho: Sequence[Letter], ax: AxiomSet = NO_AXIOMS,
                variables: Iterable[str] = ()) -> CoherenceVerdict:
    """Check the memoizing and early-assume conditions on every prefix.

    The auxiliary variable used by the instrumentation only holds its
    value between its assignment and the assume that consumes it.
    """
    tracker = CoherenceTracker(ax, tuple(variables) + letter_vars(rho))
    for a in rho:
        violation = tracker.push(a)
        if violation is not None:
            return CoherenceVerdict(False, violation)
    return CoherenceVerdict(True)
