"""Streaming congruence closure over program variables.

The automaton reads an execution letter by letter and keeps only what
the current window of variables can still observe: which variables hold
equal values, which are known distinct, the function graph between their
classes and the relational facts among them.  With application history
attached it also detects coherence violations.

The transition function lives in a kernel module.  A compiled build
(``axver._ckernel``) is used when importable; ``axver._kernel`` is the
pure-Python fallback.  Setting ``AXVER_PURE_PYTHON=1`` forces the
fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

from axver import _kernel as _pykernel
from axver.executions import (
    Assign, AssignFn, AssumeEq, AssumeNegRel, AssumeNeq, AssumeRel, Letter, letter_vars,
)
from axver.syntax import AUX_VAR, AxiomSet

kernel = _pykernel
if os.environ.get("AXVER_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from axver import _ckernel as kernel  # type: ignore[no-redef]
    except ImportError:  # pragma: no cover - depends on the build
        pass

KERNEL_NAME = "compiled" if kernel is not _pykernel else "python"

VIOLATION_KINDS = {_pykernel.MEMOIZING: "memoizing", _pykernel.EARLY_ASSUME: "early-assume"}


class Space:
    """Variable numbering and the residual transitive relations.

    Letters are translated to the integer codes the kernel works on.
    The auxiliary variable is always numbered last, so it never becomes
    the representative of a class containing a program variable.
    """

    def __init__(self, variables: Iterable[str], transitive: Iterable[str] = ()):
        names = [v for v in dict.fromkeys(variables) if v != AUX_VAR]
        has_aux = AUX_VAR in set(variables)
        if has_aux:
            names.append(AUX_VAR)
        self.names = tuple(names)
        self.index = {v: i for i, v in enumerate(self.names)}
        self.trans = frozenset(transitive)
        self.aux = self.index[AUX_VAR] if has_aux else -1
        self._codes: dict = {}

    @classmethod
    def for_word(cls, word: Sequence[Letter], ax: AxiomSet = AxiomSet(),
                 variables: Iterable[str] = ()) -> "Space":
        return cls(tuple(variables) + letter_vars(word), ax.transitive)

    def __len__(self):
        return len(self.names)

    def __eq__(self, other):
        if not isinstance(other, Space):
            return NotImplemented
        return (self.names, self.trans) == (other.names, other.trans)

    def __hash__(self):
        return hash((self.names, self.trans))

    def encode(self, a: Letter) -> tuple:
        code = self._codes.get(a)
        if code is not None:
            return code
        ix = self.index
        try:
            if isinstance(a, Assign):
                code = (kernel.ASSIGN, ix[a.x], ix[a.y])
            elif isinstance(a, AssignFn):
                code = (kernel.ASSIGN_FN, ix[a.x], a.f, tuple(ix[z] for z in a.args))
            elif isinstance(a, AssumeEq):
                code = (kernel.EQ, ix[a.x], ix[a.y])
            elif isinstance(a, AssumeNeq):
                code = (kernel.NEQ, ix[a.x], ix[a.y])
            elif isinstance(a, AssumeRel):
                code = (kernel.REL, a.rel, tuple(ix[z] for z in a.args))
            elif isinstance(a, AssumeNegRel):
                code = (kernel.NEG_REL, a.rel, tuple(ix[z] for z in a.args))
            else:
                raise TypeError(f"not an execution letter: {a!r}")
        except KeyError as e:
            raise ValueError(f"variable {e.args[0]} of {a} is not in this automaton") from None
        self._codes[a] = code
        return code


@dataclass(frozen=True)
class SCCState:
    """A non-reject automaton state over a ``Space``.

    ``raw`` is the kernel tuple; equal raw tuples mean equal states.  A
    state whose ``raw[5]`` is not None also carries application history
    (a coherence state).
    """

    space: Space
    raw: tuple

    @property
    def tracks_history(self) -> bool:
        return self.raw[5] is not None

    def classes(self) -> list[tuple[str, ...]]:
        groups: dict[int, list[str]] = {}
        for i, r in enumerate(self.raw[0]):
            groups.setdefault(r, []).append(self.space.names[i])
        return [tuple(g) for _, g in sorted(groups.items())]

    def class_of(self, var: str) -> tuple[str, ...]:
        r = self.raw[0][self.space.index[var]]
        return tuple(n for n, c in zip(self.space.names, self.raw[0]) if c == r)

    def same(self, x: str, y: str) -> bool:
        ix = self.space.index
        return self.raw[0][ix[x]] == self.raw[0][ix[y]]

    def _name(self, rep: int) -> str:
        names = self.space.names
        return "{" + ",".join(sorted(names[i] for i, c in enumerate(self.raw[0]) if c == rep)) + "}"

    def disequalities(self) -> set[tuple[str, str]]:
        return {(self._name(a), self._name(b)) for a, b in self.raw[1]}

    def functions(self) -> set[tuple[str, tuple[str, ...], str]]:
        return {(f, tuple(map(self._name, args)), self._name(res)) for (f, args), res in self.raw[2]}

    def positive(self, rel: str | None = None) -> set[tuple[str, ...]]:
        return {tuple(map(self._name, args)) for r, args in self.raw[3] if rel in (None, r)}

    def negative(self, rel: str | None = None) -> set[tuple[str, ...]]:
        return {tuple(map(self._name, args)) for r, args in self.raw[4] if rel in (None, r)}

    def history(self) -> set[tuple[str, tuple[str, ...]]]:
        return {(f, tuple(map(self._name, args))) for f, args in (self.raw[5] or ())}

    def __str__(self):
        return canonicalize(self)


class _Reject:
    """The absorbing reject state."""

    def __repr__(self):
        return "REJECT"

    __str__ = __repr__

    def __reduce__(self):
        return (_reject, ())


REJECT = _Reject()


def _reject():
    return REJECT


def initial_state(variables: Iterable[str], ax: AxiomSet = AxiomSet(),
                  coherence: bool = False) -> SCCState:
    space = variables if isinstance(variables, Space) else Space(variables, ax.transitive)
    if not len(space):
        raise ValueError("the automaton needs at least one variable")
    return SCCState(space, kernel.initial(len(space), coherence))


def is_feasible_state(q) -> bool:
    return q is not REJECT


def step(q, a: Letter, ax: AxiomSet | None = None):
    """One transition of the feasibility automaton; REJECT is absorbing.

    ``ax`` may name transitive relations not known to the state's space;
    only its transitive flags are consulted.
    """
    if q is REJECT:
        return REJECT
    trans = q.space.trans if ax is None else q.space.trans | ax.transitive
    raw = q.raw if q.raw[5] is None else q.raw[:5] + (None,)
    nxt, _ = kernel.step(raw, q.space.encode(a), trans, q.space.aux)
    return REJECT if nxt is None else SCCState(q.space, nxt)


def coh_step(q: SCCState, a: Letter, ax: AxiomSet | None = None):
    """One transition of the coherence automaton.

    Returns ``(state, violation)`` where ``violation`` is None,
    ``"memoizing"`` or ``"early-assume"``.  Coherence does not depend on
    disequalities or relational facts, so those letters only move the
    auxiliary variable.
    """
    raw = q.raw if q.raw[5] is not None else q.raw[:1] + (frozenset(),) * 5
    nxt, v = kernel.step(raw, q.space.encode(a), frozenset(), q.space.aux)
    return SCCState(q.space, nxt), VIOLATION_KINDS.get(v)


def run(word: Sequence[Letter], ax: AxiomSet = AxiomSet(), variables: Iterable[str] = ()):
    """Final feasibility state after ``word`` (REJECT if it rejects)."""
    q = initial_state(Space.for_word(word, ax, variables))
    for a in word:
        q = step(q, a)
        if q is REJECT:
            break
    return q


def run_coherence(word: Sequence[Letter], variables: Iterable[str] = ()):
    """First coherence violation along ``word`` as ``(position, kind)``, or None."""
    q = initial_state(Space.for_word(word, AxiomSet(), variables), coherence=True)
    for i, a in enumerate(word):
        q, v = coh_step(q, a)
        if v:
            return i, v
    return None


def canonicalize(q) -> str:
    """Deterministic text key; classes are written as their sorted members."""
    if q is REJECT:
        return "REJECT"
    names = q.space.names
    members: dict[int, list[str]] = {}
    for i, r in enumerate(q.raw[0]):
        members.setdefault(r, []).append(names[i])
    label = {r: "{" + ",".join(sorted(m)) + "}" for r, m in members.items()}
    parts = ["classes " + " ".join(sorted(label.values()))]
    d = sorted(" != ".join(sorted((label[a], label[b]))) for a, b in q.raw[1])
    if d:
        parts.append("d " + "; ".join(d))
    fns = sorted(f"{f}({','.join(label[c] for c in args)})={label[r]}" for (f, args), r in q.raw[2])
    if fns:
        parts.append("P " + "; ".join(fns))
    pos = sorted(f"{r}({','.join(label[c] for c in args)})" for r, args in q.raw[3])
    if pos:
        parts.append("+ " + "; ".join(pos))
    neg = sorted(f"!{r}({','.join(label[c] for c in args)})" for r, args in q.raw[4])
    if neg:
        parts.append("- " + "; ".join(neg))
    if q.raw[5] is not None:
        hist = sorted(f"{f}({','.join(label[c] for c in args)})" for f, args in q.raw[5])
        parts.append("hist " + "; ".join(hist))
    return " | ".join(parts)
