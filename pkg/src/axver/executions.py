"""Execution alphabet, term evaluation, and execution automata.

An execution is a word over six kinds of letters (assignments and
assumes).  ``build_exec_nfa`` turns a core program into an NFA whose
language is the set of its complete executions.
"""

from __future__ import annotations

import re
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence, Union

from axver.errors import ParseError
from axver.syntax import (
    AUX_VAR, Assign as SAssignVar, AssignFn as SAssignFn, Assume, AxiomSet, Choice, If,
    Literal, Loop, PostCondition, Program, Seq, Skip, While, dnf,
)

# --------------------------------------------------------------------------
# Letters
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Assign:
    x: str
    y: str

    def __str__(self):
        return f"{self.x} := {self.y}"

    @property
    def variables(self):
        return (self.x, self.y)


@dataclass(frozen=True, slots=True)
class AssignFn:
    x: str
    f: str
    args: tuple[str, ...]

    def __str__(self):
        return f"{self.x} := {self.f}({', '.join(self.args)})"

    @property
    def variables(self):
        return (self.x,) + self.args


@dataclass(frozen=True, slots=True)
class AssumeEq:
    x: str
    y: str

    def __str__(self):
        return f"assume({self.x} = {self.y})"

    @property
    def variables(self):
        return (self.x, self.y)


@dataclass(frozen=True, slots=True)
class AssumeNeq:
    x: str
    y: str

    def __str__(self):
        return f"assume({self.x} != {self.y})"

    @property
    def variables(self):
        return (self.x, self.y)


@dataclass(frozen=True, slots=True)
class AssumeRel:
    rel: str
    args: tuple[str, ...]

    def __str__(self):
        return f"assume({self.rel}({', '.join(self.args)}))"

    @property
    def variables(self):
        return self.args


@dataclass(frozen=True, slots=True)
class AssumeNegRel:
    rel: str
    args: tuple[str, ...]

    def __str__(self):
        return f"assume(!{self.rel}({', '.join(self.args)}))"

    @property
    def variables(self):
        return self.args


Letter = Union[Assign, AssignFn, AssumeEq, AssumeNeq, AssumeRel, AssumeNegRel]
Execution = tuple  # tuple[Letter, ...]
ASSUMES = (AssumeEq, AssumeNeq, AssumeRel, AssumeNegRel)


def literal_letter(lit: Literal) -> Letter:
    if lit.kind == "eq":
        return (AssumeEq if lit.positive else AssumeNeq)(*lit.args)
    return (AssumeRel if lit.positive else AssumeNegRel)(lit.rel, lit.args)


def assigned_var(a: Letter) -> str | None:
    return a.x if isinstance(a, (Assign, AssignFn)) else None


def letter_vars(word: Iterable[Letter]) -> tuple[str, ...]:
    """Variables mentioned by ``word``, in order of first occurrence."""
    seen: dict[str, None] = {}
    for a in word:
        for v in a.variables:
            seen.setdefault(v, None)
    return tuple(seen)


_IDENT = r"[A-Za-z_][A-Za-z0-9_']*|v\*"
_LETTER_RES = [
    (re.compile(rf"^assume\s*\(\s*({_IDENT})\s*(?:=|==)\s*({_IDENT})\s*\)$"), "eq"),
    (re.compile(rf"^assume\s*\(\s*({_IDENT})\s*(?:!=|≠)\s*({_IDENT})\s*\)$"), "neq"),
    (re.compile(rf"^assume\s*\(\s*(?:!|¬)\s*({_IDENT})\s*\(([^()]*)\)\s*\)$"), "negrel"),
    (re.compile(rf"^assume\s*\(\s*({_IDENT})\s*\(([^()]*)\)\s*\)$"), "rel"),
    (re.compile(rf"^({_IDENT})\s*:=\s*({_IDENT})\s*\(([^()]*)\)$"), "fn"),
    (re.compile(rf"^({_IDENT})\s*:=\s*({_IDENT})$"), "var"),
]


def _arglist(text: str, line: int) -> tuple[str, ...]:
    args = tuple(a.strip() for a in text.split(","))
    if not args or any(not re.fullmatch(_IDENT, a) for a in args):
        raise ParseError(f"malformed argument list {text!r}", line)
    return args


def parse_letter(text: str, line: int = 0) -> Letter:
    """Parse one letter written in the dump syntax, e.g. ``assume(x != y)``."""
    s = text.strip().rstrip(";").strip()
    for regex, kind in _LETTER_RES:
        m = regex.match(s)
        if not m:
            continue
        if kind == "eq":
            return AssumeEq(m.group(1), m.group(2))
        if kind == "neq":
            return AssumeNeq(m.group(1), m.group(2))
        if kind == "rel":
            return AssumeRel(m.group(1), _arglist(m.group(2), line))
        if kind == "negrel":
            return AssumeNegRel(m.group(1), _arglist(m.group(2), line))
        if kind == "fn":
            return AssignFn(m.group(1), m.group(2), _arglist(m.group(3), line))
        return Assign(m.group(1), m.group(2))
    raise ParseError(f"not an execution letter: {text.strip()!r}", line)


def parse_execution(text: str) -> Execution:
    """Parse letters separated by newlines or ``·``."""
    word = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0]
        for chunk in line.split("·"):
            if chunk.strip():
                word.append(parse_letter(chunk, lineno))
    return tuple(word)


def format_execution(word: Iterable[Letter], sep: str = " · ") -> str:
    return sep.join(map(str, word)) or "ε"


# --------------------------------------------------------------------------
# Terms and ground atoms
# --------------------------------------------------------------------------


class Term:
    """A ground term, hash-consed: structurally equal terms are identical objects.

    ``Term(x)`` is the initial value of variable ``x``; ``Term(f, args)``
    is an application.
    """

    __slots__ = ("head", "args", "depth", "_hash", "__weakref__")
    _table: dict = {}
    _lock = threading.Lock()

    def __new__(cls, head: str, args: tuple = ()):
        key = (head, args)
        t = cls._table.get(key)
        if t is not None:
            return t
        with cls._lock:
            t = cls._table.get(key)
            if t is None:
                t = object.__new__(cls)
                t.head = head
                t.args = args
                t.depth = 1 + max((a.depth for a in args), default=0)
                t._hash = hash(key)
                cls._table[key] = t
        return t

    def __reduce__(self):
        return (Term, (self.head, self.args))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    @property
    def is_init(self) -> bool:
        return not self.args

    def subterms(self) -> Iterator["Term"]:
        yield self
        for a in self.args:
            yield from a.subterms()

    def __repr__(self):
        return f"Term({self})"

    def __str__(self):
        if not self.args:
            return f"{self.head}\u0302"
        return f"{self.head}({', '.join(map(str, self.args))})"

    def __lt__(self, other):
        return (self.depth, str(self)) < (other.depth, str(other))


def init(x: str) -> Term:
    return Term(x)


def app(f: str, *args: Term) -> Term:
    return Term(f, tuple(args))


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term

    def __str__(self):
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class Neq:
    left: Term
    right: Term

    def __str__(self):
        return f"{self.left} != {self.right}"


@dataclass(frozen=True)
class Rel:
    rel: str
    args: tuple

    def __str__(self):
        return f"{self.rel}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class NegRel:
    rel: str
    args: tuple

    def __str__(self):
        return f"!{self.rel}({', '.join(map(str, self.args))})"


GroundAtom = Union[Eq, Neq, Rel, NegRel]


class Evaluator:
    """Replays an execution letter by letter, tracking TEval, κ and Terms."""

    def __init__(self, variables: Iterable[str] = ()):
        self.env: dict[str, Term] = {}
        self.terms: dict[Term, None] = {}
        self.atoms: list[GroundAtom] = []
        for v in variables:
            self.value(v)

    def value(self, x: str) -> Term:
        t = self.env.get(x)
        if t is None:
            t = self.env[x] = Term(x)
            self.terms.setdefault(t, None)
        return t

    def atom(self, a: Letter) -> GroundAtom | None:
        if isinstance(a, AssumeEq):
            return Eq(self.value(a.x), self.value(a.y))
        if isinstance(a, AssumeNeq):
            return Neq(self.value(a.x), self.value(a.y))
        if isinstance(a, AssumeRel):
            return Rel(a.rel, tuple(self.value(z) for z in a.args))
        if isinstance(a, AssumeNegRel):
            return NegRel(a.rel, tuple(self.value(z) for z in a.args))
        return None

    def computed(self, a: AssignFn) -> Term:
        return Term(a.f, tuple(self.value(z) for z in a.args))

    def step(self, a: Letter) -> None:
        if isinstance(a, Assign):
            self.value(a.x)
            self.env[a.x] = self.value(a.y)
        elif isinstance(a, AssignFn):
            t = self.computed(a)
            self.value(a.x)
            self.env[a.x] = t
            self.terms.setdefault(t, None)
        else:
            self.atoms.append(self.atom(a))


def _replay(rho: Sequence[Letter], variables: Iterable[str] = ()) -> Evaluator:
    ev = Evaluator(variables)
    for a in rho:
        ev.step(a)
    return ev


def teval(rho: Sequence[Letter], x: str) -> Term:
    """The term held by ``x`` after ``rho``."""
    return _replay(rho).value(x)


def kappa(rho: Sequence[Letter]) -> frozenset:
    """Ground atoms assumed along ``rho``, each over the terms current at its position."""
    return frozenset(_replay(rho).atoms)


def kappa_list(rho: Sequence[Letter]) -> list:
    return list(_replay(rho).atoms)


def computed_terms(rho: Sequence[Letter], variables: Iterable[str] = ()) -> frozenset:
    """Terms held by some variable at some prefix of ``rho``.

    Variables not mentioned by ``rho`` contribute their initial values
    when listed in ``variables``.
    """
    return frozenset(_replay(rho, variables).terms)


# --------------------------------------------------------------------------
# Execution NFAs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Edge:
    src: int
    letter: Letter | None  # None is an epsilon edge
    dst: int
    origin: Letter | None = field(default=None, compare=False)
    head: bool = field(default=True, compare=False)


class ExecNFA:
    """An NFA over execution letters; immutable after construction.

    Every edge remembers the program letter it was produced from
    (``origin``) and whether it starts that letter's image (``head``),
    so words of instrumented automata can be mapped back.
    """

    def __init__(self, n_states: int, initial: int, accepting: Iterable[int],
                 edges: Iterable[Edge], variables: Sequence[str] = ()):
        self.n_states = n_states
        self.initial = initial
        self.accepting = frozenset(accepting)
        self.edges = tuple(edges)
        self.variables = tuple(variables)
        self._eps_free: ExecNFA | None = None
        self._adj: list | None = None

    # -- structure

    @property
    def has_epsilon(self) -> bool:
        return any(e.letter is None for e in self.edges)

    def adjacency(self) -> list[list[Edge]]:
        if self._adj is None:
            adj: list[list[Edge]] = [[] for _ in range(self.n_states)]
            for e in self.edges:
                adj[e.src].append(e)
            self._adj = adj
        return self._adj

    def alphabet(self) -> list[Letter]:
        return list(dict.fromkeys(e.letter for e in self.edges if e.letter is not None))

    def all_variables(self) -> tuple[str, ...]:
        extra = letter_vars(e.letter for e in self.edges if e.letter is not None)
        return tuple(dict.fromkeys(self.variables + extra))

    def epsilon_closure(self, states: Iterable[int]) -> set[int]:
        adj = self.adjacency()
        seen = set(states)
        stack = list(seen)
        while stack:
            s = stack.pop()
            for e in adj[s]:
                if e.letter is None and e.dst not in seen:
                    seen.add(e.dst)
                    stack.append(e.dst)
        return seen

    def without_epsilon(self) -> "ExecNFA":
        """Equivalent NFA without epsilon edges, restricted to useful states."""
        if not self.has_epsilon:
            return self.trim()
        if self._eps_free is None:
            closures = [self.epsilon_closure([s]) for s in range(self.n_states)]
            adj = self.adjacency()
            edges = []
            seen = set()
            for s in range(self.n_states):
                for c in sorted(closures[s]):
                    for e in adj[c]:
                        if e.letter is not None:
                            key = (s, e.letter, e.dst, e.origin, e.head)
                            if key not in seen:
                                seen.add(key)
                                edges.append(Edge(s, e.letter, e.dst, e.origin, e.head))
            accepting = [s for s in range(self.n_states) if closures[s] & self.accepting]
            self._eps_free = ExecNFA(self.n_states, self.initial, accepting, edges,
                                     self.variables).trim()
        return self._eps_free

    def trim(self) -> "ExecNFA":
        """Keep states reachable from the initial state and co-reachable to acceptance."""
        adj = self.adjacency()
        fwd = {self.initial}
        queue = deque([self.initial])
        while queue:
            s = queue.popleft()
            for e in adj[s]:
                if e.dst not in fwd:
                    fwd.add(e.dst)
                    queue.append(e.dst)
        radj: list[list[int]] = [[] for _ in range(self.n_states)]
        for e in self.edges:
            radj[e.dst].append(e.src)
        back = set(self.accepting & fwd)
        queue = deque(back)
        while queue:
            s = queue.popleft()
            for p in radj[s]:
                if p not in back and p in fwd:
                    back.add(p)
                    queue.append(p)
        useful = sorted(fwd & back)
        if self.initial not in back:
            return ExecNFA(1, 0, (), (), self.variables)
        # Renumber in breadth-first order so dumps are stable.
        order = {self.initial: 0}
        queue = deque([self.initial])
        useful_set = set(useful)
        while queue:
            s = queue.popleft()
            for e in adj[s]:
                if e.dst in useful_set and e.dst not in order:
                    order[e.dst] = len(order)
                    queue.append(e.dst)
        edges = [Edge(order[e.src], e.letter, order[e.dst], e.origin, e.head)
                 for e in self.edges if e.src in order and e.dst in order]
        edges.sort(key=lambda e: (e.src, e.dst, str(e.letter)))
        return ExecNFA(len(order), 0, (order[s] for s in self.accepting if s in order),
                       edges, self.variables)

    def prefix_closed(self) -> "ExecNFA":
        """NFA accepting every prefix of an accepted word."""
        t = self.without_epsilon()
        return ExecNFA(t.n_states, t.initial, range(t.n_states), t.edges, t.variables)

    # -- language queries

    def accepts(self, word: Sequence[Letter]) -> bool:
        current = self.epsilon_closure([self.initial])
        adj = self.adjacency()
        for a in word:
            nxt = {e.dst for s in current for e in adj[s] if e.letter == a}
            if not nxt:
                return False
            current = self.epsilon_closure(nxt)
        return bool(current & self.accepting)

    def words(self, max_len: int) -> set[tuple]:
        """All accepted words of length at most ``max_len``."""
        nfa = self.without_epsilon()
        adj = nfa.adjacency()
        out = set()
        frontier = {((), nfa.initial)}
        for _ in range(max_len + 1):
            nxt = set()
            for word, s in frontier:
                if s in nfa.accepting:
                    out.add(word)
                if len(word) < max_len:
                    for e in adj[s]:
                        nxt.add((word + (e.letter,), e.dst))
            frontier = nxt
        return out

    def is_empty(self) -> bool:
        return not self.trim().accepting

    def dump(self) -> str:
        """One edge per line, ``src -- letter --> dst``, then the state roles."""
        lines = [f"{e.src} -- {e.letter if e.letter is not None else 'ε'} --> {e.dst}"
                 for e in self.edges]
        lines.append(f"initial {self.initial}")
        lines.append("accepting " + " ".join(map(str, sorted(self.accepting))))
        return "\n".join(lines)

    def __repr__(self):
        return f"ExecNFA(states={self.n_states}, edges={len(self.edges)})"


class NFABuilder:
    def __init__(self):
        self.n = 0
        self.edges: list[Edge] = []

    def state(self) -> int:
        self.n += 1
        return self.n - 1

    def edge(self, src: int, letter: Letter | None, dst: int, origin=None, head=True) -> None:
        self.edges.append(Edge(src, letter, dst, origin if origin is not None else letter, head))

    def path(self, src: int, word: Sequence[Letter]) -> int:
        for a in word:
            nxt = self.state()
            self.edge(src, a, nxt)
            src = nxt
        return src


def assume_words(lit: Literal, ax: AxiomSet) -> list[tuple[Letter, ...]]:
    """Words realizing ``assume(lit)``, splitting negated strict-total-order atoms."""
    if lit.kind == "rel" and not lit.positive and lit.rel in ax.sto:
        x, y = lit.args
        return [(AssumeRel(lit.rel, (y, x)),), (AssumeEq(x, y),)]
    return [(literal_letter(lit),)]


def _build(stmt, b: NFABuilder, src: int, ax: AxiomSet) -> int:
    """Thompson construction: add ``stmt`` starting at ``src``, return its exit."""
    if isinstance(stmt, Skip):
        return src
    if isinstance(stmt, SAssignVar):
        return b.path(src, [Assign(stmt.target, stmt.source)])
    if isinstance(stmt, SAssignFn):
        return b.path(src, [AssignFn(stmt.target, stmt.fn, stmt.args)])
    if isinstance(stmt, Assume):
        return _branches(b, src, assume_words(stmt.lit, ax))
    if isinstance(stmt, Seq):
        for s in stmt.stmts:
            src = _build(s, b, src, ax)
        return src
    if isinstance(stmt, If):
        out = b.state()
        then_in = _branches(b, src, assume_words(stmt.lit, ax))
        b.edge(_build(stmt.then, b, then_in, ax), None, out)
        else_in = _branches(b, src, assume_words(stmt.lit.negate(), ax))
        b.edge(_build(stmt.orelse, b, else_in, ax), None, out)
        return out
    if isinstance(stmt, While):
        head = b.state()
        b.edge(src, None, head)
        body_in = _branches(b, head, assume_words(stmt.lit, ax))
        b.edge(_build(stmt.body, b, body_in, ax), None, head)
        return _branches(b, head, assume_words(stmt.lit.negate(), ax))
    if isinstance(stmt, Choice):
        out = b.state()
        for branch in stmt.branches:
            b.edge(_build(branch, b, src, ax), None, out)
        return out
    if isinstance(stmt, Loop):
        head = b.state()
        b.edge(src, None, head)
        b.edge(_build(stmt.body, b, head, ax), None, head)
        return head
    raise TypeError(f"not a core statement: {stmt!r}")


def _branches(b: NFABuilder, src: int, words: list[tuple[Letter, ...]]) -> int:
    if len(words) == 1:
        return b.path(src, words[0])
    out = b.state()
    for w in words:
        b.edge(b.path(src, w), None, out)
    return out


def build_exec_nfa(p: Program, ax: AxiomSet = AxiomSet()) -> ExecNFA:
    """NFA for the complete executions of a core program."""
    b = NFABuilder()
    start = b.state()
    end = _build(p.body, b, start, ax)
    return ExecNFA(b.n, start, [end], b.edges, p.vars)


def post_violation_words(phi: PostCondition, ax: AxiomSet) -> list[tuple[Letter, ...]]:
    """Words realizing ``assume(!phi)``, one per disjunct (after translation)."""
    words = []
    for conj in dnf(phi.formula, positive=False):
        partial: list[tuple] = [()]
        for lit in conj:
            partial = [w + alt for w in partial for alt in assume_words(lit, ax)]
        words.extend(partial)
    return list(dict.fromkeys(words))


def append_post_violation(n: ExecNFA, phi: PostCondition, ax: AxiomSet = AxiomSet()) -> ExecNFA:
    """NFA for ``Exec(s; assume(!phi))`` given ``n`` for ``Exec(s)``."""
    b = NFABuilder()
    b.n = n.n_states
    b.edges = list(n.edges)
    end = b.state()
    for acc in sorted(n.accepting):
        b.edge(_branches(b, acc, post_violation_words(phi, ax)), None, end)
    return ExecNFA(b.n, n.initial, [end], b.edges, n.variables)


def apply_homomorphism(n: ExecNFA, h) -> ExecNFA:
    """Image of ``L(n)`` under the letter-to-word map ``h.image``.

    Each edge is replaced by a path of fresh states spelling the image;
    the first edge of the path keeps the original edge's provenance.
    """
    b = NFABuilder()
    b.n = n.n_states
    for e in n.edges:
        if e.letter is None:
            b.edges.append(e)
            continue
        word = h.image(e.letter)
        if not word:
            raise ValueError(f"homomorphism maps {e.letter} to the empty word")
        src = e.src
        for i, a in enumerate(word):
            dst = e.dst if i == len(word) - 1 else b.state()
            b.edges.append(Edge(src, a, dst, e.origin, e.head and i == 0))
            src = dst
    return ExecNFA(b.n, n.initial, n.accepting, b.edges, n.variables)


def prepend_word(n: ExecNFA, word: Sequence[Letter]) -> ExecNFA:
    """NFA for ``word · L(n)``; the new edges carry no program origin."""
    if not word:
        return n
    b = NFABuilder()
    b.n = n.n_states
    b.edges = list(n.edges)
    start = b.state()
    src = start
    for i, a in enumerate(word):
        dst = n.initial if i == len(word) - 1 else b.state()
        b.edges.append(Edge(src, a, dst, None, False))
        src = dst
    return ExecNFA(b.n, start, n.accepting, b.edges, n.variables)


def exec_words(stmt, ax: AxiomSet, max_len: int) -> set[tuple]:
    """Executions of a core statement up to ``max_len``, by direct recursion.

    An independent reference for ``build_exec_nfa``; loops are unrolled
    until the length bound cuts them off.
    """

    def cat(left: set, right: set) -> set:
        return {u + v for u in left for v in right if len(u) + len(v) <= max_len}

    def lit_words(lit):
        return {w for w in assume_words(lit, ax) if len(w) <= max_len}

    def go(s) -> set:
        if isinstance(s, Skip):
            return {()}
        if isinstance(s, SAssignVar):
            return {(Assign(s.target, s.source),)} if max_len >= 1 else set()
        if isinstance(s, SAssignFn):
            return {(AssignFn(s.target, s.fn, s.args),)} if max_len >= 1 else set()
        if isinstance(s, Assume):
            return lit_words(s.lit)
        if isinstance(s, Seq):
            out = {()}
            for x in s.stmts:
                out = cat(out, go(x))
            return out
        if isinstance(s, If):
            return cat(lit_words(s.lit), go(s.then)) | cat(lit_words(s.lit.negate()), go(s.orelse))
        if isinstance(s, Choice):
            return set().union(*(go(b) for b in s.branches))
        if isinstance(s, (While, Loop)):
            if isinstance(s, While):
                body = cat(lit_words(s.lit), go(s.body))
                exit_ = lit_words(s.lit.negate())
            else:
                body, exit_ = go(s.body), {()}
            star = {()}
            frontier = {()}
            while frontier:
                frontier = cat(frontier, body) - star
                star |= frontier
            return cat(star, exit_)
        raise TypeError(f"not a core statement: {s!r}")

    return go(stmt)


# --------------------------------------------------------------------------
# Concrete runs
# --------------------------------------------------------------------------


@dataclass
class DataModel:
    """A finite structure: initial values, function tables, relations.

    Elements are arbitrary hashable values.  A missing function entry is
    an error, since the run would be undefined there.
    """

    values: dict
    functions: dict = field(default_factory=dict)
    relations: dict = field(default_factory=dict)

    def apply(self, f: str, args: tuple):
        try:
            return self.functions[f][args]
        except KeyError:
            raise KeyError(f"model does not define {f}{args}") from None

    def holds(self, a: Letter, env: dict) -> bool:
        if isinstance(a, AssumeEq):
            return env[a.x] == env[a.y]
        if isinstance(a, AssumeNeq):
            return env[a.x] != env[a.y]
        fact = tuple(env[z] for z in a.args) in self.relations.get(a.rel, ())
        return fact if isinstance(a, AssumeRel) else not fact


def run_on_model(p: Program, model: DataModel, ax: AxiomSet = AxiomSet(),
                 post: PostCondition | None = None, fuel: int = 10_000) -> tuple[Letter, ...]:
    """The execution ``p`` takes on ``model``.

    Guards are decided by the model; where compiled conditions leave a
    choice, the first branch that goes through wins.  With ``post`` the
    word continues with the violating assumes when the model breaks the
    postcondition, and ``ValueError`` is raised when it does not.
    """
    # Desugaring temporaries are written before they are read.
    env = {v: model.values[v] if not v.startswith("__") else model.values.get(v) for v in p.vars}
    steps = [0]

    def lit(lt: Literal, env, word):
        for w in assume_words(lt, ax):
            if all(model.holds(a, env) for a in w):
                yield env, word + w

    def go(s, env, word):
        steps[0] += 1
        if steps[0] > fuel:
            raise RuntimeError("run exceeded its step budget")
        if isinstance(s, Skip):
            yield env, word
        elif isinstance(s, SAssignVar):
            yield {**env, s.target: env[s.source]}, word + (Assign(s.target, s.source),)
        elif isinstance(s, SAssignFn):
            value = model.apply(s.fn, tuple(env[z] for z in s.args))
            yield {**env, s.target: value}, word + (AssignFn(s.target, s.fn, s.args),)
        elif isinstance(s, Assume):
            yield from lit(s.lit, env, word)
        elif isinstance(s, Seq):
            yield from _seq_runs(s.stmts, env, word)
        elif isinstance(s, If):
            for e2, w2 in lit(s.lit, env, word):
                yield from go(s.then, e2, w2)
            for e2, w2 in lit(s.lit.negate(), env, word):
                yield from go(s.orelse, e2, w2)
        elif isinstance(s, While):
            entered = False
            for e2, w2 in lit(s.lit, env, word):
                entered = True
                for e3, w3 in go(s.body, e2, w2):
                    yield from go(s, e3, w3)
            if not entered:
                yield from lit(s.lit.negate(), env, word)
        elif isinstance(s, Choice):
            for b in s.branches:
                yield from go(b, env, word)
        elif isinstance(s, Loop):
            yield env, word
            for e2, w2 in go(s.body, env, word):
                if w2 != word:
                    yield from go(s, e2, w2)
        else:
            raise TypeError(f"not a core statement: {s!r}")

    def _seq_runs(stmts, env, word):
        if not stmts:
            yield env, word
            return
        for e2, w2 in go(stmts[0], env, word):
            yield from _seq_runs(stmts[1:], e2, w2)

    for env2, word in go(p.body, env, ()):
        if post is None:
            return word
        for w in post_violation_words(post, ax):
            if all(model.holds(a, env2) for a in w):
                return word + w
        raise ValueError("the model satisfies the postcondition on this run")
    raise ValueError("no run of the program goes through on this model")
