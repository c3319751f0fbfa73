"""Surface language, axiom declarations, postconditions, and desugaring.

A source file looks like::

    axioms { relation lt: strict_total_order; function f: commutative; }
    const T, F;
    vars x, y, k;
    program { ... }
    post: !(x == T) || k == y;

The program grammar is the usual while-language over uninterpreted
functions and relations.  ``a < b`` is sugar for the relation ``lt``
and ``a <= b`` expands to ``lt(a, b) || a == b``.  Comments are written
``(* ... *)``.

``desugar`` lowers a parsed program to the core form consumed by the
execution-automaton builder: every condition is a single literal, every
function argument is a variable, and constants are ordinary variables
that are never assigned.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

from axver.errors import ArityError, ContradictoryAxioms, ParseError, UnsupportedAxiom

TEMP_PREFIX = "__t"
AUX_VAR = "v*"
LT = "lt"

REL_FLAGS = ("refl", "irref", "symm", "trans", "sto")
FN_FLAGS = ("comm", "idem")


# --------------------------------------------------------------------------
# Signature, axioms, postconditions
# --------------------------------------------------------------------------


@dataclass
class Signature:
    functions: dict[str, int] = field(default_factory=dict)
    relations: dict[str, int] = field(default_factory=dict)

    def declare_function(self, name: str, arity: int, pos=(0, 0)) -> None:
        self._declare(self.functions, self.relations, "function", name, arity, pos)

    def declare_relation(self, name: str, arity: int, pos=(0, 0)) -> None:
        self._declare(self.relations, self.functions, "relation", name, arity, pos)

    @staticmethod
    def _declare(table, other, what, name, arity, pos):
        if name in other:
            raise ArityError(f"{name!r} is used both as a function and a relation", *pos)
        known = table.get(name)
        if known is not None and known != arity:
            raise ArityError(f"{what} {name!r} used with arity {arity}, earlier {known}", *pos)
        table[name] = arity


def _freeze_props(table) -> tuple[tuple[str, frozenset[str]], ...]:
    if not table:
        return ()
    items = table.items() if isinstance(table, dict) else table
    return tuple(sorted((name, frozenset(props)) for name, props in items if props))


@dataclass(frozen=True)
class AxiomSet:
    """Per-symbol axiom flags.

    ``rejected`` keeps declarations outside the decidable fragment as
    ``(kind, text)`` pairs so that validation can report them.
    """

    rel_props: tuple[tuple[str, frozenset[str]], ...] = ()
    fn_props: tuple[tuple[str, frozenset[str]], ...] = ()
    rejected: tuple[tuple[str, str], ...] = ()

    @classmethod
    def of(cls, rel=None, fn=None, rejected=()) -> "AxiomSet":
        return cls(_freeze_props(rel), _freeze_props(fn), tuple(rejected))

    def rel(self, name: str) -> frozenset[str]:
        for r, props in self.rel_props:
            if r == name:
                return props
        return frozenset()

    def fn(self, name: str) -> frozenset[str]:
        for f, props in self.fn_props:
            if f == name:
                return props
        return frozenset()

    def effective(self, name: str) -> frozenset[str]:
        """Relation flags with a strict total order read as irreflexive and transitive."""
        props = self.rel(name)
        if "sto" in props:
            props = props | {"irref", "trans"}
        return props

    def relations_with(self, flag: str) -> frozenset[str]:
        return frozenset(r for r, _ in self.rel_props if flag in self.effective(r))

    def functions_with(self, flag: str) -> frozenset[str]:
        return frozenset(f for f, props in self.fn_props if flag in props)

    @property
    def transitive(self) -> frozenset[str]:
        return self.relations_with("trans")

    @property
    def sto(self) -> frozenset[str]:
        return frozenset(r for r, props in self.rel_props if "sto" in props)

    def replace_sto_with_spo(self) -> "AxiomSet":
        rel = {}
        for r, props in self.rel_props:
            rel[r] = (props - {"sto"}) | {"irref", "trans"} if "sto" in props else props
        return AxiomSet.of(rel, dict(self.fn_props), self.rejected)

    def echo(self) -> dict:
        return {
            "relations": {r: sorted(p) for r, p in self.rel_props},
            "functions": {f: sorted(p) for f, p in self.fn_props},
            "rejected": [list(r) for r in self.rejected],
        }

    def __str__(self) -> str:
        parts = [f"relation {r}: {', '.join(sorted(p))}" for r, p in self.rel_props]
        parts += [f"function {f}: {', '.join(sorted(p))}" for f, p in self.fn_props]
        return "{" + "; ".join(parts) + "}"


# --------------------------------------------------------------------------
# Surface AST
# --------------------------------------------------------------------------

Pos = tuple


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = field(default=(0, 0), compare=False)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple
    pos: Pos = field(default=(0, 0), compare=False)

    def __str__(self):
        return f"{self.fn}({', '.join(map(str, self.args))})"


Expr = Union[Var, App]


@dataclass(frozen=True)
class CEq:
    left: Expr
    right: Expr

    def __str__(self):
        return f"{self.left} == {self.right}"


@dataclass(frozen=True)
class CRel:
    rel: str
    args: tuple

    def __str__(self):
        return f"{self.rel}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class CNot:
    arg: "Cond"

    def __str__(self):
        return f"!({self.arg})"


@dataclass(frozen=True)
class COr:
    left: "Cond"
    right: "Cond"

    def __str__(self):
        return f"({self.left} || {self.right})"


@dataclass(frozen=True)
class CAnd:
    left: "Cond"
    right: "Cond"

    def __str__(self):
        return f"({self.left} && {self.right})"


Cond = Union[CEq, CRel, CNot, COr, CAnd]


@dataclass(frozen=True)
class Skip:
    def __str__(self):
        return "skip;"


@dataclass(frozen=True)
class SAssign:
    target: str
    expr: Expr
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SAssume:
    cond: Cond
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SIf:
    cond: Cond
    then: "Stmt"
    orelse: "Stmt | None" = None
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SWhile:
    cond: Cond
    body: "Stmt"
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Block:
    stmts: tuple


# --------------------------------------------------------------------------
# Core AST
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    """An atomic condition: ``x == y``, ``R(z...)`` or their negations."""

    kind: str  # "eq" or "rel"
    args: tuple[str, ...]
    positive: bool = True
    rel: str = ""

    def negate(self) -> "Literal":
        return Literal(self.kind, self.args, not self.positive, self.rel)

    def __str__(self):
        if self.kind == "eq":
            op = "==" if self.positive else "!="
            return f"{self.args[0]} {op} {self.args[1]}"
        return f"{'' if self.positive else '!'}{self.rel}({', '.join(self.args)})"


@dataclass(frozen=True)
class Assign:
    target: str
    source: str

    def __str__(self):
        return f"{self.target} := {self.source};"


@dataclass(frozen=True)
class AssignFn:
    target: str
    fn: str
    args: tuple[str, ...]

    def __str__(self):
        return f"{self.target} := {self.fn}({', '.join(self.args)});"


@dataclass(frozen=True)
class Assume:
    lit: Literal

    def __str__(self):
        return f"assume({self.lit});"


@dataclass(frozen=True)
class Seq:
    stmts: tuple


@dataclass(frozen=True)
class If:
    lit: Literal
    then: "Stmt"
    orelse: "Stmt"


@dataclass(frozen=True)
class While:
    lit: Literal
    body: "Stmt"


@dataclass(frozen=True)
class Choice:
    """Nondeterministic choice, produced when compiling compound conditions."""

    branches: tuple


@dataclass(frozen=True)
class Loop:
    """Kleene star of its body, produced when compiling compound loop guards."""

    body: "Stmt"


Stmt = Union[Skip, SAssign, SAssume, SIf, SWhile, Block, Assign, AssignFn, Assume, Seq, If, While, Choice, Loop]
CORE_TYPES = (Skip, Assign, AssignFn, Assume, Seq, If, While, Choice, Loop)


@dataclass(frozen=True)
class Program:
    body: Stmt
    vars: tuple[str, ...]
    consts: tuple[str, ...] = ()


@dataclass(frozen=True)
class PostCondition:
    """A formula over ``x == y``, ``R(z...)``, ``||`` and ``!``."""

    formula: Cond

    def __str__(self):
        return str(self.formula)


@dataclass(frozen=True)
class ParsedFile:
    program: Program | None
    signature: Signature
    axioms: AxiomSet
    post: PostCondition | None


def format_program(stmt: Stmt, indent: int = 0) -> str:
    """Render a program (surface or core) as indented text."""
    pad = "  " * indent
    if isinstance(stmt, Program):
        return format_program(stmt.body, indent)
    if isinstance(stmt, (Seq, Block)):
        return "\n".join(format_program(s, indent) for s in stmt.stmts) or pad + "skip;"
    if isinstance(stmt, (Skip, Assign, AssignFn, Assume)):
        return pad + str(stmt)
    if isinstance(stmt, SAssign):
        return f"{pad}{stmt.target} := {stmt.expr};"
    if isinstance(stmt, SAssume):
        return f"{pad}assume({stmt.cond});"
    if isinstance(stmt, (If, SIf)):
        cond = stmt.lit if isinstance(stmt, If) else stmt.cond
        out = f"{pad}if ({cond}) then {{\n{format_program(stmt.then, indent + 1)}\n{pad}}}"
        if stmt.orelse is not None:
            out += f" else {{\n{format_program(stmt.orelse, indent + 1)}\n{pad}}}"
        return out
    if isinstance(stmt, (While, SWhile)):
        cond = stmt.lit if isinstance(stmt, While) else stmt.cond
        return f"{pad}while ({cond}) {{\n{format_program(stmt.body, indent + 1)}\n{pad}}}"
    if isinstance(stmt, Choice):
        alts = [f"{pad}  {{\n{format_program(b, indent + 2)}\n{pad}  }}" for b in stmt.branches]
        return f"{pad}choose {{\n" + f"\n{pad}  or\n".join(alts) + f"\n{pad}}}"
    if isinstance(stmt, Loop):
        return f"{pad}loop {{\n{format_program(stmt.body, indent + 1)}\n{pad}}}"
    raise TypeError(f"not a statement: {stmt!r}")


# --------------------------------------------------------------------------
# Lexer
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\(\*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>:=|==|!=|<=|>=|=>|\|\||&&|[<>=!(){};,:/@.])
    """,
    re.VERBOSE,
)

KEYWORDS = {
    "axioms", "relation", "function", "vars", "var", "const", "consts", "program",
    "post", "if", "then", "else", "while", "do", "skip", "assume", "axiom",
    "sentence", "forall", "exists_",
}


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "num", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, i = 1, 0, 0
    n = len(source)
    while i < n:
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise ParseError(f"unexpected character {source[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "comment":
            end = source.find("*)", m.end())
            if end < 0:
                raise ParseError("unterminated comment", line, i - line_start + 1)
            chunk = source[i:end]
            newlines = chunk.count("\n")
            if newlines:
                line += newlines
                line_start = i + chunk.rfind("\n") + 1
            i = end + 2
            continue
        elif kind != "ws":
            tokens.append(Token(kind, m.group(), line, i - line_start + 1))
        i = m.end()
    tokens.append(Token("eof", "", line, n - line_start + 1))
    return tokens


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

_PROP_ALIASES = {
    "reflexive": ("refl",), "refl": ("refl",),
    "irreflexive": ("irref",), "irref": ("irref",),
    "symmetric": ("symm",), "symm": ("symm",),
    "transitive": ("trans",), "trans": ("trans",),
    "strict_total_order": ("sto",), "sto": ("sto",),
    "strict_partial_order": ("irref", "trans"), "spo": ("irref", "trans"),
    "preorder": ("refl", "trans"),
    "equivalence": ("refl", "symm", "trans"),
}
_REJECTED_REL = {"antisymmetric", "antisym", "partial_order", "total_order"}
_FN_ALIASES = {"commutative": "comm", "comm": "comm", "idempotent": "idem", "idem": "idem"}
_REJECTED_FN = {"associative", "assoc"}
_COMPARISONS = {"==", "=", "!=", "<", "<=", ">", ">="}


class _Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0
        self.sig = Signature()
        self.rel_props: dict[str, set[str]] = {}
        self.fn_props: dict[str, set[str]] = {}
        self.rejected: list[tuple[str, str]] = []
        self.vars: list[str] | None = None
        self.consts: list[str] = []
        self.used: dict[str, Pos] = {}  # identifiers used as variables, first position
        self.assigned: dict[str, Pos] = {}

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self, what: str = "identifier") -> Token:
        tok = self.tok
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        if tok.text.startswith("__"):
            raise self.error(f"identifiers starting with '__' are reserved: {tok.text!r}")
        self.i += 1
        return tok

    # -- file structure

    def parse_file(self) -> ParsedFile:
        body = None
        post = None
        while self.tok.kind != "eof":
            if self.accept("axioms"):
                self.parse_axioms()
            elif self.at("vars") or self.at("var"):
                self.i += 1
                names = self.ident_list()
                self.vars = (self.vars or []) + names
            elif self.at("const") or self.at("consts"):
                self.i += 1
                self.consts += self.ident_list()
            elif self.accept("program"):
                if body is not None:
                    raise self.error("duplicate program section")
                body = self.block()
            elif self.at("post") or self.at("@"):
                if self.accept("@"):
                    pass
                self.expect("post")
                self.expect(":")
                if post is not None:
                    raise self.error("duplicate post section")
                post = PostCondition(self.formula(in_post=True))
                self.accept(";")
            else:
                raise self.error(f"unexpected {self.tok.text!r} at top level")
        program = self.finish_program(body) if body is not None else None
        axioms = AxiomSet.of(self.rel_props, self.fn_props, self.rejected)
        return ParsedFile(program, self.sig, axioms, post)

    def ident_list(self) -> list[str]:
        names = [self.ident().text]
        while self.accept(","):
            names.append(self.ident().text)
        self.expect(";")
        return names

    def parse_axioms(self) -> None:
        self.expect("{")
        while not self.accept("}"):
            start = self.tok
            if self.at("relation") or self.at("function"):
                is_rel = self.tok.text == "relation"
                self.i += 1
                name_tok = self.ident("symbol name")
                arity = None
                if self.accept("/"):
                    if self.tok.kind != "num":
                        raise self.error("expected arity")
                    arity = int(self.tok.text)
                    self.i += 1
                self.expect(":")
                props = [self.ident("property").text]
                while self.accept(","):
                    props.append(self.ident("property").text)
                self.expect(";")
                if is_rel:
                    self.relation_decl(name_tok, arity, props)
                else:
                    self.function_decl(name_tok, arity, props)
            elif self.at("axiom") or self.at("sentence") or self.at("forall") or self.tok.text == "exists":
                text = []
                while not self.at(";"):
                    if self.tok.kind == "eof" or self.at("}"):
                        raise self.error("unterminated axiom sentence", start)
                    text.append(self.tok.text)
                    self.i += 1
                self.i += 1
                self.rejected.append(("epr", " ".join(text)))
            else:
                raise self.error(f"unexpected {self.tok.text!r} in axioms block")

    def relation_decl(self, name_tok: Token, arity, props) -> None:
        flags = self.rel_props.setdefault(name_tok.text, set())
        for p in props:
            if p in _REJECTED_REL:
                self.rejected.append(("antisym", f"relation {name_tok.text}: {p}"))
            elif p in _PROP_ALIASES:
                flags.update(_PROP_ALIASES[p])
            else:
                raise ParseError(f"unknown relation property {p!r}", name_tok.line, name_tok.col)
        self.sig.declare_relation(name_tok.text, arity or 2, (name_tok.line, name_tok.col))

    def function_decl(self, name_tok: Token, arity, props) -> None:
        flags = self.fn_props.setdefault(name_tok.text, set())
        default = 2
        for p in props:
            if p in _REJECTED_FN:
                self.rejected.append(("assoc", f"function {name_tok.text}: {p}"))
            elif p in _FN_ALIASES:
                flags.add(_FN_ALIASES[p])
                if _FN_ALIASES[p] == "idem":
                    default = 1
            else:
                raise ParseError(f"unknown function property {p!r}", name_tok.line, name_tok.col)
        self.sig.declare_function(name_tok.text, arity or default, (name_tok.line, name_tok.col))

    # -- statements

    def block(self) -> Block:
        self.expect("{")
        stmts = []
        while not self.accept("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            stmts.append(self.stmt())
        return Block(tuple(stmts))

    def body(self):
        return self.block() if self.at("{") else self.stmt()

    def stmt(self):
        tok = self.tok
        pos = (tok.line, tok.col)
        if self.at("{"):
            return self.block()
        if self.accept("skip"):
            self.expect(";")
            return Skip()
        if self.accept("assume"):
            self.expect("(")
            cond = self.formula()
            self.expect(")")
            self.expect(";")
            return SAssume(cond, pos)
        if self.accept("if"):
            self.expect("(")
            cond = self.formula()
            self.expect(")")
            self.accept("then")
            then = self.body()
            orelse = self.body() if self.accept("else") else None
            return SIf(cond, then, orelse, pos)
        if self.accept("while"):
            self.expect("(")
            cond = self.formula()
            self.expect(")")
            self.accept("do")
            return SWhile(cond, self.body(), pos)
        if tok.kind == "ident" and self.peek().text == ":=":
            target = self.ident("variable").text
            self.expect(":=")
            if self.at(";"):
                raise self.error("missing right-hand side of assignment")
            expr = self.expr()
            self.expect(";")
            self.assigned.setdefault(target, pos)
            self.used.setdefault(target, pos)
            return SAssign(target, expr, pos)
        raise self.error(f"expected a statement, found {tok.text or 'end of input'!r}")

    # -- expressions and conditions

    def expr(self) -> Expr:
        tok = self.ident("variable or function application")
        pos = (tok.line, tok.col)
        if self.accept("("):
            args = [self.expr()]
            while self.accept(","):
                args.append(self.expr())
            self.expect(")")
            self.sig.declare_function(tok.text, len(args), pos)
            return App(tok.text, tuple(args), pos)
        self.used.setdefault(tok.text, pos)
        return Var(tok.text, pos)

    def formula(self, in_post: bool = False) -> Cond:
        left = self.disjunction(in_post)
        if self.accept("=>"):
            right = self.formula(in_post)
            return COr(CNot(left), right)
        return left

    def disjunction(self, in_post) -> Cond:
        cond = self.conjunction(in_post)
        while self.accept("||"):
            cond = COr(cond, self.conjunction(in_post))
        return cond

    def conjunction(self, in_post) -> Cond:
        cond = self.unary(in_post)
        while self.accept("&&"):
            right = self.unary(in_post)
            cond = CNot(COr(CNot(cond), CNot(right))) if in_post else CAnd(cond, right)
        return cond

    def unary(self, in_post) -> Cond:
        if self.accept("!"):
            return CNot(self.unary(in_post))
        if self.accept("("):
            cond = self.formula(in_post)
            self.expect(")")
            return cond
        return self.atom(in_post)

    def atom(self, in_post) -> Cond:
        tok = self.tok
        pos = (tok.line, tok.col)
        if tok.kind == "ident" and self.peek().text == "(":
            # Either a relation atom or the left operand of a comparison.
            save = self.i
            depth = 0
            j = self.i + 1
            while j < len(self.toks):
                t = self.toks[j].text
                if t == "(":
                    depth += 1
                elif t == ")":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            follower = self.toks[min(j + 1, len(self.toks) - 1)]
            if follower.kind != "op" or follower.text not in _COMPARISONS:
                name = self.ident("relation").text
                self.expect("(")
                args = [self.expr()]
                while self.accept(","):
                    args.append(self.expr())
                self.expect(")")
                if in_post:
                    self._post_args(args)
                self.sig.declare_relation(name, len(args), pos)
                return CRel(name, tuple(args))
            self.i = save
        left = self.expr()
        op = self.tok
        if op.kind != "op" or op.text not in _COMPARISONS:
            raise self.error(f"expected a comparison after {left}")
        self.i += 1
        right = self.expr()
        if in_post:
            self._post_args([left, right])
        if op.text in ("==", "="):
            return CEq(left, right)
        if op.text == "!=":
            return CNot(CEq(left, right))
        if op.text in (">", ">="):
            left, right = right, left
        self.sig.declare_relation(LT, 2, pos)
        lt = CRel(LT, (left, right))
        return lt if op.text in ("<", ">") else COr(lt, CEq(left, right))

    def _post_args(self, args) -> None:
        for a in args:
            if not isinstance(a, Var):
                raise ParseError("postconditions may only mention variables", *a.pos)

    # -- resolution

    def finish_program(self, body: Block) -> Program:
        consts = list(dict.fromkeys(self.consts))
        for c in consts:
            if c in self.assigned:
                raise ParseError(f"constant {c!r} cannot be assigned", *self.assigned[c])
        if self.vars is None:
            declared = [v for v in self.used if v not in consts]
        else:
            declared = list(dict.fromkeys(self.vars))
            clash = set(declared) & set(consts)
            if clash:
                raise ParseError(f"{sorted(clash)[0]!r} declared both as variable and constant")
            for name, pos in self.used.items():
                if name not in declared and name not in consts:
                    raise ParseError(f"undeclared variable {name!r}", *pos)
        for name in declared + consts:
            if name in self.sig.functions or name in self.sig.relations:
                raise ParseError(f"{name!r} is both a variable and a symbol")
        return Program(body, tuple(declared), tuple(consts))


def parse_program(source: str) -> ParsedFile:
    """Parse a source file into program, signature, axioms and postcondition."""
    return _Parser(source).parse_file()


def parse_formula(text: str, signature: Signature | None = None) -> PostCondition:
    parser = _Parser(text)
    if signature is not None:
        parser.sig = signature
    formula = parser.formula(in_post=True)
    if parser.tok.kind != "eof":
        raise parser.error(f"unexpected {parser.tok.text!r} after formula")
    return PostCondition(formula)


# --------------------------------------------------------------------------
# Desugaring
# --------------------------------------------------------------------------


def dnf(cond: Cond, positive: bool = True) -> list[list[Literal]]:
    """Disjunctive normal form of ``cond`` (or of its negation) over literals.

    Arguments must already be variables.
    """
    if isinstance(cond, CNot):
        return dnf(cond.arg, not positive)
    if isinstance(cond, CEq):
        return [[Literal("eq", (cond.left.name, cond.right.name), positive)]]
    if isinstance(cond, CRel):
        return [[Literal("rel", tuple(a.name for a in cond.args), positive, cond.rel)]]
    if isinstance(cond, (COr, CAnd)):
        disjunctive = isinstance(cond, COr) == positive
        left, right = dnf(cond.left, positive), dnf(cond.right, positive)
        if disjunctive:
            out = left + right
        else:
            out = [l + r for l in left for r in right]
        unique = []
        for conj in out:
            conj = list(dict.fromkeys(conj))
            if conj not in unique:
                unique.append(conj)
        return unique
    raise TypeError(f"not a condition: {cond!r}")


def is_atomic(cond: Cond) -> bool:
    return len(dnf(cond)) == 1 and len(dnf(cond)[0]) == 1


class _Desugarer:
    def __init__(self, program: Program):
        self.vars = list(program.vars)
        for c in program.consts:
            if c not in self.vars:
                self.vars.append(c)
        taken = [int(v[len(TEMP_PREFIX):]) for v in self.vars
                 if v.startswith(TEMP_PREFIX) and v[len(TEMP_PREFIX):].isdigit()]
        self.counter = max(taken) + 1 if taken else 0

    def fresh(self) -> str:
        name = f"{TEMP_PREFIX}{self.counter}"
        self.counter += 1
        self.vars.append(name)
        return name

    def hoist(self, expr: Expr, out: list) -> str:
        if isinstance(expr, Var):
            return expr.name
        args = tuple(self.hoist(a, out) for a in expr.args)
        tmp = self.fresh()
        out.append(AssignFn(tmp, expr.fn, args))
        return tmp

    def hoist_cond(self, cond: Cond, out: list) -> Cond:
        if isinstance(cond, CEq):
            return CEq(Var(self.hoist(cond.left, out)), Var(self.hoist(cond.right, out)))
        if isinstance(cond, CRel):
            return CRel(cond.rel, tuple(Var(self.hoist(a, out)) for a in cond.args))
        if isinstance(cond, CNot):
            return CNot(self.hoist_cond(cond.arg, out))
        if isinstance(cond, COr):
            return COr(self.hoist_cond(cond.left, out), self.hoist_cond(cond.right, out))
        if isinstance(cond, CAnd):
            return CAnd(self.hoist_cond(cond.left, out), self.hoist_cond(cond.right, out))
        raise TypeError(f"not a condition: {cond!r}")

    def stmt(self, s) -> Stmt:
        if isinstance(s, CORE_TYPES):
            return self.core(s)
        if isinstance(s, Block):
            return _seq([self.stmt(x) for x in s.stmts])
        if isinstance(s, SAssign):
            pre: list = []
            if isinstance(s.expr, Var):
                return Assign(s.target, s.expr.name)
            args = tuple(self.hoist(a, pre) for a in s.expr.args)
            if s.target in args:
                tmp = self.fresh()
                pre += [AssignFn(tmp, s.expr.fn, args), Assign(s.target, tmp)]
            else:
                pre.append(AssignFn(s.target, s.expr.fn, args))
            return _seq(pre)
        if isinstance(s, SAssume):
            pre = []
            cond = self.hoist_cond(s.cond, pre)
            return _seq(pre + [_assume_branches(dnf(cond))])
        if isinstance(s, SIf):
            pre = []
            cond = self.hoist_cond(s.cond, pre)
            then = self.stmt(s.then)
            orelse = self.stmt(s.orelse) if s.orelse is not None else Skip()
            pos, neg = dnf(cond), dnf(cond, False)
            if len(pos) == 1 and len(pos[0]) == 1:
                return _seq(pre + [If(pos[0][0], then, orelse)])
            branches = [_seq([Assume(l) for l in conj] + [then]) for conj in pos]
            branches += [_seq([Assume(l) for l in conj] + [orelse]) for conj in neg]
            return _seq(pre + [Choice(tuple(branches))])
        if isinstance(s, SWhile):
            pre = []
            cond = self.hoist_cond(s.cond, pre)
            body = self.stmt(s.body)
            pos, neg = dnf(cond), dnf(cond, False)
            if len(pos) == 1 and len(pos[0]) == 1:
                return _seq(pre + [While(pos[0][0], _seq([body] + pre))])
            entries = [_seq([Assume(l) for l in conj] + [body] + pre) for conj in pos]
            return _seq(pre + [Loop(_choice(entries)), _assume_branches(neg)])
        raise TypeError(f"not a statement: {s!r}")

    def core(self, s) -> Stmt:
        # Core programs are already lowered; rebuild only to normalize nesting.
        if isinstance(s, Seq):
            return _seq([self.stmt(x) for x in s.stmts])
        if isinstance(s, If):
            return If(s.lit, self.stmt(s.then), self.stmt(s.orelse))
        if isinstance(s, While):
            return While(s.lit, self.stmt(s.body))
        if isinstance(s, Choice):
            return Choice(tuple(self.stmt(b) for b in s.branches))
        if isinstance(s, Loop):
            return Loop(self.stmt(s.body))
        if isinstance(s, AssignFn) and s.target in s.args:
            tmp = self.fresh()
            return Seq((AssignFn(tmp, s.fn, s.args), Assign(s.target, tmp)))
        return s


def _flatten(stmts: Iterable) -> Iterator:
    for s in stmts:
        if isinstance(s, Seq):
            yield from _flatten(s.stmts)
        elif not isinstance(s, Skip):
            yield s


def _seq(stmts: Sequence) -> Stmt:
    flat = list(_flatten(stmts))
    if not flat:
        return Skip()
    if len(flat) == 1:
        return flat[0]
    return Seq(tuple(flat))


def _choice(branches: list) -> Stmt:
    return branches[0] if len(branches) == 1 else Choice(tuple(branches))


def _assume_branches(conjs: list[list[Literal]]) -> Stmt:
    return _choice([_seq([Assume(l) for l in conj]) for conj in conjs])


def desugar(p: Program) -> Program:
    """Lower a parsed program to the core form.

    Idempotent: a core program is returned unchanged.
    """
    d = _Desugarer(p)
    body = d.stmt(p.body)
    return Program(body, tuple(d.vars), p.consts)


def iter_core(stmt: Stmt) -> Iterator[Stmt]:
    """Yield every core statement node in ``stmt``, depth first."""
    yield stmt
    if isinstance(stmt, Seq):
        for s in stmt.stmts:
            yield from iter_core(s)
    elif isinstance(stmt, If):
        yield from iter_core(stmt.then)
        yield from iter_core(stmt.orelse)
    elif isinstance(stmt, While):
        yield from iter_core(stmt.body)
    elif isinstance(stmt, Choice):
        for b in stmt.branches:
            yield from iter_core(b)
    elif isinstance(stmt, Loop):
        yield from iter_core(stmt.body)


# --------------------------------------------------------------------------
# Axiom validation
# --------------------------------------------------------------------------


def validate_axioms(a: AxiomSet, sig: Signature) -> AxiomSet:
    """Check that ``a`` lies in the decidable fragment and is satisfiable."""
    for kind, text in a.rejected:
        raise UnsupportedAxiom(kind, text)
    for rel, props in a.rel_props:
        unknown = props - set(REL_FLAGS)
        if unknown:
            raise UnsupportedAxiom(sorted(unknown)[0], f"relation {rel}")
        if rel in sig.functions:
            raise ArityError(f"{rel!r} is declared as a relation but used as a function")
        arity = sig.relations.get(rel, 2)
        if arity != 2:
            raise ArityError(f"relation {rel!r} has arity {arity}; order properties need 2")
        if "refl" in props and ("irref" in props or "sto" in props):
            raise ContradictoryAxioms(rel, "reflexive and irreflexive")
        if "sto" in props and "symm" in props:
            raise ContradictoryAxioms(
                rel, "a symmetric strict total order exists only on a one-element universe")
    for fn, props in a.fn_props:
        unknown = props - set(FN_FLAGS)
        if unknown:
            raise UnsupportedAxiom(sorted(unknown)[0], f"function {fn}")
        if fn in sig.relations:
            raise ArityError(f"{fn!r} is declared as a function but used as a relation")
        arity = sig.functions.get(fn)
        if "comm" in props and "idem" in props:
            raise ArityError(f"function {fn!r} cannot be both commutative (binary) and idempotent (unary)")
        if "comm" in props and arity not in (None, 2):
            raise ArityError(f"commutative function {fn!r} must be binary, has arity {arity}")
        if "idem" in props and arity not in (None, 1):
            raise ArityError(f"idempotent function {fn!r} must be unary, has arity {arity}")
    return a


def load(source: str) -> tuple[Program, Signature, AxiomSet, PostCondition | None]:
    """Parse, validate and desugar a source file in one step."""
    parsed = parse_program(source)
    if parsed.program is None:
        raise ParseError("missing program section")
    axioms = validate_axioms(parsed.axioms, parsed.signature)
    return desugar(parsed.program), parsed.signature, axioms, parsed.post
