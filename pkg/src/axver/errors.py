"""Exception hierarchy shared by all axver modules."""

from __future__ import annotations


class AxverError(Exception):
    """Base class for every error raised by axver."""


class ParseError(AxverError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(f"{where}{message}")


class ArityError(ParseError):
    """A function or relation symbol used with inconsistent arities."""


# Short explanations attached to rejected axiom classes.
UNDECIDABLE_REASONS = {
    "assoc": (
        "associativity is unsupported: verification of coherent programs modulo an "
        "associative function is undecidable, since a single coherent execution can "
        "encode the word problem for finitely presented semigroups"
    ),
    "epr": (
        "general EPR sentences are unsupported: verification of coherent programs "
        "modulo universally quantified (EPR) axioms is undecidable, via a reduction "
        "from Post's correspondence problem"
    ),
    "antisym": (
        "antisymmetry is unsupported: non-strict orders force implicit equalities "
        "between terms, which breaks the coherence discipline the decision "
        "procedure relies on"
    ),
}


class UnsupportedAxiom(AxverError):
    def __init__(self, kind: str, detail: str = ""):
        self.kind = kind
        self.detail = detail
        reason = UNDECIDABLE_REASONS.get(kind, kind)
        super().__init__(f"{reason}{': ' + detail if detail else ''}")


class ContradictoryAxioms(AxverError):
    def __init__(self, symbol: str, detail: str):
        self.symbol = symbol
        super().__init__(f"contradictory axioms on {symbol}: {detail}")


class StateLimitExceeded(AxverError):
    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"explored more than {limit} product states")
