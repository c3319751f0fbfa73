"""axver: verification of uninterpreted coherent programs modulo axioms."""

from axver.errors import (
    ArityError, AxverError, ContradictoryAxioms, ParseError, StateLimitExceeded, UnsupportedAxiom,
)

__version__ = "0.1.0"

__all__ = [
    "ArityError", "AxverError", "ContradictoryAxioms", "ParseError", "StateLimitExceeded",
    "UnsupportedAxiom", "__version__",
]
