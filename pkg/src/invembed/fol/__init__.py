"""First-order logic core: clause IR, TPTP parsing, clausification."""
from .clausify import DEFINITION, SKOLEM, ClausifyConfig, Clausifier, clausify, nnf
from .deepmath import DeepMathProblem, parse_deepmath
from .stats import symbol_label, symbol_statistics
from .terms import (
    FUNCTION,
    PER_CLAUSE,
    PREDICATE,
    SHARED_NAMED,
    ArityError,
    Clause,
    ClauseSet,
    Literal,
    Symbol,
    Term,
    TermBank,
    format_cnf,
)
from .tptp import ParseError, parse_cnf, parse_fof, parse_formula

__all__ = [
    "DEFINITION", "SKOLEM", "ClausifyConfig", "Clausifier", "clausify", "nnf",
    "DeepMathProblem", "parse_deepmath", "symbol_label", "symbol_statistics",
    "FUNCTION", "PER_CLAUSE", "PREDICATE", "SHARED_NAMED", "ArityError", "Clause",
    "ClauseSet", "Literal", "Symbol", "Term", "TermBank", "format_cnf",
    "ParseError", "parse_cnf", "parse_fof", "parse_formula",
]
