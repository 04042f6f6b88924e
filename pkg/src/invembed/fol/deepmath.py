"""DeepMath problem files: one conjecture per file, lines prefixed ``C``/``+``/``-``."""
from __future__ import annotations

from dataclasses import dataclass, field

from .tptp import ParseError, parse_fof, parse_formula


@dataclass
class DeepMathProblem:
    name: str
    conjecture: tuple  # (name, formula)
    premises: list = field(default_factory=list)  # (name, formula, label 1/0)


def _formula(body: str, lineno: int):
    body = body.strip()
    try:
        if body.startswith("fof("):
            [(name, _, f)] = parse_fof(body)
            return name, f
        return None, parse_formula(body)
    except ParseError as e:
        col = e.col if e.line == 1 else None
        raise ParseError(e.msg, lineno, col) from e
    except ValueError as e:
        raise ParseError(str(e), lineno) from e


def parse_deepmath(text: str, name: str = "") -> DeepMathProblem:
    conj = None
    premises = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        tag, body = line[:1], line[1:]
        if tag not in "C+-" or not body[:1].isspace():
            raise ParseError(f"expected 'C ', '+ ' or '- ' prefix in {name or 'input'}", lineno, 1)
        fname, f = _formula(body, lineno)
        if tag == "C":
            if conj is not None:
                raise ParseError("second conjecture line", lineno, 1)
            conj = (fname or "conjecture", f)
        else:
            premises.append((fname or f"premise{len(premises) + 1}", f, 1 if tag == "+" else 0))
    if conj is None:
        raise ParseError(f"no conjecture line in {name or 'input'}")
    return DeepMathProblem(name, conj, premises)
