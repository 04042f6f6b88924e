"""Uninterned first-order formula trees, as produced by the FOF parser."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Fn:
    """Function or predicate application (a 0-ary one is a constant)."""

    name: str
    args: tuple = ()

    def __str__(self):
        if self.name == "=" and len(self.args) == 2:
            return f"{self.args[0]} = {self.args[1]}"
        if not self.args:
            return self.name
        return f"{self.name}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self):
        return "$true" if self.value else "$false"


@dataclass(frozen=True)
class Atom:
    pred: Fn

    def __str__(self):
        return str(self.pred)


@dataclass(frozen=True)
class Not:
    arg: object

    def __str__(self):
        if isinstance(self.arg, Atom) and self.arg.pred.name == "=":
            a, b = self.arg.pred.args
            return f"{a} != {b}"
        return f"~{_wrap(self.arg)}"


@dataclass(frozen=True)
class And:
    args: tuple

    def __str__(self):
        return " & ".join(_wrap(a) for a in self.args)


@dataclass(frozen=True)
class Or:
    args: tuple

    def __str__(self):
        return " | ".join(_wrap(a) for a in self.args)


@dataclass(frozen=True)
class Implies:
    lhs: object
    rhs: object

    def __str__(self):
        return f"{_wrap(self.lhs)} => {_wrap(self.rhs)}"


@dataclass(frozen=True)
class Iff:
    lhs: object
    rhs: object

    def __str__(self):
        return f"{_wrap(self.lhs)} <=> {_wrap(self.rhs)}"


@dataclass(frozen=True)
class Forall:
    vars: tuple
    body: object

    def __str__(self):
        return f"![{','.join(self.vars)}]: {_wrap(self.body)}"


@dataclass(frozen=True)
class Exists:
    vars: tuple
    body: object

    def __str__(self):
        return f"?[{','.join(self.vars)}]: {_wrap(self.body)}"


def _wrap(f) -> str:
    if isinstance(f, (Atom, Const, Not, Forall, Exists)):
        return str(f)
    return f"({f})"


def atoms(f):
    """Yield every atom of ``f`` left to right."""
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, Not):
        yield from atoms(f.arg)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from atoms(a)
    elif isinstance(f, (Implies, Iff)):
        yield from atoms(f.lhs)
        yield from atoms(f.rhs)
    elif isinstance(f, (Forall, Exists)):
        yield from atoms(f.body)


def evaluate(f, valuation) -> bool:
    """Truth value of a quantifier-free formula; ``valuation`` maps atom text to bool."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Atom):
        return valuation[str(f)]
    if isinstance(f, Not):
        return not evaluate(f.arg, valuation)
    if isinstance(f, And):
        return all(evaluate(a, valuation) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, valuation) for a in f.args)
    if isinstance(f, Implies):
        return (not evaluate(f.lhs, valuation)) or evaluate(f.rhs, valuation)
    if isinstance(f, Iff):
        return evaluate(f.lhs, valuation) == evaluate(f.rhs, valuation)
    raise TypeError(f"not propositional: {f}")
