"""First-order clause IR with maximal subterm sharing.

Terms are hash-consed through a :class:`TermBank`: two structurally equal
terms built through the same bank are the same Python object, so node
identity can be decided with ``is``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

PREDICATE = "predicate"
FUNCTION = "function"

POSITIVE = True
NEGATIVE = False

PER_CLAUSE = "per_clause"
SHARED_NAMED = "shared_named"


@dataclass(frozen=True, order=True)
class Symbol:
    name: str
    arity: int
    kind: str = FUNCTION

    def __post_init__(self):
        if self.arity < 0:
            raise ValueError(f"negative arity for {self.name}")
        if self.kind not in (PREDICATE, FUNCTION):
            raise ValueError(f"bad symbol kind {self.kind!r}")

    @property
    def is_predicate(self) -> bool:
        return self.kind == PREDICATE

    def __str__(self):
        return f"{self.name}/{self.arity}"


class Term:
    """An interned variable or application node.

    Never construct directly; use :meth:`TermBank.var` / :meth:`TermBank.app`.
    Equality is identity.
    """

    __slots__ = ("symbol", "args", "var_name", "var_scope", "_text", "__weakref__")

    def __init__(self, symbol, args, var_name=None, var_scope=None):
        self.symbol = symbol
        self.args = args
        self.var_name = var_name
        self.var_scope = var_scope
        self._text = None

    @property
    def is_var(self) -> bool:
        return self.symbol is None

    def __str__(self):
        if self._text is None:
            if self.is_var:
                self._text = self.var_name
            elif not self.args:
                self._text = self.symbol.name
            elif self.symbol.name == "=" and len(self.args) == 2:
                self._text = f"{self.args[0]} = {self.args[1]}"
            else:
                self._text = f"{self.symbol.name}({','.join(map(str, self.args))})"
        return self._text

    def __repr__(self):
        return f"Term({self})"

    def subterms(self) -> Iterator["Term"]:
        """Pre-order traversal, shared subterms repeated."""
        yield self
        for a in self.args:
            yield from a.subterms()

    def variables(self) -> Iterator["Term"]:
        for t in self.subterms():
            if t.is_var:
                yield t


class Literal:
    """A signed atom. Interned like terms: ``(polarity, atom)`` is unique per bank."""

    __slots__ = ("positive", "atom", "__weakref__")

    def __init__(self, positive: bool, atom: Term):
        self.positive = positive
        self.atom = atom

    @property
    def symbol(self) -> Symbol:
        return self.atom.symbol

    def __str__(self):
        if self.positive:
            return str(self.atom)
        if self.atom.symbol.name == "=" and len(self.atom.args) == 2:
            return f"{self.atom.args[0]} != {self.atom.args[1]}"
        return f"~{self.atom}"

    def __repr__(self):
        return f"Literal({self})"


class TermBank:
    """Hash-consing constructor for terms and literals.

    Also enforces that each symbol name keeps one arity and kind.
    """

    def __init__(self):
        self._apps: dict = {}
        self._vars: dict = {}
        self._lits: dict = {}
        self.symbols: dict[str, Symbol] = {}

    def symbol(self, name: str, arity: int, kind: str) -> Symbol:
        old = self.symbols.get(name)
        if old is None:
            sym = Symbol(name, arity, kind)
            self.symbols[name] = sym
            return sym
        if old.arity != arity or old.kind != kind:
            raise ArityError(
                f"symbol {name!r} used as {kind}/{arity}, previously {old.kind}/{old.arity}"
            )
        return old

    def var(self, name: str, scope=None) -> Term:
        key = (name, scope)
        t = self._vars.get(key)
        if t is None:
            t = Term(None, (), name, scope)
            self._vars[key] = t
        return t

    def app(self, symbol: Symbol, args: Iterable[Term] = ()) -> Term:
        args = tuple(args)
        if len(args) != symbol.arity:
            raise ArityError(f"{symbol} applied to {len(args)} arguments")
        known = self.symbols.get(symbol.name)
        if known is None:
            self.symbols[symbol.name] = symbol
        elif known != symbol:
            raise ArityError(f"symbol {symbol} conflicts with {known.kind} {known}")
        key = (symbol, args)
        t = self._apps.get(key)
        if t is None:
            t = Term(symbol, args)
            self._apps[key] = t
        return t

    def literal(self, positive: bool, atom: Term) -> Literal:
        if atom.is_var or not atom.symbol.is_predicate:
            raise ValueError(f"literal atom must be a predicate application: {atom}")
        key = (bool(positive), atom)
        lit = self._lits.get(key)
        if lit is None:
            lit = Literal(bool(positive), atom)
            self._lits[key] = lit
        return lit

    def import_term(self, t: Term, rename=None) -> Term:
        """Rebuild ``t`` (from any bank) inside this bank.

        ``rename`` optionally maps symbols to symbols.
        """
        if t.is_var:
            return self.var(t.var_name, t.var_scope)
        sym = t.symbol if rename is None else rename(t.symbol)
        return self.app(sym, [self.import_term(a, rename) for a in t.args])


class ArityError(ValueError):
    pass


@dataclass(frozen=True)
class Clause:
    literals: tuple
    clause_type: str = "axiom"
    name: str = ""
    source: str = ""

    def __str__(self):
        if not self.literals:
            return "$false"
        return " | ".join(str(l) for l in self.literals)

    def symbols(self) -> Iterator[Symbol]:
        for lit in self.literals:
            for t in lit.atom.subterms():
                if not t.is_var:
                    yield t.symbol


@dataclass
class ClauseSet:
    clauses: list
    bank: TermBank = field(default_factory=TermBank)
    variable_scope: str = PER_CLAUSE
    # fresh symbol -> "skolem" | "definition"
    origins: dict = field(default_factory=dict)

    @property
    def symbol_table(self) -> set:
        out = set()
        for c in self.clauses:
            out.update(c.symbols())
        return out

    def symbols_in_order(self) -> list:
        """Symbols in first-occurrence order of a left-to-right traversal."""
        seen = {}
        for c in self.clauses:
            for s in c.symbols():
                if s not in seen:
                    seen[s] = None
        return list(seen)

    def __len__(self):
        return len(self.clauses)

    def __str__(self):
        return format_cnf(self)


def format_clause(c: Clause, index: int = 0) -> str:
    name = c.name or f"c{index + 1}"
    role = c.clause_type or "axiom"
    return f"cnf({name}, {role}, {c})."


def format_cnf(cs: ClauseSet) -> str:
    """Deterministic TPTP rendering, one clause per line."""
    return "".join(format_clause(c, i) + "\n" for i, c in enumerate(cs.clauses))
