"""Parser for the ``cnf``/``fof`` subset of TPTP."""
from __future__ import annotations

import re

from . import formula as F
from .terms import (
    FUNCTION,
    PER_CLAUSE,
    PREDICATE,
    Clause,
    ClauseSet,
    TermBank,
)


class ParseError(ValueError):
    def __init__(self, msg, line=None, col=None):
        self.msg = msg
        self.line = line
        self.col = col
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + msg)


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*|/\*.*?\*/)
  | (?P<op><=>|<~>|=>|<=|~\||~&|!=|[()\[\],.:!?~&|=])
  | (?P<upper>[A-Z][A-Za-z0-9_]*)
  | (?P<lower>[a-z][A-Za-z0-9_]*)
  | (?P<dollar>\$\$?[a-z][A-Za-z0-9_]*)
  | (?P<quoted>'(?:[^'\\]|\\.)*')
  | (?P<number>[+-]?[0-9]+(?:\.[0-9]+)?)
    """,
    re.VERBOSE | re.DOTALL,
)


def tokenize(text: str):
    pos, line, line_start = 0, 1, 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        val = m.group()
        if kind not in ("ws", "comment"):
            out.append((kind, val, line, m.start() - line_start + 1))
        nl = val.count("\n")
        if nl:
            line += nl
            line_start = m.start() + val.rfind("\n") + 1
        pos = m.end()
    out.append(("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok[2], tok[3])

    def peek(self, val):
        return self.tok[1] == val and self.tok[0] == "op"

    def accept(self, val):
        if self.peek(val):
            self.i += 1
            return True
        return False

    def expect(self, val):
        if not self.accept(val):
            got = self.tok[1] or "end of input"
            raise self.error(f"expected {val!r}, got {got!r}")

    def name(self):
        kind, val, *_ = self.tok
        if kind in ("lower", "quoted", "number", "upper"):
            self.i += 1
            return val
        raise self.error(f"expected a name, got {val!r}")

    def skip_annotations(self):
        depth = 0
        while True:
            if self.tok[0] == "eof":
                raise self.error("unterminated annotation")
            if depth == 0 and self.peek(")"):
                return
            if self.peek("(") or self.peek("["):
                depth += 1
            elif self.peek(")") or self.peek("]"):
                depth -= 1
            self.i += 1

    def statements(self, lang):
        """Yield ``(name, role, tree, token)`` for each ``lang(...)`` statement."""
        while self.tok[0] != "eof":
            start = self.tok
            if start[1] not in ("cnf", "fof"):
                raise self.error(f"expected 'cnf' or 'fof', got {start[1]!r}")
            if start[1] != lang:
                raise self.error(f"{start[1]} statement not allowed here, expected {lang}")
            self.i += 1
            self.expect("(")
            name = self.name()
            self.expect(",")
            role = self.name()
            self.expect(",")
            tree = self.disjunction() if lang == "cnf" else self.formula()
            if self.accept(","):
                self.skip_annotations()
            self.expect(")")
            self.expect(".")
            yield name, role, tree, start

    # -- terms -------------------------------------------------------------
    def term(self):
        kind, val, *_ = self.tok
        if kind == "upper":
            self.i += 1
            return F.Var(val)
        if kind in ("lower", "quoted", "number", "dollar"):
            self.i += 1
            args = ()
            if self.accept("("):
                args = [self.term()]
                while self.accept(","):
                    args.append(self.term())
                self.expect(")")
                args = tuple(args)
            return F.Fn(val, args)
        raise self.error(f"expected a term, got {val or 'end of input'!r}")

    def atomic(self):
        tok = self.tok
        lhs = self.term()
        if self.accept("="):
            return F.Atom(F.Fn("=", (lhs, self.term())))
        if self.accept("!="):
            return F.Not(F.Atom(F.Fn("=", (lhs, self.term()))))
        if isinstance(lhs, F.Var):
            raise self.error("variable used as an atom", tok)
        if lhs.name == "$true" and not lhs.args:
            return F.Const(True)
        if lhs.name == "$false" and not lhs.args:
            return F.Const(False)
        return F.Atom(lhs)

    # -- cnf -----------------------------------------------------------------
    def disjunction(self):
        if self.accept("("):
            d = self.disjunction()
            self.expect(")")
            return d
        lits = [self.literal()]
        while self.accept("|"):
            lits.append(self.literal())
        return lits

    def literal(self):
        if self.accept("~"):
            a = self.atomic()
            if isinstance(a, F.Not):
                raise self.error("double negation in cnf literal")
            return F.Not(a)
        return self.atomic()

    # -- fof -----------------------------------------------------------------
    _BINARY = {"<=>": 0, "<~>": 0, "=>": 1, "<=": 1, "|": 2, "~|": 2, "&": 3, "~&": 3}

    def formula(self, min_prec=0):
        lhs = self.unitary()
        while self.tok[0] == "op" and self.tok[1] in self._BINARY:
            op = self.tok[1]
            prec = self._BINARY[op]
            if prec < min_prec:
                break
            self.i += 1
            rhs = self.formula(prec + 1)
            lhs = _combine(op, lhs, rhs)
        return lhs

    def unitary(self):
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        if self.accept("~"):
            return F.Not(self.unitary())
        for q, ctor in (("!", F.Forall), ("?", F.Exists)):
            if self.accept(q):
                self.expect("[")
                vs = [self.variable()]
                while self.accept(","):
                    vs.append(self.variable())
                self.expect("]")
                self.expect(":")
                return ctor(tuple(vs), self.unitary())
        return self.atomic()

    def variable(self):
        kind, val, *_ = self.tok
        if kind != "upper":
            raise self.error(f"expected a variable, got {val!r}")
        self.i += 1
        return val


def _combine(op, a, b):
    if op == "&":
        return F.And(_flat(F.And, a) + _flat(F.And, b))
    if op == "|":
        return F.Or(_flat(F.Or, a) + _flat(F.Or, b))
    if op == "=>":
        return F.Implies(a, b)
    if op == "<=":
        return F.Implies(b, a)
    if op == "<=>":
        return F.Iff(a, b)
    if op == "<~>":
        return F.Not(F.Iff(a, b))
    if op == "~|":
        return F.Not(F.Or((a, b)))
    if op == "~&":
        return F.Not(F.And((a, b)))
    raise AssertionError(op)


def _flat(cls, f):
    return f.args if isinstance(f, cls) else (f,)


def _check_bound(f, bound, tok):
    if isinstance(f, F.Atom):
        for v in _term_vars(f.pred):
            if v not in bound:
                raise ParseError(f"unbound variable {v}", tok[2], tok[3])
    elif isinstance(f, F.Not):
        _check_bound(f.arg, bound, tok)
    elif isinstance(f, (F.And, F.Or)):
        for a in f.args:
            _check_bound(a, bound, tok)
    elif isinstance(f, (F.Implies, F.Iff)):
        _check_bound(f.lhs, bound, tok)
        _check_bound(f.rhs, bound, tok)
    elif isinstance(f, (F.Forall, F.Exists)):
        _check_bound(f.body, bound | set(f.vars), tok)


def _term_vars(t):
    if isinstance(t, F.Var):
        yield t.name
    else:
        for a in t.args:
            yield from _term_vars(a)


def _check_signature(f, sig, tok):
    """Reject a name used with two arities or as both predicate and function."""
    def term(t, kind):
        if isinstance(t, F.Var):
            return
        key = (kind, len(t.args))
        old = sig.setdefault(t.name, key)
        if old != key:
            raise ParseError(
                f"symbol {t.name!r} used as {kind}/{len(t.args)}, previously {old[0]}/{old[1]}",
                tok[2], tok[3])
        for a in t.args:
            term(a, FUNCTION)

    for atom in F.atoms(f):
        term(atom.pred, PREDICATE)


def parse_fof(text: str) -> list:
    """Parse ``fof`` statements into ``(name, role, formula)`` triples."""
    p = _Parser(text)
    out = []
    sig = {}
    for name, role, f, tok in p.statements("fof"):
        _check_bound(f, set(), tok)
        _check_signature(f, sig, tok)
        out.append((name, role, f))
    return out


def parse_formula(text: str):
    """Parse one bare fof formula (no ``fof(...)`` wrapper, optional final '.')."""
    p = _Parser(text)
    f = p.formula()
    p.accept(".")
    if p.tok[0] != "eof":
        raise p.error(f"trailing input {p.tok[1]!r}")
    _check_bound(f, set(), p.toks[0])
    return f


def parse_cnf(text: str, *, into: ClauseSet | None = None, source: str = "",
              variable_scope: str = PER_CLAUSE) -> ClauseSet:
    """Parse ``cnf`` statements into an interned :class:`ClauseSet`.

    With ``into`` the clauses are appended to an existing clause set, sharing
    its term bank; ``source`` tags every new clause.
    """
    cs = into if into is not None else ClauseSet([], TermBank(), variable_scope)
    p = _Parser(text)
    for name, role, lits, tok in p.statements("cnf"):
        scope = len(cs.clauses) if cs.variable_scope == PER_CLAUSE else None
        try:
            literals = []
            for lit in lits:
                if isinstance(lit, F.Const) or (isinstance(lit, F.Not) and isinstance(lit.arg, F.Const)):
                    value = lit.value if isinstance(lit, F.Const) else not lit.arg.value
                    if value:
                        raise ParseError("$true in a cnf clause", tok[2], tok[3])
                    continue
                positive = not isinstance(lit, F.Not)
                atom = lit if positive else lit.arg
                literals.append(cs.bank.literal(positive, intern_atom(cs.bank, atom.pred, scope)))
        except ValueError as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(str(e), tok[2], tok[3]) from e
        cs.clauses.append(Clause(tuple(literals), role, name, source))
    return cs


def intern_term(bank: TermBank, t, scope=None, kind=FUNCTION):
    if isinstance(t, F.Var):
        return bank.var(t.name, scope)
    sym = bank.symbol(t.name, len(t.args), kind)
    return bank.app(sym, [intern_term(bank, a, scope) for a in t.args])


def intern_atom(bank: TermBank, pred, scope=None):
    return intern_term(bank, pred, scope, PREDICATE)
