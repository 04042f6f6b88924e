"""Clausification: NNF, inside-out Skolemization, CNF with definitional naming.

Pipeline per formula (conjectures are negated first):

1. eliminate ``=>`` and ``<=>`` and push negations to atoms;
2. rename bound variables apart;
3. replace each existential variable by ``skolemN(U1..Uk)`` where ``U1..Uk``
   are all universals in scope at that point;
4. distribute to CNF bottom-up. When a disjunction would expand to more than
   ``threshold`` clauses, every conjunctive disjunct is replaced by a fresh
   ``defN(free vars)`` literal and ``~defN | C`` is emitted for each of its
   clauses.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from . import formula as F
from .terms import FUNCTION, PER_CLAUSE, PREDICATE, Clause, ClauseSet, Symbol, TermBank
from .tptp import intern_atom

SKOLEM = "skolem"
DEFINITION = "definition"

CONJECTURE_ROLES = ("conjecture",)


@dataclass
class ClausifyConfig:
    threshold: int = 4
    variable_scope: str = PER_CLAUSE


def nnf(f, positive=True):
    """Negation normal form (``Implies``/``Iff`` eliminated)."""
    if isinstance(f, F.Const):
        return F.Const(f.value if positive else not f.value)
    if isinstance(f, F.Atom):
        return f if positive else F.Not(f)
    if isinstance(f, F.Not):
        return nnf(f.arg, not positive)
    if isinstance(f, F.And):
        parts = tuple(nnf(a, positive) for a in f.args)
        return F.And(parts) if positive else F.Or(parts)
    if isinstance(f, F.Or):
        parts = tuple(nnf(a, positive) for a in f.args)
        return F.Or(parts) if positive else F.And(parts)
    if isinstance(f, F.Implies):
        return nnf(F.Or((F.Not(f.lhs), f.rhs)), positive)
    if isinstance(f, F.Iff):
        a, b = f.lhs, f.rhs
        both = F.And((F.Or((F.Not(a), b)), F.Or((F.Not(b), a))))
        return nnf(both, positive)
    if isinstance(f, F.Forall):
        ctor = F.Forall if positive else F.Exists
        return ctor(f.vars, nnf(f.body, positive))
    if isinstance(f, F.Exists):
        ctor = F.Exists if positive else F.Forall
        return ctor(f.vars, nnf(f.body, positive))
    raise TypeError(f"unknown formula node {f!r}")


class Clausifier:
    """Stateful clausifier; fresh-symbol counters persist across formulas."""

    def __init__(self, config: ClausifyConfig | None = None, bank: TermBank | None = None):
        self.config = config or ClausifyConfig()
        self.bank = bank or TermBank()
        self.origins: dict = {}
        self._counters = {SKOLEM: 0, DEFINITION: 0}
        self._reserved: set = set()
        self._var_counter = 0
        self._used_vars: set = set()
        self._extra: list = []  # definition clauses produced while converting

    def reserve(self, formulas):
        """Keep fresh names away from every name already used in ``formulas``."""
        for f in formulas:
            for atom in F.atoms(f):
                self._reserve_term(atom.pred)

    def _reserve_term(self, t):
        if isinstance(t, F.Fn):
            self._reserved.add(t.name)
            for a in t.args:
                self._reserve_term(a)

    def _fresh(self, origin, arity, kind):
        prefix = "skolem" if origin == SKOLEM else "def"
        while True:
            self._counters[origin] += 1
            name = f"{prefix}{self._counters[origin]}"
            if name not in self._reserved and name not in self.bank.symbols:
                break
        sym = self.bank.symbol(name, arity, kind)
        self.origins[sym] = origin
        return sym

    # -- skolemization ---------------------------------------------------
    def skolemize(self, f, universals=(), subst=None):
        """Return a quantifier-free NNF formula over ``Var`` and ``Fn`` trees.

        Bound variables are renamed apart; the result's free variables are
        implicitly universal.
        """
        subst = subst or {}
        if isinstance(f, F.Const):
            return f
        if isinstance(f, F.Atom):
            return F.Atom(_subst(f.pred, subst))
        if isinstance(f, F.Not):
            return F.Not(self.skolemize(f.arg, universals, subst))
        if isinstance(f, (F.And, F.Or)):
            return type(f)(tuple(self.skolemize(a, universals, subst) for a in f.args))
        if isinstance(f, F.Forall):
            subst = dict(subst)
            new = []
            for v in f.vars:
                fresh = self._fresh_var(v)
                subst[v] = F.Var(fresh)
                new.append(F.Var(fresh))
            return self.skolemize(f.body, universals + tuple(new), subst)
        if isinstance(f, F.Exists):
            subst = dict(subst)
            for v in f.vars:
                sym = self._fresh(SKOLEM, len(universals), FUNCTION)
                subst[v] = F.Fn(sym.name, universals)
            return self.skolemize(f.body, universals, subst)
        raise TypeError(f"formula not in NNF: {f!r}")

    def _fresh_var(self, name):
        fresh = name
        while fresh in self._used_vars:
            self._var_counter += 1
            fresh = f"{name}_{self._var_counter}"
        self._used_vars.add(fresh)
        return fresh

    # -- cnf -----------------------------------------------------------------
    def cnf(self, f):
        """CNF of a quantifier-free NNF formula as a list of literal lists.

        A literal is ``(positive, Fn)``.
        """
        if isinstance(f, F.Const):
            return [] if f.value else [[]]
        if isinstance(f, F.Atom):
            return [[(True, f.pred)]]
        if isinstance(f, F.Not):
            assert isinstance(f.arg, F.Atom)
            return [[(False, f.arg.pred)]]
        if isinstance(f, F.And):
            out = []
            for a in f.args:
                out.extend(self.cnf(a))
            return out
        if isinstance(f, F.Or):
            parts = [self.cnf(a) for a in f.args]
            if any(len(p) == 0 for p in parts):
                return []
            size = 1
            for p in parts:
                size *= len(p)
            if size > self.config.threshold:
                parts = [self._name(p) if len(p) > 1 else p for p in parts]
            return [sum(combo, []) for combo in product(*parts)]
        raise TypeError(f"formula not quantifier-free NNF: {f!r}")

    def _name(self, clauses):
        free = []
        for cl in clauses:
            for _, atom in cl:
                for v in _vars(atom):
                    if v not in free:
                        free.append(v)
        sym = self._fresh(DEFINITION, len(free), PREDICATE)
        head = F.Fn(sym.name, tuple(F.Var(v) for v in free))
        for cl in clauses:
            self._extra.append([(False, head)] + cl)
        return [[(True, head)]]

    def clausify_formula(self, f, negate=False):
        if negate:
            f = F.Not(f)
        self._used_vars = set()
        g = self.skolemize(nnf(f))
        self._extra = []
        main = self.cnf(g)
        return main + self._extra


def _subst(t, subst):
    if isinstance(t, F.Var):
        return subst.get(t.name, t)
    return F.Fn(t.name, tuple(_subst(a, subst) for a in t.args))


def _vars(t):
    if isinstance(t, F.Var):
        yield t.name
    else:
        for a in t.args:
            yield from _vars(a)


def clausify(formulas, config: ClausifyConfig | None = None, *, into: ClauseSet | None = None):
    """Clausify ``(name, role, formula)`` triples into one ClauseSet.

    Conjectures are negated and their clauses get role ``negated_conjecture``.
    Fresh symbols share one counter across the whole call.
    """
    config = config or ClausifyConfig()
    cs = into if into is not None else ClauseSet([], TermBank(), config.variable_scope)
    cl = Clausifier(config, cs.bank)
    cl.reserve(f for _, _, f in formulas)
    for name, role, f in formulas:
        is_conj = role in CONJECTURE_ROLES
        out_role = "negated_conjecture" if is_conj else role
        for k, lits in enumerate(cl.clausify_formula(f, negate=is_conj)):
            scope = len(cs.clauses) if cs.variable_scope == PER_CLAUSE else None
            literals = tuple(
                cs.bank.literal(pos, intern_atom(cs.bank, atom, scope)) for pos, atom in lits
            )
            cs.clauses.append(Clause(literals, out_role, f"{name}_{k + 1}", name))
    cs.origins.update(cl.origins)
    return cs


def fresh_symbols(cs: ClauseSet, origin: str) -> list[Symbol]:
    return [s for s, o in cs.origins.items() if o == origin]
