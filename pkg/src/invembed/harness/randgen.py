"""Random clause sets for property tests and the invariance suite."""
from __future__ import annotations

import numpy as np

from ..fol.terms import FUNCTION, PREDICATE, Clause, ClauseSet, TermBank

# (name, arity); the pools keep 0-, 1- and 2-ary symbols of both kinds
PREDICATES = (("p", 1), ("q", 2), ("r", 0), ("e", 2), ("u", 3))
FUNCTIONS = (("a", 0), ("b", 0), ("f", 1), ("g", 2), ("h", 3))
VARIABLES = ("X", "Y", "Z")


def random_term(rng: np.random.Generator, bank: TermBank, depth: int, scope, funcs=FUNCTIONS):
    """A term of depth at most ``depth`` (a constant or variable has depth 1)."""
    if depth <= 1 or rng.random() < 0.35:
        if rng.random() < 0.5:
            return bank.var(VARIABLES[int(rng.integers(len(VARIABLES)))], scope)
        consts = [f for f in funcs if f[1] == 0]
        name, _ = consts[int(rng.integers(len(consts)))]
        return bank.app(bank.symbol(name, 0, FUNCTION))
    name, arity = funcs[int(rng.integers(len(funcs)))]
    args = [random_term(rng, bank, depth - 1, scope, funcs) for _ in range(arity)]
    return bank.app(bank.symbol(name, arity, FUNCTION), args)


def random_clause_set(rng: np.random.Generator, max_clauses: int = 8, max_literals: int = 3,
                      max_depth: int = 3, clause_type: str = "axiom") -> ClauseSet:
    """Up to ``max_clauses`` clauses; atoms have depth at most ``max_depth``.

    The first literal is always ``q(s, t)`` with ``s`` and ``t`` distinct, so
    swapping the arguments of ``q`` is a real change of the clause set.
    """
    bank = TermBank()
    n = int(rng.integers(1, max_clauses + 1))
    clauses = []
    for i in range(n):
        k = int(rng.integers(1, max_literals + 1))
        lits = []
        for _ in range(k):
            if i == 0 and not lits:
                name, arity = "q", 2
            else:
                name, arity = PREDICATES[int(rng.integers(len(PREDICATES)))]
            args = [random_term(rng, bank, max_depth - 1, i) for _ in range(arity)]
            while i == 0 and not lits and args[0] is args[1]:
                args[1] = random_term(rng, bank, max_depth - 1, i)
            atom = bank.app(bank.symbol(name, arity, PREDICATE), args)
            lits.append(bank.literal(bool(rng.random() < 0.5), atom))
        role = "negated_conjecture" if clause_type == "mixed" and rng.random() < 0.3 else (
            "axiom" if clause_type == "mixed" else clause_type)
        clauses.append(Clause(tuple(lits), role, f"c{i + 1}"))
    return ClauseSet(clauses, bank)


def random_clause_sets(seed: int, count: int, **kw) -> list:
    rng = np.random.default_rng(seed)
    return [random_clause_set(rng, **kw) for _ in range(count)]
