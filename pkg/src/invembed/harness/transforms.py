"""Syntactic transforms of clause sets together with the node maps they induce."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..fol.terms import Clause, ClauseSet, Literal, Symbol, Term, TermBank
from ..graph import T0, Hypergraph

RENAME = "rename_symbols"
NEGATE = "negate_predicate"
PERMUTE_CLAUSES = "permute_clauses"
PERMUTE_LITERALS = "permute_literals"
# not an invariance: used as a negative control
SWAP_ARGS = "swap_arguments"

INVARIANT_KINDS = (RENAME, NEGATE, PERMUTE_CLAUSES, PERMUTE_LITERALS)
KINDS = INVARIANT_KINDS + (SWAP_ARGS,)


class TransformError(ValueError):
    pass


@dataclass(frozen=True)
class Transform:
    """One presentation change.

    ``rename_symbols``: ``names`` maps old symbol names to new ones (and
    ``variables`` optionally renames variables). ``negate_predicate`` and
    ``swap_arguments``: ``symbol`` names the target. ``permute_clauses``:
    clause ``i`` moves to position ``perm[i]``. ``permute_literals``:
    ``perms[i][j]`` is the new position of literal ``j`` of clause ``i``.
    """

    kind: str
    names: dict = field(default_factory=dict)
    variables: dict = field(default_factory=dict)
    symbol: str = ""
    perm: tuple = ()
    perms: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise TransformError(f"unknown transform kind {self.kind!r}")


@dataclass
class NodeMap:
    """Old-to-new correspondence at the IR level."""

    clauses: list  # old clause index -> new clause index
    symbols: dict  # old Symbol -> new Symbol
    nodes: dict  # old graph node (Term or negative Literal) -> new one
    negated: tuple = ()  # old symbols whose sign flips

    def graph_maps(self, g1: Hypergraph, g2: Hypergraph):
        """Index arrays ``(cmap, smap, tmap)`` from g1 node ids to g2 node ids."""
        cmap = np.asarray(self.clauses, dtype=np.int64)
        smap = np.zeros(g1.n_s, dtype=np.int64)
        for sym, j in g1.symbol_index.items():
            smap[j] = g2.symbol_index[self.symbols[sym]]
        tmap = np.zeros(g1.n_t, dtype=np.int64)
        tmap[T0] = T0
        for node, i in g1.term_index.items():
            tmap[i] = g2.term_index[self.nodes[node]]
        neg = [g1.symbol_index[s] for s in self.negated if s in g1.symbol_index]
        return cmap, smap, tmap, neg


def _check_perm(p, n, what):
    if sorted(int(x) for x in p) != list(range(n)):
        raise TransformError(f"{what} is not a permutation of range({n})")


def _find_symbol(cs: ClauseSet, name: str) -> Symbol:
    for s in cs.symbol_table:
        if s.name == name:
            return s
    raise TransformError(f"unknown symbol {name!r}")


def apply_transform(cs: ClauseSet, t: Transform):
    """Return ``(new ClauseSet, NodeMap)``.

    The new clause set lives in a fresh term bank; the map sends every graph
    node of ``cs`` to the corresponding node of the result.
    """
    n = len(cs.clauses)
    sym_map = {s: s for s in cs.symbol_table}
    var_map: dict = {}
    negated: tuple = ()
    swap = None

    if t.kind == RENAME:
        used = {s.name for s in cs.symbol_table}
        for old in t.names:
            if old not in used:
                raise TransformError(f"unknown symbol {old!r}")
        new_names = [t.names.get(s.name, s.name) for s in cs.symbol_table]
        if len(set(new_names)) != len(new_names):
            raise TransformError("renaming is not injective on the symbols in use")
        sym_map = {s: Symbol(t.names.get(s.name, s.name), s.arity, s.kind) for s in cs.symbol_table}
        var_map = dict(t.variables)
    elif t.kind == NEGATE:
        target = _find_symbol(cs, t.symbol)
        if not target.is_predicate:
            raise TransformError(f"{t.symbol!r} is not a predicate symbol")
        negated = (target,)
    elif t.kind == SWAP_ARGS:
        swap = _find_symbol(cs, t.symbol)
        if swap.arity < 2:
            raise TransformError(f"{t.symbol!r} has fewer than two arguments")

    cperm = list(range(n))
    if t.kind == PERMUTE_CLAUSES:
        if len(t.perm) != n:
            raise TransformError("clause permutation has the wrong length")
        _check_perm(t.perm, n, "clause permutation")
        cperm = [int(x) for x in t.perm]
    lperms = [list(range(len(c.literals))) for c in cs.clauses]
    if t.kind == PERMUTE_LITERALS:
        if len(t.perms) != n:
            raise TransformError("need one literal permutation per clause")
        for i, (c, p) in enumerate(zip(cs.clauses, t.perms)):
            _check_perm(p, len(c.literals), f"literal permutation of clause {i}")
        lperms = [[int(x) for x in p] for p in t.perms]

    bank = TermBank()
    memo: dict = {}

    def term(x: Term) -> Term:
        out = memo.get(x)
        if out is None:
            if x.is_var:
                out = bank.var(var_map.get(x.var_name, x.var_name), x.var_scope)
            else:
                args = [term(a) for a in x.args]
                if swap is not None and x.symbol == swap:
                    args[0], args[1] = args[1], args[0]
                out = bank.app(sym_map[x.symbol], args)
            memo[x] = out
        return out

    nodes: dict = {}

    def literal(lit: Literal) -> Literal:
        flip = lit.atom.symbol in negated
        new = bank.literal(lit.positive != flip, term(lit.atom))
        nodes[lit.atom if lit.positive else lit] = new.atom if new.positive else new
        return new

    new_clauses: list = [None] * n
    for i, c in enumerate(cs.clauses):
        lits: list = [None] * len(c.literals)
        for j, lit in enumerate(c.literals):
            lits[lperms[i][j]] = literal(lit)
        new_clauses[cperm[i]] = Clause(tuple(lits), c.clause_type, c.name, c.source)
    for old, new in memo.items():
        nodes.setdefault(old, new)

    out = ClauseSet(new_clauses, bank, cs.variable_scope,
                    {sym_map[s]: o for s, o in cs.origins.items() if s in sym_map})
    return out, NodeMap(cperm, sym_map, nodes, negated)


def random_transform(cs: ClauseSet, kind: str, rng: np.random.Generator) -> Transform:
    """A random instance of ``kind`` applicable to ``cs``."""
    syms = sorted(cs.symbol_table, key=lambda s: (s.name, s.arity))
    if kind == RENAME:
        names = [s.name for s in syms]
        fresh = [f"r{k}" for k in rng.permutation(len(names))]
        variables = {}
        for c in cs.clauses:
            for lit in c.literals:
                for v in lit.atom.variables():
                    variables.setdefault(v.var_name, f"V{len(variables)}")
        return Transform(RENAME, names=dict(zip(names, fresh)), variables=variables)
    if kind == NEGATE:
        preds = [s for s in syms if s.is_predicate]
        if not preds:
            raise TransformError("no predicate to negate")
        return Transform(NEGATE, symbol=preds[int(rng.integers(len(preds)))].name)
    if kind == PERMUTE_CLAUSES:
        return Transform(PERMUTE_CLAUSES, perm=tuple(int(x) for x in rng.permutation(len(cs.clauses))))
    if kind == PERMUTE_LITERALS:
        return Transform(PERMUTE_LITERALS, perms=tuple(
            tuple(int(x) for x in rng.permutation(len(c.literals))) for c in cs.clauses))
    if kind == SWAP_ARGS:
        wide = [s for s in syms if s.arity >= 2]
        if not wide:
            raise TransformError("no symbol with two or more arguments")
        return Transform(SWAP_ARGS, symbol=wide[int(rng.integers(len(wide)))].name)
    raise TransformError(f"unknown transform kind {kind!r}")


__all__ = ["Transform", "NodeMap", "TransformError", "apply_transform", "random_transform",
           "RENAME", "NEGATE", "PERMUTE_CLAUSES", "PERMUTE_LITERALS", "SWAP_ARGS",
           "INVARIANT_KINDS", "KINDS"]
