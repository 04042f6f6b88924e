"""Hypergraph encoding of clause sets and the gather-index families.

Node sets are clauses (C), symbols (S) and terms/literals (T). Term index 0 is
the sentinel ``T0`` padding short applications; it is never a parent, never a
clause member, and always reads as the zero vector.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fol.terms import ClauseSet, Literal, Symbol, Term
from .tensor import Segments

T0 = 0
T0_TYPE = "T0"


# -- node typing --------------------------------------------------------------

def _role_rule(mapping: dict, default: str):
    def rule(clause):
        return mapping.get(clause.clause_type, default)
    return rule


def _kind_rule(sym: Symbol) -> str:
    return "predicate" if sym.is_predicate else "function"


def _basic_term_rule(node, is_literal: bool) -> str:
    if is_literal:
        return "literal"
    return "variable" if node.is_var else "term"


@dataclass
class NodeTypeConfig:
    """Type tags for every node class plus the rules assigning them.

    Symbol types listed in ``polar_symbol_types`` are sign-symmetric
    (predicate-like) and always start from the zero vector.
    """

    clause_types: tuple
    term_types: tuple
    symbol_types: tuple
    polar_symbol_types: frozenset
    clause_rule: Callable = field(repr=False)
    term_rule: Callable = field(repr=False)
    symbol_rule: Callable = field(default=_kind_rule, repr=False)
    name: str = "custom"

    def to_json(self) -> dict:
        return {"name": self.name, "clause_types": list(self.clause_types),
                "term_types": list(self.term_types), "symbol_types": list(self.symbol_types),
                "polar_symbol_types": sorted(self.polar_symbol_types)}


def default_config() -> NodeTypeConfig:
    return NodeTypeConfig(
        clause_types=("axiom", "conjecture"),
        term_types=("variable", "literal", "term"),
        symbol_types=("predicate", "function"),
        polar_symbol_types=frozenset({"predicate"}),
        clause_rule=_role_rule({"conjecture": "conjecture", "negated_conjecture": "conjecture"}, "axiom"),
        term_rule=_basic_term_rule,
        name="default",
    )


def premise_config() -> NodeTypeConfig:
    """Negated conjectures vs premises, one variable type."""
    return NodeTypeConfig(
        clause_types=("conjecture", "premise"),
        term_types=("variable", "literal", "term"),
        symbol_types=("predicate", "function"),
        polar_symbol_types=frozenset({"predicate"}),
        clause_rule=_role_rule({"conjecture": "conjecture", "negated_conjecture": "conjecture"}, "premise"),
        term_rule=_basic_term_rule,
        name="premise",
    )


def leancop_config() -> NodeTypeConfig:
    """Goal / path / axiom clauses; axiom vs tableaux variables.

    Clause roles ``goal`` and ``path`` are recognized, everything else is an
    axiom. A variable is a tableaux variable when its scope is ``"tableaux"``.
    """
    def term_rule(node, is_literal):
        if is_literal:
            return "literal"
        if node.is_var:
            return "var_tableaux" if node.var_scope == "tableaux" else "var_axiom"
        return "term"

    return NodeTypeConfig(
        clause_types=("goal", "path", "axiom"),
        term_types=("var_axiom", "var_tableaux", "literal", "term"),
        symbol_types=("predicate", "function"),
        polar_symbol_types=frozenset({"predicate"}),
        clause_rule=_role_rule({"goal": "goal", "path": "path"}, "axiom"),
        term_rule=term_rule,
        name="leancop",
    )


PRESETS = {"default": default_config, "premise": premise_config, "leancop": leancop_config}


# -- hypergraph ------------------------------------------------------------------

@dataclass
class Hypergraph:
    n_c: int
    n_s: int
    n_t: int
    ct_edges: np.ndarray  # (m, 2): clause, term
    st_edges: np.ndarray  # (k, 5): symbol, parent, child1, child2, sign
    clause_types: list
    symbol_types: list
    term_types: list  # term_types[0] == "T0"
    symbol_names: list = field(default_factory=list)
    term_labels: list = field(default_factory=list)
    # IR object -> node index; only present on graphs built from a ClauseSet
    symbol_index: dict = field(default_factory=dict, repr=False, compare=False)
    term_index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.ct_edges = np.asarray(self.ct_edges, dtype=np.int64).reshape(-1, 2)
        self.st_edges = np.asarray(self.st_edges, dtype=np.int64).reshape(-1, 5)


def _term_key(lit: Literal):
    """Graph node of a literal: the atom itself if positive, else the literal."""
    return lit.atom if lit.positive else lit


def build_graph(cs: ClauseSet, cfg: NodeTypeConfig | None = None) -> Hypergraph:
    """Encode ``cs`` as a hypergraph.

    Clauses keep input order; symbols and terms are numbered by first
    occurrence in a left-to-right pre-order traversal, after ``T0``.
    """
    cfg = cfg or default_config()
    clause_types = []
    for c in cs.clauses:
        tag = cfg.clause_rule(c)
        if tag not in cfg.clause_types:
            raise ValueError(f"clause type {tag!r} not in config {cfg.clause_types}")
        clause_types.append(tag)

    sym_index: dict = {}
    symbol_types, symbol_names = [], []
    term_index: dict = {}
    term_types, term_labels = [T0_TYPE], ["$T0"]
    ct, st = [], []

    def symbol(sym):
        j = sym_index.get(sym)
        if j is None:
            j = len(symbol_types)
            sym_index[sym] = j
            tag = cfg.symbol_rule(sym)
            if tag not in cfg.symbol_types:
                raise ValueError(f"symbol type {tag!r} not in config")
            symbol_types.append(tag)
            symbol_names.append(sym.name)
        return j

    def visit(node, is_literal):
        i = term_index.get(node)
        if i is not None:
            return i
        i = len(term_types)
        term_index[node] = i
        tag = cfg.term_rule(node, is_literal)
        if tag not in cfg.term_types:
            raise ValueError(f"term type {tag!r} not in config")
        term_types.append(tag)
        term_labels.append(str(node))
        if isinstance(node, Literal):
            sign, app = 1, node.atom
        elif node.is_var:
            return i
        else:
            sign, app = -1, node
        s = symbol(app.symbol)
        at = len(st)
        kids = [visit(a, False) for a in app.args]
        if len(kids) == 0:
            mine = [(s, i, T0, T0, sign)]
        elif len(kids) == 1:
            mine = [(s, i, kids[0], T0, sign)]
        else:
            mine = [(s, i, kids[k], kids[k + 1], sign) for k in range(len(kids) - 1)]
        # parent edges precede the edges of its subterms
        st[at:at] = mine
        return i

    for ci, clause in enumerate(cs.clauses):
        for lit in clause.literals:
            ct.append((ci, visit(_term_key(lit), True)))

    return Hypergraph(
        n_c=len(cs.clauses), n_s=len(symbol_types), n_t=len(term_types),
        ct_edges=np.array(ct, dtype=np.int64).reshape(-1, 2),
        st_edges=np.array(st, dtype=np.int64).reshape(-1, 5),
        clause_types=clause_types, symbol_types=symbol_types, term_types=term_types,
        symbol_names=symbol_names, term_labels=term_labels,
        symbol_index=sym_index, term_index=term_index,
    )


def node_of(g: Hypergraph, item) -> int:
    """Term index of a Term or Literal (literals map through their graph node)."""
    if isinstance(item, Literal):
        item = _term_key(item)
    return g.term_index[item]


def disjoint_union(graphs):
    """Concatenate graphs, sharing the single ``T0``.

    Returns the union and per-graph ``(clause, symbol, term)`` offsets; term
    ``i > 0`` of graph ``k`` becomes ``i + term_offset[k]``.
    """
    ct, st = [], []
    ctypes, stypes, ttypes = [], [], [T0_TYPE]
    snames, tlabels = [], ["$T0"]
    offsets = []
    oc = os_ = ot = 0
    for g in graphs:
        offsets.append((oc, os_, ot))
        if len(g.ct_edges):
            e = g.ct_edges.copy()
            e[:, 0] += oc
            e[:, 1] += ot
            ct.append(e)
        if len(g.st_edges):
            e = g.st_edges.copy()
            e[:, 0] += os_
            for col in (1, 2, 3):
                e[:, col] = np.where(e[:, col] == T0, T0, e[:, col] + ot)
            st.append(e)
        ctypes += g.clause_types
        stypes += g.symbol_types
        ttypes += g.term_types[1:]
        snames += g.symbol_names
        tlabels += g.term_labels[1:] if g.term_labels else [""] * (g.n_t - 1)
        oc += g.n_c
        os_ += g.n_s
        ot += g.n_t - 1
    u = Hypergraph(
        n_c=oc, n_s=os_, n_t=ot + 1,
        ct_edges=np.concatenate(ct) if ct else np.zeros((0, 2), np.int64),
        st_edges=np.concatenate(st) if st else np.zeros((0, 5), np.int64),
        clause_types=ctypes, symbol_types=stypes, term_types=ttypes,
        symbol_names=snames, term_labels=tlabels,
    )
    return u, offsets


# -- gather index -------------------------------------------------------------------

@dataclass
class Gather:
    """One gather family: entry ``k`` sends ``(a[k], b[k], c[k], g[k])`` to node ``seg.ids[k]``.

    Entries are grouped by receiving node, in edge order within a group.
    """

    seg: Segments
    a: np.ndarray
    b: np.ndarray | None = None
    c: np.ndarray | None = None
    g: np.ndarray | None = None

    def lists(self) -> list:
        out = [[] for _ in range(self.seg.n)]
        for k, j in enumerate(self.seg.ids):
            if self.b is None:
                out[j].append(int(self.a[k]))
            else:
                out[j].append((int(self.a[k]), int(self.b[k]), int(self.c[k]), int(self.g[k])))
        return out


def _group(receivers, n, *cols):
    order = np.argsort(receivers, kind="stable")
    seg = Segments(receivers[order], n)
    return (seg,) + tuple(c[order] for c in cols)


@dataclass
class FIndex:
    ct: Gather
    tc: Gather
    st: Gather
    ts: tuple  # ts[0..2] for positions d = 1..3


def build_index(g: Hypergraph) -> FIndex:
    """The six gather families, multiplicities preserved."""
    ce, se = g.ct_edges, g.st_edges
    ct = Gather(*_group(ce[:, 0], g.n_c, ce[:, 1]))
    tc = Gather(*_group(ce[:, 1], g.n_t, ce[:, 0]))
    s, p, x1, x2, sg = (se[:, k] for k in range(5))
    st = Gather(*_group(s, g.n_s, p, x1, x2, sg))
    ts = []
    # d=1: receiver is the parent; d=2, d=3: receiver is child1 / child2
    for recv, a, b in ((p, x1, x2), (x1, p, x2), (x2, p, x1)):
        keep = recv != T0
        ts.append(Gather(*_group(recv[keep], g.n_t, a[keep], b[keep], s[keep], sg[keep])))
    return FIndex(ct, tc, st, tuple(ts))


# -- isomorphism ---------------------------------------------------------------------

def canonical_form(g: Hypergraph):
    """Label-free summary equal for isomorphic graphs.

    Colours are only canonical relative to one refinement run, so the form
    combines the colour signatures of the final round with the sorted edge
    lists expressed in colours.
    """
    types = (sorted(Counter(g.clause_types).items()), sorted(Counter(g.symbol_types).items()),
             sorted(Counter(g.term_types).items()))
    return types, _wl_signature(g)


def _wl_signature(g: Hypergraph):
    # compress() ranks by repr of the full nested signature, which is itself
    # label-free, so identical structures produce identical colours.
    cc = [("c", t) for t in g.clause_types]
    sc = [("s", t) for t in g.symbol_types]
    tc = [("t", t) for t in g.term_types]
    history = []
    for _ in range(g.n_c + g.n_s + g.n_t + 1):
        nc = [[] for _ in range(g.n_c)]
        ns = [[] for _ in range(g.n_s)]
        nt = [[] for _ in range(g.n_t)]
        for c, t in g.ct_edges:
            nc[c].append(("ct", tc[t]))
            nt[t].append(("tc", cc[c]))
        for s, p, a, b, sg in g.st_edges:
            tup = (sc[s], tc[p], tc[a], tc[b], int(sg))
            ns[s].append(("s",) + tup)
            nt[p].append(("p",) + tup)
            if a != T0:
                nt[a].append(("a",) + tup)
            if b != T0:
                nt[b].append(("b",) + tup)
        sigs = sorted({repr(x) for x in
                       [(cc[i], tuple(sorted(nc[i], key=repr))) for i in range(g.n_c)]
                       + [(sc[i], tuple(sorted(ns[i], key=repr))) for i in range(g.n_s)]
                       + [(tc[i], tuple(sorted(nt[i], key=repr))) for i in range(g.n_t)]})
        rank = {s: k for k, s in enumerate(sigs)}
        new_cc = [rank[repr((cc[i], tuple(sorted(nc[i], key=repr))))] for i in range(g.n_c)]
        new_sc = [rank[repr((sc[i], tuple(sorted(ns[i], key=repr))))] for i in range(g.n_s)]
        new_tc = [rank[repr((tc[i], tuple(sorted(nt[i], key=repr))))] for i in range(g.n_t)]
        history.append(tuple(sigs))
        stable = (len(set(new_cc)) == len(set(cc)) and len(set(new_sc)) == len(set(sc))
                  and len(set(new_tc)) == len(set(tc)))
        cc, sc, tc = new_cc, new_sc, new_tc
        if stable:
            break
    ct = sorted((cc[c], tc[t]) for c, t in g.ct_edges)
    st = sorted((sc[s], tc[p], tc[a], tc[b], int(sg)) for s, p, a, b, sg in g.st_edges)
    return (tuple(history), tuple(sorted(cc)), tuple(sorted(sc)), tuple(sorted(tc)),
            tuple(ct), tuple(st))


def graph_isomorphic(g1: Hypergraph, g2: Hypergraph) -> bool:
    """Type-preserving isomorphism test by colour refinement.

    Sound for non-isomorphism; may in principle accept refinement-equivalent
    non-isomorphic graphs.
    """
    if (g1.n_c, g1.n_s, g1.n_t) != (g2.n_c, g2.n_s, g2.n_t):
        return False
    if len(g1.ct_edges) != len(g2.ct_edges) or len(g1.st_edges) != len(g2.st_edges):
        return False
    return canonical_form(g1) == canonical_form(g2)


def mapping_is_isomorphism(g1: Hypergraph, g2: Hypergraph, cmap, smap, tmap,
                           negated=()) -> bool:
    """Check that the given node maps carry g1's edge multisets onto g2's.

    ``negated`` lists g1 symbol indices whose edges flip sign.
    """
    if (g1.n_c, g1.n_s, g1.n_t) != (g2.n_c, g2.n_s, g2.n_t):
        return False
    cmap, smap, tmap = map(np.asarray, (cmap, smap, tmap))
    if tmap[T0] != T0:
        return False
    for m, n in ((cmap, g1.n_c), (smap, g1.n_s), (tmap, g1.n_t)):
        if sorted(m.tolist()) != list(range(n)):
            return False
    if [g1.clause_types[i] for i in range(g1.n_c)] != [g2.clause_types[cmap[i]] for i in range(g1.n_c)]:
        return False
    if any(g1.symbol_types[i] != g2.symbol_types[smap[i]] for i in range(g1.n_s)):
        return False
    if any(g1.term_types[i] != g2.term_types[tmap[i]] for i in range(g1.n_t)):
        return False
    ct1 = Counter((int(cmap[c]), int(tmap[t])) for c, t in g1.ct_edges)
    ct2 = Counter((int(c), int(t)) for c, t in g2.ct_edges)
    if ct1 != ct2:
        return False
    neg = set(int(x) for x in negated)
    st1 = Counter((int(smap[s]), int(tmap[p]), int(tmap[a]), int(tmap[b]),
                   -int(sg) if int(s) in neg else int(sg)) for s, p, a, b, sg in g1.st_edges)
    st2 = Counter(tuple(int(v) for v in e) for e in g2.st_edges)
    return st1 == st2


# -- serialization ----------------------------------------------------------------------

def graph_to_json(g: Hypergraph) -> dict:
    return {
        "n_c": g.n_c,
        "n_s": g.n_s,
        "n_t": g.n_t,
        "T0": T0,
        "node_types": {"clauses": list(g.clause_types), "symbols": list(g.symbol_types),
                       "terms": list(g.term_types)},
        "ct_edges": g.ct_edges.tolist(),
        "st_edges": g.st_edges.tolist(),
        "symbol_names": list(g.symbol_names),
        "term_labels": list(g.term_labels),
    }


def dump_graph(g: Hypergraph) -> str:
    return json.dumps(graph_to_json(g), indent=1)


def load_graph(text: str) -> Hypergraph:
    d = json.loads(text)
    nt = d["node_types"]
    return Hypergraph(
        n_c=d["n_c"], n_s=d["n_s"], n_t=d["n_t"],
        ct_edges=np.array(d["ct_edges"], dtype=np.int64).reshape(-1, 2),
        st_edges=np.array(d["st_edges"], dtype=np.int64).reshape(-1, 5),
        clause_types=list(nt["clauses"]), symbol_types=list(nt["symbols"]),
        term_types=list(nt["terms"]),
        symbol_names=list(d.get("symbol_names", [])), term_labels=list(d.get("term_labels", [])),
    )
