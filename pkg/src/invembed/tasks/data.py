"""Training examples for the premise-selection and symbol-guessing tasks."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..fol.clausify import ClausifyConfig, clausify
from ..fol.stats import CLASS_LABELS
from ..fol.terms import ClauseSet, TermBank
from ..fol.tptp import parse_cnf
from ..graph import FIndex, Hypergraph, NodeTypeConfig, build_graph, build_index, disjoint_union

CONJECTURE = "conjecture"
UNK = "<unk>"
IGNORE_FRESH = "ignore-fresh"
LABEL_FRESH = "label-fresh"


@dataclass
class PremiseProblem:
    """One conjecture with all candidate premises, embedded as a single graph."""

    id: str
    cs: ClauseSet
    conj: list  # clause indices of the negated conjecture
    candidates: list  # clause-index list per candidate premise
    labels: list  # 1 positive, 0 negative
    graph: Hypergraph | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.conj:
            raise ValueError(f"{self.id}: conjecture has no clauses")
        seen = set(self.conj)
        for cand in self.candidates:
            if not cand:
                raise ValueError(f"{self.id}: candidate premise without clauses")
            if seen & set(cand):
                raise ValueError(f"{self.id}: overlapping clause sets")
            seen |= set(cand)


@dataclass
class SymbolProblem:
    id: str
    cs: ClauseSet
    graph: Hypergraph | None = field(default=None, repr=False)


def premise_problem_from_sources(pid, cs: ClauseSet, conj_source, cand_sources, labels):
    by_source: dict = {}
    for i, c in enumerate(cs.clauses):
        by_source.setdefault(c.source, []).append(i)
    cands, labs = [], []
    for src, lab in zip(cand_sources, labels):
        if by_source.get(src):
            cands.append(by_source[src])
            labs.append(int(lab))
    return PremiseProblem(pid, cs, by_source.get(conj_source, []), cands, labs)


def premise_problem_from_record(rec: dict) -> PremiseProblem:
    cs = ClauseSet([], TermBank())
    parse_cnf(rec["conjecture"], into=cs, source=CONJECTURE)
    srcs, labels = [], []
    for k, cand in enumerate(rec["candidates"]):
        src = f"premise{k}"
        parse_cnf(cand["cnf"], into=cs, source=src)
        srcs.append(src)
        labels.append(cand["label"])
    return premise_problem_from_sources(rec["id"], cs, CONJECTURE, srcs, labels)


def premise_problem_from_deepmath(prob, config: ClausifyConfig | None = None) -> PremiseProblem:
    cname, cf = prob.conjecture
    formulas = [(cname, "conjecture", cf)] + [(n, "axiom", f) for n, f, _ in prob.premises]
    names = [n for n, _, _ in prob.premises]
    if len(set(names)) != len(names) or cname in names:
        formulas = [("conjecture", "conjecture", cf)] + [
            (f"premise{k}", "axiom", f) for k, (_, f, _) in enumerate(prob.premises)]
        cname, names = "conjecture", [f"premise{k}" for k in range(len(prob.premises))]
    cs = clausify(formulas, config)
    return premise_problem_from_sources(prob.name, cs, cname, names, [l for *_, l in prob.premises])


def symbol_problem_from_record(rec: dict) -> SymbolProblem:
    cs = ClauseSet([], TermBank())
    parse_cnf(rec["cnf"], into=cs)
    fresh = rec.get("origins", {})
    if fresh:
        for sym in cs.symbol_table:
            if sym.name in fresh:
                cs.origins[sym] = fresh[sym.name]
    return SymbolProblem(rec["id"], cs)


def load_jsonl(path) -> list:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def problems_from_records(records):
    out = []
    for rec in records:
        if rec["task"] == "premises":
            out.append(premise_problem_from_record(rec))
        elif rec["task"] == "symbols":
            out.append(symbol_problem_from_record(rec))
        else:
            raise ValueError(f"unknown task {rec['task']!r}")
    return out


# -- symbol labels --------------------------------------------------------------------------

def symbol_targets(p: SymbolProblem, mode: str = IGNORE_FRESH):
    """Per symbol node: ``(label or None, in_conjecture)`` in graph order."""
    g = p.graph
    inv = {j: s for s, j in g.symbol_index.items()}
    conj_syms = set()
    for c in p.cs.clauses:
        if c.clause_type in ("conjecture", "negated_conjecture"):
            conj_syms.update(c.symbols())
    has_conj = bool(conj_syms)
    out = []
    for j in range(g.n_s):
        sym = inv[j]
        origin = p.cs.origins.get(sym)
        if origin is None:
            label = sym.name
        elif mode == LABEL_FRESH:
            label = CLASS_LABELS[origin]
        else:
            label = None
        out.append((label, (sym in conj_syms) if has_conj else True))
    return out


def build_vocab(problems, mode: str = IGNORE_FRESH, cutoff: int = 10) -> list:
    """Labels with at least ``cutoff`` training occurrences, then ``<unk>``."""
    counts = Counter()
    for p in problems:
        for label, _ in symbol_targets(p, mode):
            if label is not None:
                counts[label] += 1
    kept = sorted((l for l, n in counts.items() if n >= cutoff), key=lambda l: (-counts[l], l))
    return kept + [UNK]


# -- batching ---------------------------------------------------------------------------------

def ensure_graphs(problems, cfg: NodeTypeConfig):
    for p in problems:
        if p.graph is None:
            p.graph = build_graph(p.cs, cfg)


@dataclass
class Batch:
    graph: Hypergraph
    index: FIndex
    offsets: list
    problems: list


def make_batch(problems) -> Batch:
    g, offsets = disjoint_union([p.graph for p in problems])
    return Batch(g, build_index(g), offsets, list(problems))


def premise_batch_lists(batch: Batch):
    conj, prem, labels = [], [], []
    for p, (oc, _, _) in zip(batch.problems, batch.offsets):
        cl = [oc + i for i in p.conj]
        for cand, lab in zip(p.candidates, p.labels):
            conj.append(cl)
            prem.append([oc + i for i in cand])
            labels.append(lab)
    return conj, prem, np.asarray(labels, dtype=np.float64).reshape(-1, 1)


def symbol_batch_targets(batch: Batch, vocab: list, mode: str = IGNORE_FRESH):
    """Scored symbol rows, target class ids, and per-row (problem, in_conjecture)."""
    pos = {l: k for k, l in enumerate(vocab)}
    unk = pos[UNK]
    rows, ids, info = [], [], []
    for k, (p, (_, os_, _)) in enumerate(zip(batch.problems, batch.offsets)):
        for j, (label, in_conj) in enumerate(symbol_targets(p, mode)):
            if label is None:
                continue
            rows.append(os_ + j)
            ids.append(pos.get(label, unk))
            info.append((k, in_conj, label))
    return np.asarray(rows, dtype=np.int64), np.asarray(ids, dtype=np.int64), info


def split_by_hash(names, test_fraction: float = 0.1):
    """Deterministic train/test split from a hash of each name."""
    import hashlib

    train, test = [], []
    for i, name in enumerate(names):
        h = int.from_bytes(hashlib.sha256(str(name).encode()).digest()[:8], "big")
        (test if h / 2**64 < test_fraction else train).append(i)
    return train, test
