"""Seeded toy datasets standing in for DeepMath at desk scale.

Records are plain dicts (one JSON line each):

* symbols: ``{"id", "task": "symbols", "cnf"}`` -- labels are the symbol names;
* premises: ``{"id", "task": "premises", "conjecture", "candidates": [{"label", "cnf"}]}``.
"""
from __future__ import annotations

import json

import numpy as np

# Ten symbols; every name is pinned down by the shape of the axioms it occurs in.
SYMBOL_VOCAB = ("equal", "less", "nat", "member", "zero", "succ", "plus", "times", "empty", "insert")

_SCHEMAS = (
    ["equal(X,X)"],
    ["~equal(X,Y)", "equal(Y,X)"],
    ["~less(X,Y)", "~less(Y,Z)", "less(X,Z)"],
    ["~less(X,X)"],
    ["nat(zero)"],
    ["~nat(X)", "nat(succ(X))"],
    ["equal(plus(X,zero),X)"],
    ["equal(plus(X,succ(Y)),succ(plus(X,Y)))"],
    ["equal(times(X,zero),zero)"],
    ["equal(times(X,succ(Y)),plus(times(X,Y),X))"],
    ["member(X,insert(X,Y))"],
    ["~member(X,empty)"],
    ["less(X,succ(X))"],
    ["~member(X,Y)", "member(X,insert(Z,Y))"],
    ["~nat(X)", "~equal(X,zero)", "less(zero,X)"],
)


def _numeral(k):
    s = "zero"
    for _ in range(k):
        s = f"succ({s})"
    return s


def _ground_facts(rng):
    k = int(rng.integers(0, 3))
    return [
        [f"nat({_numeral(k + 1)})"],
        [f"less({_numeral(k)},{_numeral(k + 1)})"],
        [f"member({_numeral(k)},insert({_numeral(k)},empty))"],
        [f"equal(plus({_numeral(k)},zero),{_numeral(k)})"],
    ]


_VAR_POOL = ("A", "B", "C", "D", "U", "V", "W", "X", "Y", "Z", "X1", "Y1", "Z1")


def _rename_vars(lit: str, mapping: dict) -> str:
    out = []
    i = 0
    while i < len(lit):
        ch = lit[i]
        if ch.isupper() and (i == 0 or not (lit[i - 1].isalnum() or lit[i - 1] == "_")):
            j = i
            while j < len(lit) and (lit[j].isalnum() or lit[j] == "_"):
                j += 1
            out.append(mapping[lit[i:j]])
            i = j
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _clause_text(name, role, lits, rng):
    lits = list(lits)
    rng.shuffle(lits)
    names = sorted({v for l in lits for v in _vars_of(l)})
    fresh = list(rng.permutation(_VAR_POOL)[: len(names)])
    mapping = dict(zip(names, fresh))
    body = " | ".join(_rename_vars(l, mapping) for l in lits)
    return f"cnf({name}, {role}, {body})."


def _vars_of(lit):
    import re

    return re.findall(r"(?<![A-Za-z0-9_])[A-Z][A-Za-z0-9_]*", lit)


def _symbols_of(lits):
    import re

    found = set()
    for l in lits:
        found.update(re.findall(r"[a-z][A-Za-z0-9_]*", l))
    return found


def gen_symbol_problem(rng, pid: str) -> dict:
    while True:
        n = int(rng.integers(4, 8))
        picks = rng.choice(len(_SCHEMAS), size=n, replace=False)
        clauses = [_SCHEMAS[i] for i in sorted(picks)]
        facts = _ground_facts(rng)
        for i in rng.choice(len(facts), size=int(rng.integers(0, 3)), replace=False):
            clauses.append(facts[i])
        syms = _symbols_of(l for c in clauses for l in c)
        if len(syms) >= 3:
            break
    order = rng.permutation(len(clauses))
    text = "\n".join(_clause_text(f"c{k + 1}", "axiom", clauses[i], rng) for k, i in enumerate(order))
    return {"id": pid, "task": "symbols", "cnf": text + "\n"}


# Motifs for the premise task. Slots: P/Q predicates, F/G functions, K constants.
_MOTIFS = (
    (["P(F(X))", "~Q(X)"], {"P": 1, "Q": 1, "F": 1}),
    (["P(X,F(Y))"], {"P": 2, "F": 1}),
    (["~P(X)", "P(F(X))"], {"P": 1, "F": 1}),
    (["P(F(X,K))"], {"P": 1, "F": 2, "K": 0}),
    (["~P(X,Y)", "Q(Y,X)"], {"P": 2, "Q": 2}),
    (["P(F(F(X)))"], {"P": 1, "F": 1}),
    (["P(X)", "Q(F(X),X)"], {"P": 1, "Q": 2, "F": 1}),
    (["~P(K,X)", "Q(G(X))"], {"P": 2, "Q": 1, "G": 1, "K": 0}),
)


class _Names:
    def __init__(self):
        self.k = 0

    def fresh(self, kind, arity):
        self.k += 1
        return f"{'p' if kind == 'pred' else 'f'}{arity}_{self.k}"


def _bind(motif, names: _Names):
    lits, slots = motif
    return {s: names.fresh("pred" if s in "PQ" else "fn", a) for s, a in slots.items()}


def _instantiate(motif, binding):
    import re

    lits, _ = motif
    return [re.sub(r"\b([PQFGK])\b", lambda m: binding[m.group(1)], l) for l in lits]


def gen_premise_problem(rng, pid: str) -> dict:
    """Conjecture from two motifs; positives reuse both motifs with the conjecture's
    symbols, negatives use the same motif shapes over a decoy symbol set."""
    names = _Names()
    m = rng.choice(len(_MOTIFS), size=2, replace=False)
    motifs = [_MOTIFS[i] for i in m]
    conj_bind = [_bind(mo, names) for mo in motifs]
    decoy_bind = [_bind(mo, names) for mo in motifs]
    conj = "\n".join(
        _clause_text(f"conj{k + 1}", "negated_conjecture", _instantiate(mo, b), rng)
        for k, (mo, b) in enumerate(zip(motifs, conj_bind)))
    k = int(rng.integers(2, 4))
    cands = []
    for label in [1] * k + [0] * k:
        binds = conj_bind if label else decoy_bind
        clauses = [_instantiate(mo, b) for mo, b in zip(motifs, binds)]
        filler = _MOTIFS[int(rng.integers(len(_MOTIFS)))]
        clauses.append(_instantiate(filler, _bind(filler, names)))
        order = rng.permutation(len(clauses))
        text = "\n".join(_clause_text(f"ax{j + 1}", "axiom", clauses[i], rng)
                         for j, i in enumerate(order))
        cands.append({"label": label, "cnf": text + "\n"})
    perm = rng.permutation(len(cands))
    return {"id": pid, "task": "premises", "conjecture": conj + "\n",
            "candidates": [cands[i] for i in perm]}


def gen_synthetic(task: str, size: int, seed: int = 0) -> list:
    if size < 1:
        raise ValueError("size must be at least 1")
    rng = np.random.default_rng(seed)
    if task == "symbols":
        return [gen_symbol_problem(rng, f"sym{k:05d}") for k in range(size)]
    if task == "premises":
        return [gen_premise_problem(rng, f"prem{k:05d}") for k in range(size)]
    raise ValueError(f"unknown task {task!r}")


def dumps_jsonl(records) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
