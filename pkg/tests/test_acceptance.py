"""Acceptance criteria 1-9.

Each test prints one ``ACCEPTANCE <n> <name>: PASS|FAIL (...)`` line to the
terminal, then asserts. The training criteria take a few minutes each.
"""
import json
import time

import numpy as np
import pytest

from invembed.fol import SKOLEM, DEFINITION, ClausifyConfig, clausify, parse_cnf, parse_fof
from invembed.fol import formula as F
from invembed.gnn import Dims, describe, init_embeddings, message_pass
from invembed.graph import T0, build_graph, build_index, default_config, premise_config
from invembed.harness.cli import main as cli_main
from invembed.harness.gradcheck import HEADS, gradcheck_suite
from invembed.harness.invariance import invariance_suite, negative_control
from invembed.harness.randgen import random_clause_set
from invembed.harness.synthetic import gen_synthetic
from invembed.tasks.data import build_vocab, ensure_graphs, problems_from_records, split_by_hash
from invembed.tasks.metrics import symbol_metrics
from invembed.tasks.train import (
    PremiseTask,
    SymbolTask,
    TrainConfig,
    evaluate,
    init_model,
    symbol_report,
    train,
)
from invembed.tensor import Tape

from oracles import dpll, layer_oracle, symbol_fixture, truth_table_sat

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(n, name, ok, detail=""):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {name}: {'PASS' if ok else 'FAIL'} ({detail})", flush=True)
        assert ok, detail
    return emit


# 1 ---------------------------------------------------------------------------------------

def test_1_invariance_suite(report):
    t0 = time.process_time()
    reps = invariance_suite(seed=2024, graphs=100, param_seeds=5)
    cpu = time.process_time() - t0
    worst = max(r.max_deviation for r in reps)
    failed = sum(not r.passed for r in reps)
    ok = failed == 0 and len(reps) == 100 * 5 * 4 and cpu <= 120
    report(1, "invariance", ok,
           f"{len(reps)} checks, {failed} failed, max deviation {worst:.2e}, {cpu:.0f}s CPU")


# 2 ---------------------------------------------------------------------------------------

def test_2_negative_control(report):
    reps = negative_control(seed=2024, draws=100)
    flagged = sum(not r.numeric for r in reps)
    report(2, "negative control", flagged >= 95, f"argument swap flagged in {flagged}/100 draws")


# 3 ---------------------------------------------------------------------------------------

def test_3_gradcheck(report):
    t0 = time.process_time()
    res = gradcheck_suite(seed=3, graphs=10, heads=HEADS)
    cpu = time.process_time() - t0
    worst = max(r["error"] for r in res)
    per_head = {h: max(r["error"] for r in res if r["head"] == h) for h in HEADS}
    ok = len(res) == 40 and worst <= 1e-5 and cpu <= 300
    detail = ", ".join(f"{h} {e:.1e}" for h, e in per_head.items())
    report(3, "gradcheck", ok, f"max rel. error {worst:.2e} [{detail}], {cpu:.0f}s CPU")


# 4 ---------------------------------------------------------------------------------------

def _hand_params(dims, cfg):
    # identity-padded matrices, zero biases, fixed type vectors
    P = {}
    for name, shape in describe(dims, cfg).items():
        if name.startswith("init."):
            P[name] = np.arange(1, 1 + int(np.prod(shape)), dtype=float).reshape(shape) / 10
        elif len(shape) == 1:
            P[name] = np.zeros(shape)
        else:
            P[name] = np.eye(*shape)
    return P


def _edge_laws(cs):
    g = build_graph(cs)
    expected = 0
    seen = set()
    for c in cs.clauses:
        for lit in c.literals:
            seen.add(lit.atom if lit.positive else lit)
            seen.update(list(lit.atom.subterms())[1:])
    for node in seen:
        app = getattr(node, "atom", node)
        if not app.is_var:
            expected += max(1, app.symbol.arity - 1)
    if len(g.st_edges) != expected or len(g.ct_edges) != sum(len(c.literals) for c in cs.clauses):
        return False
    for _, p, _, _, sign in g.st_edges.tolist():
        if p == T0 or sign != (1 if g.term_labels[p].startswith("~") else -1):
            return False
    return True


def test_4_oracle_equivalence(report):
    cfg = default_config()
    g = build_graph(parse_cnf("cnf(c1,axiom,p(c))."), cfg)
    dims = Dims(1, [4, 4], [1, 4], [4, 4])
    P = _hand_params(dims, cfg)
    st0 = init_embeddings(Tape(), g, P, cfg)
    st1 = message_pass(st0, 0, P, build_index(g))
    want = layer_oracle(st0.c.value.tolist(), st0.s.value.tolist(), st0.t.value.tolist(),
                        g.ct_edges.tolist(), g.st_edges.tolist(),
                        {k: v.tolist() for k, v in P.items() if k.startswith("L0.")})
    dev = max(float(np.max(np.abs(np.asarray(w) - v.value)))
              for w, v in zip(want, (st1.c, st1.s, st1.t)))
    rng = np.random.default_rng(4)
    laws = sum(_edge_laws(random_clause_set(rng)) for _ in range(1000))
    report(4, "oracle equivalence", dev <= 1e-12 and laws == 1000,
           f"p(c) layer-1 deviation {dev:.1e}, edge/sign laws hold on {laws}/1000 sets")


# 5 ---------------------------------------------------------------------------------------

def _split(probs, fraction):
    tr, te = split_by_hash([p.id for p in probs], fraction)
    return [probs[i] for i in tr], [probs[i] for i in te]


def test_5_toy_symbol_guessing(report):
    t0 = time.process_time()
    probs = problems_from_records(gen_synthetic("symbols", 200, 0))
    types = default_config()
    ensure_graphs(probs, types)
    train_set, test_set = _split(probs, 0.2)
    task = SymbolTask(build_vocab(train_set))
    dims = Dims()
    params = init_model(task, dims, types, seed=0)
    cfg = TrainConfig(epochs=50, batch_size=10, lr=1e-3, seed=0)
    train(task, train_set, test_set, params, types, dims, cfg)
    tr = symbol_report(task, evaluate(task, train_set, params, types, dims)[1])
    te = symbol_report(task, evaluate(task, test_set, params, types, dims)[1])
    cpu = time.process_time() - t0
    ok = tr["top1"] >= 0.95 and te["top1"] >= 0.80 and cpu <= 600
    report(5, "toy symbol guessing", ok,
           f"train top-1 {tr['top1']:.3f}, held-out top-1 {te['top1']:.3f} "
           f"({len(train_set)}/{len(test_set)} problems, 50 epochs, {cpu:.0f}s CPU)")


# 6 ---------------------------------------------------------------------------------------

def test_6_toy_premise_selection(report):
    t0 = time.process_time()
    probs = problems_from_records(gen_synthetic("premises", 300, 0))
    types = premise_config()
    train_set, test_set = _split(probs, 0.2)
    task = PremiseTask()
    dims = Dims()
    params = init_model(task, dims, types, seed=0)
    cfg = TrainConfig(epochs=100, batch_size=50, lr=1e-3, seed=0)
    recs = train(task, train_set, test_set, params, types, dims, cfg)
    final = [r for r in recs if r["split"] == "test"][-1]
    cpu = time.process_time() - t0
    ok = final["accuracy"] >= 0.85 and cpu <= 600
    report(6, "toy premise selection", ok,
           f"held-out accuracy {final['accuracy']:.3f} on {final['n']} candidates "
           f"after 100 epochs, {cpu:.0f}s CPU")


# 7 ---------------------------------------------------------------------------------------

def _random_prop(rng, depth, atoms):
    if depth == 0 or rng.random() < 0.25:
        a = F.Atom(F.Fn(atoms[int(rng.integers(len(atoms)))]))
        return F.Not(a) if rng.random() < 0.3 else a
    k = int(rng.integers(5))
    l, r = _random_prop(rng, depth - 1, atoms), _random_prop(rng, depth - 1, atoms)
    return [F.And((l, r)), F.Or((l, r)), F.Implies(l, r), F.Iff(l, r), F.Not(l)][k]


def test_7_clausifier_soundness(report):
    rng = np.random.default_rng(7)
    atoms = ["a", "b", "c", "d", "e", "g"]
    agree = 0
    for _ in range(1000):
        f = _random_prop(rng, int(rng.integers(1, 6)), atoms[:int(rng.integers(1, 7))])
        cs = clausify([("f", "axiom", f)], ClausifyConfig(int(rng.integers(1, 6))))
        clauses = [[(l.atom.symbol.name, l.positive) for l in c.literals] for c in cs.clauses]
        agree += dpll(clauses) == truth_table_sat(f, atoms, F.evaluate)
    fixtures = [
        ("fof(a,axiom, ![X]: ?[Y]: r(X,Y)).", 4, {SKOLEM: 1}),
        ("fof(a,axiom, (a & b) | (c & d)).", 2, {DEFINITION: 2}),
        ("fof(a,axiom, ![X]: ((p(X) & q(X)) | (r(X) & ?[Y]: s(X,Y)) | (t(X) & u(X)))).", 4,
         {SKOLEM: 1}),
    ]
    tags_ok = True
    for text, k, want in fixtures:
        cs = clausify(parse_fof(text), ClausifyConfig(k))
        got = {}
        for s, o in cs.origins.items():
            got[o] = got.get(o, 0) + 1
            tags_ok &= s.name.startswith("skolem" if o == SKOLEM else "def")
        for o, n in want.items():
            tags_ok &= got.get(o, 0) >= n
    report(7, "clausifier soundness", agree == 1000 and tags_ok,
           f"{agree}/1000 formulas equisatisfiable, def/skolem tags "
           f"{'correct' if tags_ok else 'wrong'} on {len(fixtures)} fixtures")


# 8 ---------------------------------------------------------------------------------------

def test_8_determinism(report, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"epochs": 3, "batch_size": 10, "vocab_cutoff": 2}))
    streams = {}
    for run in ("a", "b"):
        for task in ("symbols", "premises"):
            ck = tmp_path / f"{task}-{run}.json"
            out = tmp_path / f"{task}-{run}.train.jsonl"
            codes = [cli_main(["train", task, "--synthetic", "40", "--seed", "5",
                               "--config", str(cfg), "--checkpoint", str(ck), "--out", str(out)])]
            ev = tmp_path / f"{task}-{run}.eval.jsonl"
            codes.append(cli_main(["eval", task, "--synthetic", "40", "--checkpoint", str(ck),
                                   "--split", "all", "--out", str(ev)]))
            assert codes == [0, 0]
            streams[(task, run)] = (out.read_bytes(), ev.read_bytes(), ck.read_bytes())
    same = all(streams[(t, "a")] == streams[(t, "b")] for t in ("symbols", "premises"))
    report(8, "determinism", same,
           "train and eval metric streams plus checkpoints byte-identical across two runs")


# 9 ---------------------------------------------------------------------------------------

def test_9_metric_arithmetic(report):
    m = symbol_metrics(symbol_fixture())
    top1 = round(100 * m["top1"], 1)
    perfect = round(100 * m["perfect_naming"], 1)
    ok = (m["correct"], m["scored"], m["perfect"], m["problems"]) == (22409, 32196, 544, 3252) \
        and top1 == 69.6 and perfect == 16.7
    report(9, "metric arithmetic", ok,
           f"{m['correct']}/{m['scored']} -> {top1}% top-1, "
           f"{m['perfect']}/{m['problems']} -> {perfect}% perfect naming")
