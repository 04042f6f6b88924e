"""Minibatch training and evaluation for the premise and symbol tasks."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from ..gnn import Dims, forward
from ..graph import NodeTypeConfig
from ..tensor import NonFiniteError, Tape, bce, cross_entropy, gather, softmax
from .data import (
    IGNORE_FRESH,
    ensure_graphs,
    make_batch,
    premise_batch_lists,
    symbol_batch_targets,
)
from .heads import head_shapes, init_head, premise_probs, symbol_head
from .metrics import symbol_metrics
from .optim import make_optimizer

log = logging.getLogger(__name__)

DTYPES = {"f64": np.float64, "f32": np.float32}


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 50
    lr: float = 1e-3
    optimizer: str = "adam"
    seed: int = 0
    precision: str = "f64"

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0 or self.lr <= 0:
            raise ValueError("epochs, batch_size and lr must be positive")
        if self.precision not in DTYPES:
            raise ValueError(f"precision must be one of {sorted(DTYPES)}")

    def to_json(self):
        return asdict(self)


class NonFiniteLoss(FloatingPointError):
    pass


class PremiseTask:
    name = "premises"
    head = "premise"

    def head_params(self, dims: Dims, seed: int, dtype=np.float64) -> dict:
        return init_head("premise", dims, seed=seed, dtype=dtype)

    def run(self, tape, batch, P, types, L):
        state = forward(tape, batch.graph, P, types, L, idx=batch.index)
        conj, prem, y = premise_batch_lists(batch)
        probs = premise_probs(state.c, conj, prem, P)
        loss = bce(probs, y.astype(probs.value.dtype))
        pred = probs.value.reshape(-1) > 0.5
        correct = int(np.sum(pred == (y.reshape(-1) > 0.5)))
        return loss, len(y), correct, probs.value.reshape(-1)


class SymbolTask:
    name = "symbols"
    head = "symbol"

    def __init__(self, vocab: list, mode: str = IGNORE_FRESH):
        self.vocab = list(vocab)
        self.mode = mode

    def head_params(self, dims: Dims, seed: int, dtype=np.float64) -> dict:
        return init_head("symbol", dims, len(self.vocab), seed=seed, dtype=dtype)

    def run(self, tape, batch, P, types, L):
        state = forward(tape, batch.graph, P, types, L, idx=batch.index)
        rows, ids, info = symbol_batch_targets(batch, self.vocab, self.mode)
        logits = symbol_head(gather(state.s, rows), P)
        target = np.zeros(logits.shape, dtype=logits.value.dtype)
        target[np.arange(len(ids)), ids] = 1.0
        loss = cross_entropy(logits, target)
        correct = int(np.sum(np.argmax(logits.value, axis=1) == ids)) if len(ids) else 0
        return loss, len(ids), correct, (logits.value, info)

    def ranked(self, logits_row) -> list:
        order = np.argsort(-logits_row, kind="stable")
        return [self.vocab[k] for k in order]


def _run_batch(task, problems, params, types, dims, train: bool):
    batch = make_batch(problems)
    tape = Tape()
    if train:
        P = {k: tape.param(k, v) for k, v in params.items()}
    else:
        P = params
    try:
        out = task.run(tape, batch, P, types, dims.L)
    except NonFiniteError as e:
        ids = ", ".join(p.id for p in problems)
        raise NonFiniteLoss(f"{e} in batch [{ids}]") from e
    grads = tape.backward(out[0]) if train else None
    tape.release()
    return out, grads


def evaluate(task, problems, params, types: NodeTypeConfig, dims: Dims, batch_size: int = 50):
    """Mean loss, accuracy, item count and raw outputs per batch."""
    ensure_graphs(problems, types)
    tot_loss = tot_n = tot_correct = 0
    outputs = []
    for start in range(0, len(problems), batch_size):
        chunk = problems[start:start + batch_size]
        (loss, n, correct, raw), _ = _run_batch(task, chunk, params, types, dims, train=False)
        tot_loss += float(loss.value) * n
        tot_n += n
        tot_correct += correct
        outputs.append((chunk, raw))
    return {
        "loss": tot_loss / tot_n if tot_n else 0.0,
        "accuracy": tot_correct / tot_n if tot_n else 0.0,
        "n": tot_n,
    }, outputs


def symbol_report(task: SymbolTask, outputs) -> dict:
    """Ranked predictions grouped per problem, fed to :func:`symbol_metrics`."""
    problems = []
    for chunk, (logits, info) in outputs:
        per = [[] for _ in chunk]
        for row, (k, in_conj, label) in zip(logits, info):
            target = label if label in task.vocab else task.vocab[-1]
            per[k].append((task.ranked(row), target, in_conj))
        problems.extend(per)
    return symbol_metrics(problems)


def train(task, train_set, test_set, params: dict, types: NodeTypeConfig, dims: Dims,
          cfg: TrainConfig, emit=None):
    """Train ``params`` in place; returns the list of per-epoch metric records."""
    if not train_set:
        raise ValueError("empty training set")
    dtype = DTYPES[cfg.precision]
    for k in params:
        params[k] = np.asarray(params[k], dtype=dtype)
    ensure_graphs(train_set, types)
    ensure_graphs(test_set, types)
    opt = make_optimizer(cfg.optimizer, cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    records = []

    def out(rec):
        records.append(rec)
        if emit is not None:
            emit(rec)

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(train_set))
        tot_loss = tot_n = tot_correct = 0
        for start in range(0, len(order), cfg.batch_size):
            chunk = [train_set[i] for i in order[start:start + cfg.batch_size]]
            (loss, n, correct, _), grads = _run_batch(task, chunk, params, types, dims, train=True)
            opt.step(params, grads)
            tot_loss += float(loss.value) * n
            tot_n += n
            tot_correct += correct
        out({"epoch": epoch, "split": "train", "loss": tot_loss / max(tot_n, 1),
             "accuracy": tot_correct / max(tot_n, 1), "n": tot_n})
        if test_set:
            m, _ = evaluate(task, test_set, params, types, dims, cfg.batch_size)
            out({"epoch": epoch, "split": "test", **m})
        log.debug("epoch %d: %s", epoch, records[-1])
    return records


def init_model(task, dims: Dims, types: NodeTypeConfig, seed: int, dtype=np.float64) -> dict:
    from ..gnn import init_params

    params = init_params(dims, types, seed, dtype=dtype)
    params.update(task.head_params(dims, seed + 1, dtype=dtype))
    return params


__all__ = ["TrainConfig", "PremiseTask", "SymbolTask", "train", "evaluate", "symbol_report",
           "init_model", "head_shapes", "softmax"]
