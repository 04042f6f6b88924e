"""Task heads on top of the final-layer embeddings."""
from __future__ import annotations

import numpy as np

from ..gnn import Dims
from ..tensor import Segments, Tape, Var, concat, gather, linear, red, relu, sigmoid

PREMISE_HIDDEN = 128
VALUE_HIDDEN = 64
POLICY_HIDDEN = 64


def head_shapes(kind: str, dims: Dims, vocab_size: int = 0, hidden: int | None = None) -> dict:
    """Parameter shapes of one head; ``hidden`` overrides the hidden width."""
    c, s, t = dims.d_c[-1], dims.d_s[-1], dims.d_t[-1]
    if kind == "premise":
        h = hidden or PREMISE_HIDDEN
        shapes = {"W1": (h, 4 * c), "b1": (h,), "W2": (1, h), "b2": (1,)}
    elif kind == "symbol":
        shapes = {"W": (vocab_size, s), "b": (vocab_size,)}
    elif kind == "value":
        h = hidden or VALUE_HIDDEN
        shapes = {"W1": (h, c), "b1": (h,), "W2": (h, 2 * h), "b2": (h,), "W3": (1, h), "b3": (1,)}
    elif kind == "policy":
        h = hidden or POLICY_HIDDEN
        shapes = {"W1": (h, 2 * c + t), "b1": (h,), "W2": (1, h), "b2": (1,)}
    else:
        raise ValueError(f"unknown head {kind!r}")
    return {f"{kind}.{k}": v for k, v in shapes.items()}


def init_head(kind: str, dims: Dims, vocab_size: int = 0, seed: int = 0, dtype=np.float64,
              hidden: int | None = None) -> dict:
    rng = np.random.default_rng(seed)
    out = {}
    for name, shape in head_shapes(kind, dims, vocab_size, hidden).items():
        if len(shape) == 1:
            out[name] = np.zeros(shape, dtype=dtype)
        else:
            a = np.sqrt(6.0 / (shape[0] + shape[1]))
            out[name] = rng.uniform(-a, a, size=shape).astype(dtype)
    return out


def _p(tape, P, name):
    v = P[name]
    return v if isinstance(v, Var) else tape.const(v)


def _group(lists):
    seg, flat = Segments.from_lists(lists)
    if np.any(seg.counts == 0):
        raise ValueError("empty node set")
    return seg, flat


def premise_probs(c: Var, conj_lists, prem_lists, P) -> Var:
    """Probability per candidate that its premise is relevant, shape ``(k, 1)``."""
    tape = c.tape
    cseg, cflat = _group(conj_lists)
    pseg, pflat = _group(prem_lists)
    both = concat([red(gather(c, cflat), cseg), red(gather(c, pflat), pseg)])
    h = relu(linear(both, _p(tape, P, "premise.W1"), _p(tape, P, "premise.b1")))
    return sigmoid(linear(h, _p(tape, P, "premise.W2"), _p(tape, P, "premise.b2")))


def premise_head(c: Var, conj_nodes, prem_nodes, P) -> Var:
    return premise_probs(c, [list(conj_nodes)], [list(prem_nodes)], P)


def symbol_head(s: Var, P) -> Var:
    """Logits over the vocabulary for every row of ``s``."""
    tape = s.tape
    return linear(s, _p(tape, P, "symbol.W"), _p(tape, P, "symbol.b"))


def value_head(c: Var, P, clause_lists=None) -> Var:
    """Win probability per state; by default one state made of all clause rows."""
    tape = c.tape
    if clause_lists is None:
        clause_lists = [list(range(c.shape[0]))]
    seg, flat = _group(clause_lists)
    h = relu(linear(c, _p(tape, P, "value.W1"), _p(tape, P, "value.b1")))
    r = red(gather(h, flat), seg)
    h2 = relu(linear(r, _p(tape, P, "value.W2"), _p(tape, P, "value.b2")))
    return sigmoid(linear(h2, _p(tape, P, "value.W3"), _p(tape, P, "value.b3")))


def policy_logits(c: Var, t: Var, actions, goal_clause: int, P) -> Var:
    """One logit per ``(axiom clause, literal term)`` action, shape ``(k, 1)``."""
    tape = c.tape
    ax = np.array([a for a, _ in actions], dtype=np.int64)
    lit = np.array([l for _, l in actions], dtype=np.int64)
    goal = np.full(len(actions), goal_clause, dtype=np.int64)
    x = concat([gather(c, ax), gather(t, lit), gather(c, goal)])
    h = relu(linear(x, _p(tape, P, "policy.W1"), _p(tape, P, "policy.b1")))
    return linear(h, _p(tape, P, "policy.W2"), _p(tape, P, "policy.b2"))


def policy_logit(c_axiom: Var, t_literal: Var, c_goals: Var, P) -> Var:
    tape = c_axiom.tape
    x = concat([c_axiom, t_literal, c_goals])
    h = relu(linear(x, _p(tape, P, "policy.W1"), _p(tape, P, "policy.b1")))
    return linear(h, _p(tape, P, "policy.W2"), _p(tape, P, "policy.b2"))


def as_vars(tape: Tape, params: dict) -> dict:
    return {k: tape.const(v) for k, v in params.items()}
