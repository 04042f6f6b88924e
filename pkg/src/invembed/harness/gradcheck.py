"""End-to-end gradient checks: network, one head and its loss on random graphs."""
from __future__ import annotations

import numpy as np

from ..gnn import Dims, forward, init_params
from ..graph import build_graph, build_index, default_config
from ..tasks.heads import init_head, policy_logits, premise_probs, symbol_head, value_head
from ..tensor import bce, cross_entropy, gradcheck, kink_margins, mse, reshape
from .randgen import random_clause_set

HEADS = ("premise", "symbol", "value", "policy")
SMALL_DIMS = Dims(2, [4, 3, 3], [1, 4, 4], [4, 3, 3])
VOCAB = 5
# hidden width of the heads under test; the full widths only cost time
HIDDEN = 6
KINK = 1e-4


def head_loss(head: str, g, cfg, dims: Dims, rng: np.random.Generator):
    """A loss ``fn(tape, P)`` for ``head`` on graph ``g`` with random targets."""
    idx = build_index(g)
    if head == "premise":
        conj = [0]
        prem = list(range(1, g.n_c)) or [0]
        y = np.array([[float(rng.integers(2))]])

        def fn(tape, P):
            st = forward(tape, g, P, cfg, dims.L, idx=idx)
            return bce(premise_probs(st.c, [conj], [prem], P), y)
    elif head == "symbol":
        target = np.eye(VOCAB)[rng.integers(VOCAB, size=g.n_s)]

        def fn(tape, P):
            st = forward(tape, g, P, cfg, dims.L, idx=idx)
            return cross_entropy(symbol_head(st.s, P), target)
    elif head == "value":
        y = np.array([[rng.random()]])

        def fn(tape, P):
            st = forward(tape, g, P, cfg, dims.L, idx=idx)
            return mse(value_head(st.c, P), y)
    elif head == "policy":
        lits = g.ct_edges
        actions = [(int(c), int(t)) for c, t in lits]
        target = rng.dirichlet(np.ones(len(actions)))[None, :]
        goal = int(rng.integers(g.n_c))

        def fn(tape, P):
            st = forward(tape, g, P, cfg, dims.L, idx=idx)
            z = policy_logits(st.c, st.t, actions, goal, P)
            return cross_entropy(reshape(z, (1, len(actions))), target)
    else:
        raise ValueError(f"unknown head {head!r}")
    return fn


def check_head(head: str, seed: int, dims: Dims = SMALL_DIMS, eps: float = 1e-6,
               max_tries: int = 50) -> dict:
    """Gradcheck one random <=5-clause graph; parameters are redrawn near kinks."""
    cfg = default_config()
    rng = np.random.default_rng(seed)
    cs = random_clause_set(rng, max_clauses=5, clause_type="mixed")
    g = build_graph(cs, cfg)
    fn = head_loss(head, g, cfg, dims, rng)
    for attempt in range(max_tries):
        draw = int(rng.integers(2**31))
        params = init_params(dims, cfg, draw, bias_scale=0.5)
        params.update(init_head(head, dims, VOCAB, seed=draw + 1, hidden=HIDDEN))
        for k in params:
            if k.startswith(head + ".b"):
                params[k] = rng.normal(0.0, 0.5, size=params[k].shape)
        relu_gap, tie_gap = kink_margins(fn, params)
        if relu_gap >= KINK and tie_gap >= KINK:
            break
    else:
        raise RuntimeError(f"no kink-free parameters for {head} after {max_tries} draws")
    err = gradcheck(fn, params, eps=eps)
    return {"head": head, "seed": seed, "error": float(err), "redraws": attempt,
            "clauses": g.n_c, "params": int(sum(v.size for v in params.values()))}


def gradcheck_suite(seed: int, graphs: int, heads=HEADS, dims: Dims = SMALL_DIMS) -> list:
    return [check_head(h, seed * 1000 + k, dims) for k in range(graphs) for h in heads]
