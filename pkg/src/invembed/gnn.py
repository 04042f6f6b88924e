"""Name-invariant message-passing network over clause hypergraphs.

Parameter names follow ``L{i}.{symbol}`` for layer ``i``: biases ``B_c``,
``B_ts``, ``B_st``, ``B_t`` and matrices ``M_c``, ``M_ct``, ``M_s``, ``M_t``,
``M_tc``, ``M_ts``, ``M_ts.{1,2,3}``, ``M_st.{1,2,3}``, ``M_st.{k}.{d}``.
Initial type vectors are ``init.c``, ``init.t`` and ``init.s`` (one row per
type; sign-symmetric symbol types have no row and start at zero).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import T0, T0_TYPE, FIndex, Hypergraph, NodeTypeConfig, build_index
from .tensor import (
    Tape,
    Var,
    add,
    concat,
    gather,
    linear,
    red,
    red_prime,
    relu,
    scale_rows,
    tanh_,
)


@dataclass
class Dims:
    L: int = 5
    d_c: list = field(default_factory=lambda: [4] + [32] * 5)
    d_s: list = field(default_factory=lambda: [1] + [64] * 5)
    d_t: list = field(default_factory=lambda: [4] + [32] * 5)

    def __post_init__(self):
        for name in ("d_c", "d_s", "d_t"):
            v = list(getattr(self, name))
            if len(v) != self.L + 1:
                raise ValueError(f"{name} needs {self.L + 1} entries, got {len(v)}")
            if any(int(x) <= 0 for x in v):
                raise ValueError(f"{name} entries must be positive")
            setattr(self, name, [int(x) for x in v])
        if self.L < 0:
            raise ValueError("negative layer count")

    @classmethod
    def uniform(cls, L, c=32, s=64, t=32, c0=4, s0=1, t0=4):
        return cls(L, [c0] + [c] * L, [s0] + [s] * L, [t0] + [t] * L)

    def to_json(self):
        return {"L": self.L, "d_c": self.d_c, "d_s": self.d_s, "d_t": self.d_t}


def layer_shapes(dims: Dims, i: int) -> dict:
    c0, c1 = dims.d_c[i], dims.d_c[i + 1]
    s0, s1 = dims.d_s[i], dims.d_s[i + 1]
    t0, t1 = dims.d_t[i], dims.d_t[i + 1]
    out = {
        "B_c": (c1,), "B_ts": (s1,), "B_st": (t1,), "B_t": (t1,),
        "M_c": (c1, c0), "M_ct": (c1, 2 * t0), "M_s": (s1, s0),
        "M_t": (t1, t0), "M_tc": (t1, 2 * c0), "M_ts": (s1, 2 * s1),
    }
    for j in (1, 2, 3):
        out[f"M_ts.{j}"] = (s1, t0)
    for j in (1, 2, 3):
        out[f"M_st.{j}"] = (t1, 2 * t1)
    for k in (1, 2, 3):
        for d in (1, 2, 3):
            # the third input is a symbol vector, so its width is d_s
            out[f"M_st.{k}.{d}"] = (t1, s0 if k == 3 else t0)
    return {f"L{i}.{k}": v for k, v in out.items()}


def learnable_symbol_types(cfg: NodeTypeConfig) -> list:
    return [t for t in cfg.symbol_types if t not in cfg.polar_symbol_types]


def describe(dims: Dims, cfg: NodeTypeConfig) -> dict:
    """Every network parameter name with its shape."""
    shapes = {
        "init.c": (len(cfg.clause_types), dims.d_c[0]),
        "init.s": (len(learnable_symbol_types(cfg)), dims.d_s[0]),
        "init.t": (len(cfg.term_types), dims.d_t[0]),
    }
    for i in range(dims.L):
        shapes.update(layer_shapes(dims, i))
    return shapes


def init_params(dims: Dims, cfg: NodeTypeConfig, seed: int = 0, *, bias_scale: float = 0.0,
                dtype=np.float64) -> dict:
    """Glorot-uniform matrices, zero (or N(0, bias_scale)) biases, N(0, 0.1) type vectors."""
    rng = np.random.default_rng(seed)
    out = {}
    for name, shape in describe(dims, cfg).items():
        leaf = name.split(".", 1)[1]
        if name.startswith("init."):
            v = rng.normal(0.0, 0.1, size=shape)
        elif leaf.startswith("B_"):
            v = rng.normal(0.0, bias_scale, size=shape) if bias_scale else np.zeros(shape)
        else:
            a = np.sqrt(6.0 / (shape[0] + shape[1]))
            v = rng.uniform(-a, a, size=shape)
        out[name] = v.astype(dtype)
    return out


def check_params(params: dict, dims: Dims, cfg: NodeTypeConfig) -> None:
    for name, shape in describe(dims, cfg).items():
        if name not in params:
            raise KeyError(f"missing parameter {name}")
        if tuple(params[name].shape) != tuple(shape):
            raise ValueError(f"{name}: shape {params[name].shape}, expected {shape}")


def _type_ids(tags, known, what):
    pos = {t: k for k, t in enumerate(known)}
    try:
        return np.array([pos[t] for t in tags], dtype=np.int64)
    except KeyError as e:
        raise ValueError(f"unknown {what} type {e.args[0]!r}") from None


@dataclass
class LayerState:
    c: Var
    s: Var
    t: Var


def init_embeddings(tape: Tape, g: Hypergraph, P: dict, cfg: NodeTypeConfig) -> LayerState:
    """Layer-0 rows: the vector of each node's type; predicate-like symbols and T0 are zero."""
    P = {k: (v if isinstance(v, Var) else tape.const(v)) for k, v in P.items()}
    c = gather(P["init.c"], _type_ids(g.clause_types, cfg.clause_types, "clause"))

    init_s = P["init.s"]
    zero_s = tape.const(np.zeros((1, init_s.shape[1]), dtype=init_s.value.dtype))
    learn = learnable_symbol_types(cfg)
    s_ids = []
    for tag in g.symbol_types:
        if tag in cfg.polar_symbol_types:
            s_ids.append(0)
        elif tag in learn:
            s_ids.append(1 + learn.index(tag))
        else:
            raise ValueError(f"unknown symbol type {tag!r}")
    s = gather(concat([zero_s, init_s], axis=0), np.array(s_ids, dtype=np.int64))

    init_t = P["init.t"]
    zero_t = tape.const(np.zeros((1, init_t.shape[1]), dtype=init_t.value.dtype))
    if g.term_types[T0] != T0_TYPE:
        raise ValueError("term 0 must be the T0 sentinel")
    t_ids = np.concatenate([[0], 1 + _type_ids(g.term_types[1:], cfg.term_types, "term")])
    t = gather(concat([zero_t, init_t], axis=0), t_ids)
    return LayerState(c, s, t)


def _row_mask(n_t, dtype):
    m = np.ones(n_t, dtype=dtype)
    m[T0] = 0.0
    return m


def message_pass(state: LayerState, i: int, P: dict, idx: FIndex) -> LayerState:
    """One layer of the clause/symbol/term update equations."""
    c, s, t = state.c, state.s, state.t
    tape = c.tape

    def p(name):
        v = P[f"L{i}.{name}"]
        return v if isinstance(v, Var) else tape.const(v)

    # clauses
    from_lits = red(gather(t, idx.ct.a), idx.ct.seg)
    c_new = relu(add(linear(c, p("M_c"), p("B_c")), linear(from_lits, p("M_ct"))))

    # symbols: g multiplies the whole edge message, bias included
    st = idx.st
    x = add(linear(gather(t, st.a), p("M_ts.1"), p("B_ts")),
            linear(gather(t, st.b), p("M_ts.2")),
            linear(gather(t, st.c), p("M_ts.3")))
    sym_msg = red_prime(scale_rows(x, st.g), st.seg)
    s_new = tanh_(add(linear(s, p("M_s")), linear(sym_msg, p("M_ts"))))

    # terms
    parts = [linear(t, p("M_t"), p("B_t")),
             linear(red(gather(c, idx.tc.a), idx.tc.seg), p("M_tc"))]
    for d in (1, 2, 3):
        f = idx.ts[d - 1]
        y = add(linear(gather(t, f.a), p(f"M_st.1.{d}"), p("B_st")),
                linear(gather(t, f.b), p(f"M_st.2.{d}")),
                linear(scale_rows(gather(s, f.c), f.g), p(f"M_st.3.{d}")))
        parts.append(linear(red(relu(y), f.seg), p(f"M_st.{d}")))
    t_new = scale_rows(relu(add(*parts)), _row_mask(t.shape[0], t.value.dtype))
    return LayerState(c_new, s_new, t_new)


def forward(tape: Tape, g: Hypergraph, P: dict, cfg: NodeTypeConfig, L: int,
            idx: FIndex | None = None, keep_layers: bool = False):
    """Final ``LayerState`` (or all L+1 states with ``keep_layers``)."""
    idx = idx or build_index(g)
    state = init_embeddings(tape, g, P, cfg)
    states = [state]
    for i in range(L):
        state = message_pass(state, i, P, idx)
        states.append(state)
    return states if keep_layers else state


def embed(g: Hypergraph, params: dict, cfg: NodeTypeConfig, dims: Dims, keep_layers=False):
    """Numpy embeddings ``(c, s, t)`` of the last layer (or a list per layer)."""
    tape = Tape()
    out = forward(tape, g, params, cfg, dims.L, keep_layers=keep_layers)
    if keep_layers:
        return [(st.c.value, st.s.value, st.t.value) for st in out]
    return out.c.value, out.s.value, out.t.value
