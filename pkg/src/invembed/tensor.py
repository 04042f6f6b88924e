"""Small dense kernel with tape-based reverse-mode differentiation.

Values are numpy arrays (vectors or row-stacked matrices). Every primitive
records a closure on the active :class:`Tape`; :meth:`Tape.backward` walks the
tape once in reverse and accumulates gradients additively.

Conventions: ReLU has subgradient 0 at 0; segment max/min route the whole
gradient of a coordinate to the first achieving entry of the segment.
"""
from __future__ import annotations

import json
import math
from typing import Callable

import numpy as np


class NonFiniteError(FloatingPointError):
    pass


class Segments:
    """Grouping of ``len(ids)`` rows into ``n`` segments; ``ids`` must be sorted."""

    __slots__ = ("ids", "n", "counts", "nonempty", "first")

    def __init__(self, ids, n: int):
        ids = np.asarray(ids, dtype=np.int64).reshape(-1)
        if len(ids) and (np.any(np.diff(ids) < 0) or ids[0] < 0 or ids[-1] >= n):
            raise ValueError("segment ids must be sorted and within range")
        self.ids = ids
        self.n = int(n)
        self.counts = np.bincount(ids, minlength=self.n)
        self.nonempty = np.flatnonzero(self.counts)
        starts = np.concatenate([[0], np.cumsum(self.counts)[:-1]]).astype(np.int64)
        self.first = starts[self.nonempty]

    def __len__(self):
        return len(self.ids)

    @classmethod
    def from_lists(cls, lists):
        """``[[i, j], [], [k]]`` -> (Segments, flat gather indices)."""
        ids = [s for s, lst in enumerate(lists) for _ in lst]
        flat = [i for lst in lists for i in lst]
        return cls(ids, len(lists)), np.asarray(flat, dtype=np.int64)


class Var:
    __slots__ = ("value", "grad", "parents", "backward_fn", "op", "name", "tape", "needs_grad")

    def __init__(self, tape, value, op="leaf", parents=(), backward_fn=None, name=None,
                 needs_grad=False):
        self.tape = tape
        self.value = value
        self.grad = None
        self.parents = parents
        self.backward_fn = backward_fn
        self.op = op
        self.name = name
        self.needs_grad = needs_grad

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Var({self.op}, shape={self.value.shape})"

    def __add__(self, other):
        return add(self, other)

    def __neg__(self):
        return scale(self, -1.0)


class Tape:
    """Records primitive applications for one forward/backward pass."""

    def __init__(self, check_finite: bool = True, track_margins: bool = False):
        self.nodes: list[Var] = []
        self.params: dict[str, Var] = {}
        self.check_finite = check_finite
        self.track_margins = track_margins
        # smallest |ReLU input| and smallest non-zero max/min gap seen
        self.relu_margin = math.inf
        self.tie_margin = math.inf

    def release(self) -> None:
        """Drop recorded nodes so the tape/Var reference cycle does not pin memory."""
        for n in self.nodes:
            n.backward_fn = None
            n.parents = ()
        self.nodes = []
        self.params = {}

    def param(self, name: str, value) -> Var:
        if name in self.params:
            raise KeyError(f"parameter {name!r} registered twice")
        v = Var(self, np.asarray(value), name=name, needs_grad=True)
        self.params[name] = v
        return v

    def const(self, value) -> Var:
        return Var(self, np.asarray(value))

    def record(self, op, value, parents, backward_fn) -> Var:
        if self.check_finite and not np.all(np.isfinite(value)):
            raise NonFiniteError(f"non-finite output from {op}")
        needs = any(p.needs_grad for p in parents)
        v = Var(self, value, op, parents, backward_fn if needs else None, needs_grad=needs)
        if needs:
            self.nodes.append(v)
        return v

    def backward(self, loss: Var) -> dict:
        """Gradients of scalar ``loss`` for every registered parameter."""
        if loss.value.size != 1:
            raise ValueError("backward needs a scalar loss")
        for p in self.params.values():
            p.grad = None
        for n in self.nodes:
            n.grad = None
        loss.grad = np.ones_like(loss.value)
        for node in reversed(self.nodes):
            if node.grad is None:
                continue
            if self.check_finite and not np.all(np.isfinite(node.grad)):
                raise NonFiniteError(f"non-finite gradient at {node.op}")
            grads = node.backward_fn(node.grad)
            for parent, g in zip(node.parents, grads):
                if g is None or not parent.needs_grad:
                    continue
                if self.check_finite and not np.all(np.isfinite(g)):
                    raise NonFiniteError(f"non-finite gradient from {node.op}")
                parent.grad = g if parent.grad is None else parent.grad + g
        return {
            name: (p.grad if p.grad is not None else np.zeros_like(p.value))
            for name, p in self.params.items()
        }


def _tape_of(*xs):
    for x in xs:
        if isinstance(x, Var):
            return x.tape
    raise TypeError("no Var among operands")


def _var(tape, x):
    return x if isinstance(x, Var) else tape.const(x)


def _unbroadcast(g, shape):
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


# -- elementwise and linear primitives -----------------------------------------

def add(*xs) -> Var:
    tape = _tape_of(*xs)
    xs = [_var(tape, x) for x in xs]
    value = xs[0].value
    for x in xs[1:]:
        value = value + x.value
    shapes = [x.value.shape for x in xs]
    return tape.record("add", value, xs, lambda g: [_unbroadcast(g, s) for s in shapes])


def scale(x: Var, k: float) -> Var:
    return x.tape.record("scale", x.value * k, (x,), lambda g: [g * k])


def mul(x: Var, y: Var) -> Var:
    tape = _tape_of(x, y)
    x, y = _var(tape, x), _var(tape, y)
    xs, ys = x.value.shape, y.value.shape
    return tape.record("mul", x.value * y.value, (x, y),
                       lambda g: [_unbroadcast(g * y.value, xs), _unbroadcast(g * x.value, ys)])


def linear(x: Var, m: Var, b: Var | None = None) -> Var:
    """Row-wise affine map ``x @ m.T + b``; ``x`` is a vector or a row stack."""
    tape = _tape_of(x, m, b)
    x, m = _var(tape, x), _var(tape, m)
    if x.value.shape[-1] != m.value.shape[1]:
        raise ValueError(f"affine: matrix {m.value.shape} vs input {x.value.shape}")
    if b is not None:
        b = _var(tape, b)
        if b.value.shape != (m.value.shape[0],):
            raise ValueError(f"affine: bias {b.value.shape} vs matrix {m.value.shape}")
    xv, mv = x.value, m.value
    out = xv @ mv.T
    if b is not None:
        out = out + b.value

    def back(g):
        gx = g @ mv
        gm = np.outer(g, xv) if xv.ndim == 1 else g.T @ xv
        gb = g if g.ndim == 1 else g.sum(axis=0)
        return [gx, gm, gb]

    parents = (x, m) if b is None else (x, m, b)
    return tape.record("affine", out, parents, back)


def affine(m: Var, x: Var, b: Var | None = None) -> Var:
    """``m . x (+ b)``."""
    return linear(x, m, b)


def relu(x: Var) -> Var:
    v = x.value
    tape = x.tape
    if tape.track_margins and v.size:
        tape.relu_margin = min(tape.relu_margin, float(np.min(np.abs(v))))
    mask = v > 0
    return tape.record("relu", np.where(mask, v, 0.0).astype(v.dtype), (x,), lambda g: [g * mask])


def tanh_(x: Var) -> Var:
    out = np.tanh(x.value)
    return x.tape.record("tanh", out, (x,), lambda g: [g * (1.0 - out * out)])


def sigmoid(x: Var) -> Var:
    v = x.value
    out = np.where(v >= 0, 1.0 / (1.0 + np.exp(-np.abs(v))),
                   np.exp(-np.abs(v)) / (1.0 + np.exp(-np.abs(v)))).astype(v.dtype)
    return x.tape.record("sigmoid", out, (x,), lambda g: [g * out * (1.0 - out)])


def concat(xs, axis: int = -1) -> Var:
    tape = _tape_of(*xs)
    xs = [_var(tape, x) for x in xs]
    sizes = [x.value.shape[axis] for x in xs]
    cuts = np.cumsum(sizes)[:-1]
    return tape.record("concat", np.concatenate([x.value for x in xs], axis=axis), xs,
                       lambda g: np.split(g, cuts, axis=axis))


def reshape(x: Var, shape) -> Var:
    old = x.value.shape
    return x.tape.record("reshape", x.value.reshape(shape), (x,), lambda g: [g.reshape(old)])


def gather(x: Var, idx) -> Var:
    """Rows ``x[idx]``."""
    idx = np.asarray(idx, dtype=np.int64)
    shape = x.value.shape

    def back(g):
        out = np.zeros(shape, dtype=g.dtype)
        np.add.at(out, idx, g)
        return [out]

    return x.tape.record("gather", x.value[idx], (x,), back)


def scale_rows(x: Var, k) -> Var:
    """Multiply row ``i`` by the constant ``k[i]``."""
    k = np.asarray(k, dtype=x.value.dtype).reshape(-1, 1)
    return x.tape.record("scale_rows", x.value * k, (x,), lambda g: [g * k])


def sum_(x: Var) -> Var:
    shape = x.value.shape
    return x.tape.record("sum", np.asarray(x.value.sum()), (x,),
                         lambda g: [np.broadcast_to(g, shape).copy()])


def mean_(x: Var) -> Var:
    shape, n = x.value.shape, x.value.size
    return x.tape.record("mean", np.asarray(x.value.mean()), (x,),
                         lambda g: [np.broadcast_to(g / n, shape).copy()])


# -- segment reductions -------------------------------------------------------------

def _segment_extreme(v, segs: Segments, ufunc):
    d = v.shape[1]
    out = np.zeros((segs.n, d), dtype=v.dtype)
    if len(v) == 0:
        return out, None
    out[segs.nonempty] = ufunc.reduceat(v, segs.first, axis=0)
    hit = v == out[segs.ids]
    pos = np.where(hit, np.arange(len(v))[:, None], len(v))
    win = np.minimum.reduceat(pos, segs.first, axis=0)
    return out, win


def _tie_gap(v, segs: Segments, out, largest: bool):
    """Smallest non-zero gap between the extreme and the runner-up."""
    if len(v) == 0:
        return math.inf
    ext = out[segs.ids]
    fill = -np.inf if largest else np.inf
    rest = np.where(v != ext, v, fill)
    ufunc = np.maximum if largest else np.minimum
    second = ufunc.reduceat(rest, segs.first, axis=0)
    gap = np.abs(out[segs.nonempty] - second)
    gap = gap[np.isfinite(gap)]
    return float(gap.min()) if gap.size else math.inf


def segment_reduce(x: Var, segs: Segments, mode: str) -> Var:
    """Per-segment pointwise ``max``/``min``/``mean`` of the rows of ``x``.

    Rows must already be in segment order. Empty segments give zero rows.
    """
    v = x.value
    if v.ndim != 2 or v.shape[0] != len(segs):
        raise ValueError(f"segment_reduce: {v.shape} rows vs {len(segs)} segment entries")
    tape = x.tape
    d = v.shape[1]
    if mode == "mean":
        out = np.zeros((segs.n, d), dtype=v.dtype)
        cnt = np.maximum(segs.counts, 1).astype(v.dtype)
        if len(v):
            out[segs.nonempty] = np.add.reduceat(v, segs.first, axis=0) / cnt[segs.nonempty, None]
        per_row = cnt[segs.ids][:, None]
        return tape.record("segment_mean", out, (x,), lambda g: [g[segs.ids] / per_row])
    if mode not in ("max", "min"):
        raise ValueError(f"unknown reduction {mode!r}")
    ufunc = np.maximum if mode == "max" else np.minimum
    out, win = _segment_extreme(v, segs, ufunc)
    if tape.track_margins:
        tape.tie_margin = min(tape.tie_margin, _tie_gap(v, segs, out, mode == "max"))
    cols = np.arange(d)[None, :]

    def back(g):
        gx = np.zeros_like(v, dtype=g.dtype)
        if win is not None:
            gx[win, cols] = g[segs.nonempty]
        return [gx]

    return tape.record(f"segment_{mode}", out, (x,), back)


def red(x: Var, segs: Segments) -> Var:
    """concat(max, mean) per segment: width doubles."""
    return concat([segment_reduce(x, segs, "max"), segment_reduce(x, segs, "mean")])


def red_prime(x: Var, segs: Segments) -> Var:
    """concat(max + min, mean) per segment; odd in its input."""
    ext = add(segment_reduce(x, segs, "max"), segment_reduce(x, segs, "min"))
    return concat([ext, segment_reduce(x, segs, "mean")])


# -- losses ---------------------------------------------------------------------------

PROB_CLAMP = 1e-7


def bce(p: Var, y) -> Var:
    """Mean binary cross-entropy of probabilities ``p`` against 0/1 targets."""
    y = np.asarray(y, dtype=p.value.dtype)
    if y.shape != p.value.shape:
        raise ValueError(f"bce: predictions {p.value.shape} vs targets {y.shape}")
    pv = p.value
    inside = (pv > PROB_CLAMP) & (pv < 1 - PROB_CLAMP)
    q = np.clip(pv, PROB_CLAMP, 1 - PROB_CLAMP)
    n = max(pv.size, 1)
    loss = -(y * np.log(q) + (1 - y) * np.log(1 - q)).sum() / n

    def back(g):
        return [g * inside * (-(y / q) + (1 - y) / (1 - q)) / n]

    return p.tape.record("bce", np.asarray(loss, dtype=pv.dtype), (p,), back)


def softmax(z) -> np.ndarray:
    z = np.asarray(z)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(logits: Var, target) -> Var:
    """Mean categorical cross-entropy of softmax(logits) against target distributions.

    ``target`` has the shape of ``logits``. Rows whose target sums to zero add
    nothing and are left out of the mean.
    """
    t = np.asarray(target, dtype=logits.value.dtype)
    if t.shape != logits.value.shape:
        raise ValueError(f"cross_entropy: logits {logits.value.shape} vs targets {t.shape}")
    z = logits.value if logits.value.ndim == 2 else logits.value[None, :]
    t2 = t if t.ndim == 2 else t[None, :]
    p = softmax(z)
    inside = (p > PROB_CLAMP) & (p < 1 - PROB_CLAMP)
    q = np.clip(p, PROB_CLAMP, 1 - PROB_CLAMP)
    rows = t2.sum(axis=1) > 0
    n = max(int(rows.sum()), 1)
    loss = -(t2 * np.log(q)).sum() / n

    def back(g):
        # d/dz of -sum_k t_k log p_k through the clamp
        dq = np.where(inside, -t2 / q, 0.0)
        dz = p * (dq - (dq * p).sum(axis=1, keepdims=True))
        dz = g * dz / n
        return [dz.reshape(logits.value.shape)]

    return logits.tape.record("cross_entropy", np.asarray(loss, dtype=z.dtype), (logits,), back)


def mse(p: Var, y) -> Var:
    y = np.asarray(y, dtype=p.value.dtype)
    if y.shape != p.value.shape:
        raise ValueError(f"mse: predictions {p.value.shape} vs targets {y.shape}")
    diff = p.value - y
    n = max(diff.size, 1)
    return p.tape.record("mse", np.asarray((diff * diff).sum() / n), (p,),
                         lambda g: [g * 2.0 * diff / n])


# -- gradient checking ----------------------------------------------------------------

def value_and_grad(fn: Callable, params: dict, track_margins: bool = False):
    """Run ``fn(tape, vars)`` -> scalar Var; return (value, grads, tape)."""
    tape = Tape(track_margins=track_margins)
    vs = {k: tape.param(k, v) for k, v in params.items()}
    loss = fn(tape, vs)
    grads = tape.backward(loss)
    return float(loss.value), grads, tape


def evaluate(fn: Callable, params: dict) -> float:
    tape = Tape()
    vs = {k: tape.param(k, v) for k, v in params.items()}
    return float(fn(tape, vs).value)


def gradcheck(fn: Callable, params: dict, eps: float = 1e-6, names=None) -> float:
    """Max relative error between analytic and central-difference gradients.

    Error per coordinate is ``|a - n| / max(1, |a|, |n|)``.
    """
    params = {k: np.array(v, dtype=np.float64) for k, v in params.items()}
    _, grads, _ = value_and_grad(fn, params)
    worst = 0.0
    for name in names or params:
        base = params[name]
        flat = base.reshape(-1)
        ga = grads[name].reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + eps
            fp = evaluate(fn, params)
            flat[i] = old - eps
            fm = evaluate(fn, params)
            flat[i] = old
            num = (fp - fm) / (2 * eps)
            err = abs(ga[i] - num) / max(1.0, abs(ga[i]), abs(num))
            worst = max(worst, err)
    return worst


def kink_margins(fn: Callable, params: dict):
    """(smallest |ReLU input|, smallest max/min runner-up gap) of one forward pass."""
    tape = Tape(track_margins=True)
    vs = {k: tape.param(k, v) for k, v in params.items()}
    fn(tape, vs)
    return tape.relu_margin, tape.tie_margin


# -- checkpoints -------------------------------------------------------------------------

CHECKPOINT_FORMAT = "invembed-checkpoint/1"


def save_checkpoint(path, params: dict, meta: dict | None = None) -> None:
    """JSON map ``name -> {shape, values}`` (row-major), plus free-form metadata."""
    doc = {
        "format": CHECKPOINT_FORMAT,
        "meta": meta or {},
        "params": {
            name: {"shape": list(v.shape), "values": np.asarray(v, dtype=np.float64).reshape(-1).tolist()}
            for name, v in sorted(params.items())
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_checkpoint(path, dtype=np.float64):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a checkpoint ({doc.get('format')!r})")
    params = {
        name: np.asarray(e["values"], dtype=dtype).reshape(e["shape"])
        for name, e in doc["params"].items()
    }
    return params, doc.get("meta", {})
