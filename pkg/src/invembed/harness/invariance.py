"""Executable invariance checks: transform a clause set, embed both, compare."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..fol.terms import ClauseSet
from ..gnn import Dims, forward, init_params
from ..graph import NodeTypeConfig, build_graph, default_config, mapping_is_isomorphism
from ..tensor import Tape
from .randgen import random_clause_set
from .transforms import INVARIANT_KINDS, SWAP_ARGS, Transform, apply_transform, random_transform


@dataclass
class InvarianceReport:
    kind: str
    structural: bool  # the node map is an isomorphism of the two graphs
    deviation: dict = field(default_factory=dict)  # node class -> max scaled deviation
    tol: float = 1e-9

    @property
    def max_deviation(self) -> float:
        return max(self.deviation.values(), default=float("inf"))

    @property
    def numeric(self) -> bool:
        return bool(self.deviation) and self.max_deviation <= self.tol

    @property
    def passed(self) -> bool:
        return self.structural and self.numeric

    def to_json(self) -> dict:
        return {"kind": self.kind, "structural": self.structural, "passed": self.passed,
                "deviation": {k: float(v) for k, v in self.deviation.items()}}


def layer_count(params: dict) -> int:
    layers = {int(k.split(".", 1)[0][1:]) for k in params if k[:1] == "L" and k[1:2].isdigit()}
    return max(layers) + 1 if layers else 0


def _dev(a, b) -> float:
    """Max of |a - b| / max(1, |a|, |b|); 0 for empty arrays."""
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))))


def check_invariance(cs: ClauseSet, t: Transform, params: dict, tol: float = 1e-9,
                     cfg: NodeTypeConfig | None = None) -> InvarianceReport:
    """Compare embeddings of ``cs`` and its transform under the induced node map.

    For a negation, the negated symbol's row is expected to flip sign. The
    numeric comparison runs whenever node counts agree, even after a
    structural failure, so controls can be scored on numbers alone.
    """
    cfg = cfg or default_config()
    cs2, nm = apply_transform(cs, t)
    g1, g2 = build_graph(cs, cfg), build_graph(cs2, cfg)
    if (g1.n_c, g1.n_s, g1.n_t) != (g2.n_c, g2.n_s, g2.n_t):
        return InvarianceReport(t.kind, False, {}, tol)
    cmap, smap, tmap, neg = nm.graph_maps(g1, g2)
    structural = mapping_is_isomorphism(g1, g2, cmap, smap, tmap, negated=neg)
    L = layer_count(params)
    a = forward(Tape(), g1, params, cfg, L)
    b = forward(Tape(), g2, params, cfg, L)
    sign = np.ones((g1.n_s, 1))
    sign[neg] = -1.0
    dev = {
        "clauses": _dev(a.c.value, b.c.value[cmap]),
        "symbols": _dev(sign * a.s.value, b.s.value[smap]),
        "terms": _dev(a.t.value, b.t.value[tmap]),
    }
    return InvarianceReport(t.kind, bool(structural), dev, tol)


def invariance_suite(seed: int, graphs: int, param_seeds: int = 1, dims: Dims | None = None,
                     kinds=INVARIANT_KINDS, tol: float = 1e-9, cfg: NodeTypeConfig | None = None,
                     dtype=np.float64):
    """Random clause sets x fresh parameter draws x transform kinds.

    Returns the list of reports; every one passes when the network is invariant.
    """
    cfg = cfg or default_config()
    dims = dims or Dims()
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(graphs):
        cs = random_clause_set(rng)
        for _ in range(param_seeds):
            params = init_params(dims, cfg, int(rng.integers(2**31)), bias_scale=0.1, dtype=dtype)
            for kind in kinds:
                t = random_transform(cs, kind, rng)
                reports.append(check_invariance(cs, t, params, tol, cfg))
    return reports


def negative_control(seed: int, draws: int, dims: Dims | None = None, tol: float = 1e-9,
                     cfg: NodeTypeConfig | None = None) -> list:
    """Argument-swap reports on random clause sets with fresh parameters.

    A healthy network fails the numeric comparison for (nearly) every draw.
    """
    cfg = cfg or default_config()
    dims = dims or Dims()
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(draws):
        cs = random_clause_set(rng)
        params = init_params(dims, cfg, int(rng.integers(2**31)), bias_scale=0.1)
        out.append(check_invariance(cs, Transform(SWAP_ARGS, symbol="q"), params, tol, cfg))
    return out
