import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invembed.fol import parse_cnf
from invembed.gnn import (
    Dims,
    LayerState,
    check_params,
    describe,
    embed,
    forward,
    init_embeddings,
    init_params,
    message_pass,
)
from invembed.graph import build_graph, build_index, default_config, leancop_config, premise_config
from invembed.harness.randgen import random_clause_set
from invembed.tensor import Tape, gradcheck, kink_margins, mean_, mul, sum_

from oracles import layer_oracle

CFG = default_config()
SMALL = Dims(2, [4, 5, 3], [1, 6, 4], [4, 5, 3])


def _layer(g, P, state_values, i=0):
    tape = Tape()
    c, s, t = (tape.const(v) for v in state_values)
    out = message_pass(LayerState(c, s, t), i, P, build_index(g))
    return out.c.value, out.s.value, out.t.value


def _oracle(g, P, state_values, i=0):
    c, s, t = (v.tolist() for v in state_values)
    Pl = {k: v.tolist() for k, v in P.items() if k.startswith(f"L{i}.")}
    out = layer_oracle(c, s, t, g.ct_edges.tolist(), g.st_edges.tolist(), Pl, prefix=f"L{i}.")
    return tuple(np.array(x, dtype=np.float64).reshape(len(x), -1) for x in out)


def _random_state(g, dims, rng, i=0):
    c = rng.normal(size=(g.n_c, dims.d_c[i]))
    s = rng.normal(size=(g.n_s, dims.d_s[i]))
    t = rng.normal(size=(g.n_t, dims.d_t[i]))
    t[0] = 0.0
    return c, s, t


# -- shapes -------------------------------------------------------------------------------

def test_default_dims():
    d = Dims()
    assert d.L == 5 and d.d_c == [4] + [32] * 5 and d.d_t == d.d_c and d.d_s == [1] + [64] * 5


def test_bad_dims():
    with pytest.raises(ValueError):
        Dims(2, [4, 4], [1, 4, 4], [4, 4, 4])
    with pytest.raises(ValueError):
        Dims(1, [4, 0], [1, 4], [4, 4])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 4), st.data())
def test_shape_conformance(L, data):
    w = st.lists(st.integers(1, 9), min_size=L + 1, max_size=L + 1)
    dims = Dims(L, data.draw(w), data.draw(w), data.draw(w))
    shapes = describe(dims, CFG)
    for i in range(L):
        c0, c1 = dims.d_c[i], dims.d_c[i + 1]
        s0, s1 = dims.d_s[i], dims.d_s[i + 1]
        t0, t1 = dims.d_t[i], dims.d_t[i + 1]
        p = f"L{i}."
        assert shapes[p + "B_c"] == (c1,) and shapes[p + "B_ts"] == (s1,)
        assert shapes[p + "B_st"] == (t1,) and shapes[p + "B_t"] == (t1,)
        assert shapes[p + "M_c"] == (c1, c0) and shapes[p + "M_ct"] == (c1, 2 * t0)
        assert shapes[p + "M_s"] == (s1, s0) and shapes[p + "M_ts"] == (s1, 2 * s1)
        assert shapes[p + "M_t"] == (t1, t0) and shapes[p + "M_tc"] == (t1, 2 * c0)
        for j in (1, 2, 3):
            assert shapes[f"{p}M_ts.{j}"] == (s1, t0)
            assert shapes[f"{p}M_st.{j}"] == (t1, 2 * t1)
            assert shapes[f"{p}M_st.1.{j}"] == (t1, t0)
            assert shapes[f"{p}M_st.2.{j}"] == (t1, t0)
            assert shapes[f"{p}M_st.3.{j}"] == (t1, s0)
    assert len([k for k in shapes if k.startswith("L")]) == 25 * L
    params = init_params(dims, CFG, seed=1)
    check_params(params, dims, CFG)


def test_init_is_reproducible():
    a, b = init_params(SMALL, CFG, seed=3), init_params(SMALL, CFG, seed=3)
    assert all(np.array_equal(a[k], b[k]) for k in a)
    assert not np.array_equal(a["L0.M_c"], init_params(SMALL, CFG, seed=4)["L0.M_c"])


def test_check_params_reports_bad_shape():
    params = init_params(SMALL, CFG)
    params["L1.M_t"] = np.zeros((2, 2))
    with pytest.raises(ValueError, match="L1.M_t"):
        check_params(params, SMALL, CFG)
    del params["L0.B_c"]
    with pytest.raises(KeyError):
        check_params(params, SMALL, CFG)


# -- initial embeddings -------------------------------------------------------------------

def test_predicate_zero_function_learned():
    g = build_graph(parse_cnf("cnf(c1,axiom,p(a))."), CFG)
    P = init_params(SMALL, CFG, seed=0)
    tape = Tape()
    st0 = init_embeddings(tape, g, P, CFG)
    p, a = g.symbol_names.index("p"), g.symbol_names.index("a")
    assert st0.s.value[p].tolist() == [0.0]
    assert st0.s.value[a].tolist() == P["init.s"][0].tolist()


def test_same_type_clauses_share_rows_and_t0_is_zero():
    g = build_graph(parse_cnf("cnf(c1,axiom,p(a)). cnf(c2,axiom,q(X))."), CFG)
    P = init_params(SMALL, CFG, seed=0)
    st0 = init_embeddings(Tape(), g, P, CFG)
    np.testing.assert_array_equal(st0.c.value[0], st0.c.value[1])
    assert not st0.t.value[0].any()


def test_unknown_node_type():
    g = build_graph(parse_cnf("cnf(c1,axiom,p(a))."), leancop_config())
    g.clause_types = ["weird"]
    with pytest.raises(ValueError, match="weird"):
        init_embeddings(Tape(), g, init_params(SMALL, leancop_config()), leancop_config())


def test_zero_layers_returns_initial_vectors():
    dims = Dims(0, [4], [1], [4])
    rng = np.random.default_rng(0)
    for _ in range(5):
        g = build_graph(random_clause_set(rng), CFG)
        P = init_params(dims, CFG, seed=1)
        c, s, t = embed(g, P, CFG, dims)
        c0 = init_embeddings(Tape(), g, P, CFG)
        np.testing.assert_array_equal(c, c0.c.value)
        np.testing.assert_array_equal(t, c0.t.value)


# -- one layer against the straight-line oracle -------------------------------------------

def _identity_padded(dims):
    P = {}
    for name, shape in describe(dims, CFG).items():
        if name.startswith("L0."):
            P[name] = np.zeros(shape) if len(shape) == 1 else np.eye(*shape)
    return P


def test_p_of_c_identity_padded_matches_oracle():
    g = build_graph(parse_cnf("cnf(c1,axiom,p(c))."), CFG)
    dims = Dims(1, [4, 4], [1, 4], [4, 4])
    P = _identity_padded(dims)
    full = init_params(dims, CFG, seed=2)
    state = init_embeddings(Tape(), g, full, CFG)
    values = (state.c.value, state.s.value, state.t.value)
    got = _layer(g, P, values)
    want = _oracle(g, P, values)
    for a, b in zip(got, want):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_p_of_c_hand_values():
    # identity matrices, zero biases, hand-chosen inputs
    g = build_graph(parse_cnf("cnf(c1,axiom,p(c))."), CFG)
    dims = Dims(1, [2, 2], [1, 2], [2, 2])
    P = _identity_padded(dims)
    pc, cc = g.term_labels.index("p(c)"), g.term_labels.index("c")
    p, c = g.symbol_names.index("p"), g.symbol_names.index("c")
    cl = np.array([[1.0, -1.0]])
    s = np.zeros((2, 1))
    s[c] = 0.5
    t = np.zeros((3, 2))
    t[pc], t[cc] = [1.0, 2.0], [3.0, -1.0]
    c1, s1, t1 = _layer(g, P, (cl, s, t))
    # clause: ReLU(c + I.red{t_pc}) = ReLU((1,-1) + (1,2)) = (2, 1)
    np.testing.assert_allclose(c1, [[2.0, 1.0]])
    # symbol p: x = t_pc + t_c = (4, 1), g = -1, red' = (-8, -2, -4, -1) -> first 2 cols
    s1_p = np.tanh(np.array([0.0, 0.0]) + np.array([-8.0, -2.0]))
    np.testing.assert_allclose(s1[p], s1_p)
    # symbol c: x = t_c = (3, -1) -> red' = (-6, 2, ...)
    np.testing.assert_allclose(s1[c], np.tanh(np.array([0.5, 0.0]) + np.array([-6.0, 2.0])))
    assert not t1[0].any()
    want = _oracle(g, P, (cl, s, t))
    np.testing.assert_allclose(t1, want[2], atol=1e-12)


def test_random_layers_match_oracle():
    rng = np.random.default_rng(7)
    for k in range(25):
        g = build_graph(random_clause_set(rng, clause_type="mixed"), CFG)
        P = init_params(SMALL, CFG, seed=k, bias_scale=0.3)
        for i in (0, 1):
            values = _random_state(g, SMALL, rng, i)
            got = _layer(g, P, values, i)
            want = _oracle(g, P, values, i)
            for a, b in zip(got, want):
                np.testing.assert_allclose(a, b.reshape(a.shape), atol=1e-12)


def test_empty_neighbourhood_reduces_to_self_term():
    g = build_graph(parse_cnf("cnf(c1,axiom,p(a))."), CFG)
    g.ct_edges = g.ct_edges[:0]  # a clause with no literals
    P = init_params(SMALL, CFG, seed=0, bias_scale=0.5)
    rng = np.random.default_rng(0)
    values = _random_state(g, SMALL, rng)
    c1, _, _ = _layer(g, P, values)
    expect = np.maximum(0, P["L0.B_c"] + P["L0.M_c"] @ values[0][0])
    np.testing.assert_allclose(c1[0], expect, atol=1e-14)


def test_negation_of_single_literal():
    P = init_params(SMALL, CFG, seed=5, bias_scale=0.5)
    g_neg = build_graph(parse_cnf("cnf(c1,axiom,~q)."), CFG)
    g_pos = build_graph(parse_cnf("cnf(c1,axiom,q)."), CFG)
    assert g_neg.st_edges[0, 4] == 1 and g_pos.st_edges[0, 4] == -1
    n1 = embed(g_neg, P, CFG, Dims(1, SMALL.d_c[:2], SMALL.d_s[:2], SMALL.d_t[:2]))
    p1 = embed(g_pos, P, CFG, Dims(1, SMALL.d_c[:2], SMALL.d_s[:2], SMALL.d_t[:2]))
    np.testing.assert_allclose(n1[1], -p1[1], atol=1e-15)
    assert np.abs(n1[1]).max() > 0
    np.testing.assert_array_equal(n1[0], p1[0])
    np.testing.assert_array_equal(n1[2], p1[2])
    # and through all layers
    nL, pL = embed(g_neg, P, CFG, SMALL), embed(g_pos, P, CFG, SMALL)
    np.testing.assert_allclose(nL[1], -pL[1], atol=1e-12)
    np.testing.assert_allclose(nL[0], pL[0], atol=1e-12)


# -- forward properties -------------------------------------------------------------------

def test_disconnected_clause_does_not_change_other_nodes():
    base = "cnf(c1,axiom,p(f(X),a) | ~q(X)). cnf(c2,negated_conjecture,q(a))."
    g1 = build_graph(parse_cnf(base), CFG)
    g2 = build_graph(parse_cnf(base + " cnf(c3,axiom,r(Y,b))."), CFG)
    P = init_params(SMALL, CFG, seed=9, bias_scale=0.3)
    L1 = embed(g1, P, CFG, SMALL, keep_layers=True)
    L2 = embed(g2, P, CFG, SMALL, keep_layers=True)
    for (c1, s1, t1), (c2, s2, t2) in zip(L1, L2):
        # BLAS may block a taller matrix differently, hence not bit-exact
        np.testing.assert_allclose(c1, c2[:g1.n_c], atol=1e-14)
        np.testing.assert_allclose(s1, s2[:g1.n_s], atol=1e-14)
        np.testing.assert_allclose(t1, t2[:g1.n_t], atol=1e-14)


def test_layer_locality_under_perturbation():
    # perturbing a term's layer-i row leaves every non-neighbour's layer-(i+1) row alone
    g = build_graph(parse_cnf("cnf(c1,axiom,p(a)). cnf(c2,axiom,q(b))."), CFG)
    P = init_params(SMALL, CFG, seed=1, bias_scale=0.3)
    rng = np.random.default_rng(2)
    values = _random_state(g, SMALL, rng)
    base = _layer(g, P, values)
    b = g.term_labels.index("b")
    t = values[2].copy()
    t[b] += 1.0
    moved = _layer(g, P, (values[0], values[1], t))
    np.testing.assert_array_equal(base[0][0], moved[0][0])
    for sym in ("p", "a"):
        j = g.symbol_names.index(sym)
        np.testing.assert_array_equal(base[1][j], moved[1][j])
    for term in ("p(a)", "a"):
        j = g.term_labels.index(term)
        np.testing.assert_array_equal(base[2][j], moved[2][j])
    assert not np.array_equal(base[2][g.term_labels.index("q(b)")],
                              moved[2][g.term_labels.index("q(b)")])


def test_forward_is_deterministic():
    rng = np.random.default_rng(4)
    g = build_graph(random_clause_set(rng), CFG)
    P = init_params(Dims(), CFG, seed=0)
    a, b = embed(g, P, CFG, Dims()), embed(g, P, CFG, Dims())
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
        assert np.isfinite(x).all()


def test_output_shapes_for_each_config():
    cs = parse_cnf("cnf(c1,negated_conjecture,p(X,f(a))). cnf(c2,axiom,~q(X)).")
    for cfg in (CFG, premise_config(), leancop_config()):
        g = build_graph(cs, cfg)
        P = init_params(SMALL, cfg, seed=0)
        c, s, t = embed(g, P, cfg, SMALL)
        assert c.shape == (g.n_c, 3) and s.shape == (g.n_s, 4) and t.shape == (g.n_t, 3)


def test_layer_gradcheck_on_three_clause_graph():
    cs = parse_cnf("cnf(c1,axiom,p(f(X),a) | ~q(X,b)). cnf(c2,axiom,q(a,Y) | r(Y)). "
                   "cnf(c3,negated_conjecture,~p(f(a),a)).")
    g = build_graph(cs, CFG)
    dims = Dims(1, [4, 3], [1, 3], [4, 3])
    idx = build_index(g)
    rng = np.random.default_rng(0)
    w = [rng.normal(size=(n, 3)) for n in (g.n_c, g.n_s, g.n_t)]

    def fn(tape, P):
        out = forward(tape, g, P, CFG, 1, idx=idx)
        return sum_(mul(out.c, w[0])) + sum_(mul(out.s, w[1])) + mean_(mul(out.t, w[2]))

    for seed in range(50):
        P = init_params(dims, CFG, seed=seed, bias_scale=0.5)
        relu_gap, tie_gap = kink_margins(fn, P)
        if relu_gap > 1e-4 and tie_gap > 1e-4:
            break
    assert gradcheck(fn, P) <= 1e-5
