import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invembed.fol import (
    DEFINITION,
    FUNCTION,
    PREDICATE,
    SKOLEM,
    ArityError,
    ClausifyConfig,
    ClauseSet,
    ParseError,
    TermBank,
    clausify,
    format_cnf,
    parse_cnf,
    parse_deepmath,
    parse_fof,
    symbol_statistics,
)
from invembed.fol import formula as F
from invembed.graph import build_graph, graph_isomorphic
from invembed.harness.randgen import random_clause_set

from oracles import dpll, truth_table_sat


def _sym(cs, name):
    [s] = [s for s in cs.symbol_table if s.name == name]
    return s


# -- parse_cnf ----------------------------------------------------------------------------

def test_parse_cnf_single_clause():
    cs = parse_cnf("cnf(c1,axiom, p(X) | ~q(f(X))).")
    assert len(cs) == 1
    [c] = cs.clauses
    assert len(c.literals) == 2
    assert c.clause_type == "axiom"
    kinds = {(s.name, s.arity, s.kind) for s in cs.symbol_table}
    assert kinds == {("p", 1, PREDICATE), ("q", 1, PREDICATE), ("f", 1, FUNCTION)}
    x1 = c.literals[0].atom.args[0]
    x2 = c.literals[1].atom.args[0].args[0]
    assert x1 is x2 and x1.is_var


def test_parse_cnf_variables_are_per_clause():
    cs = parse_cnf("cnf(c1,axiom, p(X)). cnf(c2,axiom, ~p(X)).")
    x1 = cs.clauses[0].literals[0].atom.args[0]
    x2 = cs.clauses[1].literals[0].atom.args[0]
    assert x1 is not x2


def test_parse_cnf_shares_subterms():
    cs = parse_cnf("cnf(c1,axiom, p(f(X), f(X))).")
    a, b = cs.clauses[0].literals[0].atom.args
    assert a is b


def test_parse_cnf_equality_and_disequality():
    cs = parse_cnf("cnf(c1,axiom, X = f(X) | a != b).")
    lits = cs.clauses[0].literals
    assert lits[0].positive and lits[0].atom.symbol.name == "="
    assert not lits[1].positive and lits[1].atom.symbol.name == "="


def test_parse_cnf_syntax_error_has_location():
    with pytest.raises(ParseError) as e:
        parse_cnf("cnf(c1,axiom, p(X)).\ncnf(c2,axiom, p(X) | ).")
    assert e.value.line == 2 and e.value.col is not None


def test_parse_cnf_arity_conflict():
    with pytest.raises((ArityError, ParseError)):
        parse_cnf("cnf(c1,axiom, p(a)). cnf(c2,axiom, p(a,b)).")


def test_parse_cnf_kind_conflict():
    with pytest.raises((ArityError, ParseError)):
        parse_cnf("cnf(c1,axiom, p(f(a)) | f(a)).")


def test_round_trip_is_isomorphic():
    rng = np.random.default_rng(3)
    for _ in range(50):
        cs = random_clause_set(rng)
        back = parse_cnf(format_cnf(cs))
        assert graph_isomorphic(build_graph(cs), build_graph(back))
        assert format_cnf(back) == format_cnf(cs)


# -- interning ----------------------------------------------------------------------------

_names = st.sampled_from(["a", "b", "f", "g"])


@st.composite
def _term_shape(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(st.sampled_from(["a", "b", "X", "Y"]))
    name = draw(st.sampled_from(["f", "g"]))
    n = 1 if name == "f" else 2
    return (name, tuple(draw(_term_shape(depth - 1)) for _ in range(n)))


def _build(bank, shape):
    if isinstance(shape, str):
        if shape[0].isupper():
            return bank.var(shape, 0)
        return bank.app(bank.symbol(shape, 0, FUNCTION))
    name, args = shape
    return bank.app(bank.symbol(name, len(args), FUNCTION), [_build(bank, a) for a in args])


@given(st.lists(_term_shape(), min_size=2, max_size=6))
def test_interning_identity_iff_same_text(specs):
    bank = TermBank()
    terms = [_build(bank, s) for s in specs]
    for s, u in zip(specs, terms):
        for s2, u2 in zip(specs, terms):
            assert (u is u2) == (str(u) == str(u2))


# -- parse_fof ----------------------------------------------------------------------------

def test_parse_fof_universal():
    [(name, role, f)] = parse_fof("fof(a,axiom, ![X]: p(X)).")
    assert (name, role) == ("a", "axiom")
    assert isinstance(f, F.Forall) and isinstance(f.body, F.Atom)


def test_parse_fof_existential_conjunction():
    [(_, role, f)] = parse_fof("fof(a,conjecture, ?[X]: (p(X) & q(X))).")
    assert role == "conjecture"
    assert isinstance(f, F.Exists) and isinstance(f.body, F.And)


def test_parse_fof_unbound_variable():
    with pytest.raises(ParseError):
        parse_fof("fof(a,axiom, p(X)).")


def test_parse_fof_connectives():
    [(_, _, f)] = parse_fof("fof(a,axiom, (p => q) <=> (~q | ~r)).")
    assert isinstance(f, F.Iff) and isinstance(f.lhs, F.Implies)


# -- clausify -----------------------------------------------------------------------------

def _one(text, k=4):
    return clausify(parse_fof(text), ClausifyConfig(k))


def test_skolem_constant():
    cs = _one("fof(a,axiom, ?[X]: p(X)).")
    assert format_cnf(cs).strip() == "cnf(a_1, axiom, p(skolem1))."
    assert cs.origins[_sym(cs, "skolem1")] == SKOLEM


def test_skolem_function_of_universal_prefix():
    cs = _one("fof(a,axiom, ![X]: ?[Y]: r(X,Y)).")
    assert format_cnf(cs).strip() == "cnf(a_1, axiom, r(X,skolem1(X)))."
    assert _sym(cs, "skolem1").arity == 1


@pytest.mark.parametrize("text, arities", [
    ("fof(a,axiom, ![X,Y]: ?[Z]: p(X,Y,Z)).", {"skolem1": 2}),
    ("fof(a,axiom, ![X]: (q(X) | ?[Y]: ![Z]: ?[W]: r(X,Y,Z,W))).", {"skolem1": 1, "skolem2": 2}),
    ("fof(a,axiom, ?[Y]: ![Z]: r(Y,Z)).", {"skolem1": 0}),
])
def test_skolem_arity_counts_universals_in_scope(text, arities):
    cs = _one(text)
    got = {s.name: s.arity for s, o in cs.origins.items() if o == SKOLEM}
    assert got == arities


def test_definitional_naming_example():
    cs = _one("fof(a,axiom, (a & b) | (c & d)).", k=2)
    clauses = {frozenset((l.positive, l.atom.symbol.name) for l in c.literals) for c in cs.clauses}
    expected = {
        frozenset({(True, "def1"), (True, "def2")}),
        frozenset({(False, "def1"), (True, "a")}),
        frozenset({(False, "def1"), (True, "b")}),
        frozenset({(False, "def2"), (True, "c")}),
        frozenset({(False, "def2"), (True, "d")}),
    }
    assert clauses == expected and len(cs.clauses) == 5
    assert cs.origins[_sym(cs, "def1")] == DEFINITION
    assert cs.origins[_sym(cs, "def2")] == DEFINITION


def test_definitional_example_equisatisfiable_by_truth_table():
    [(_, _, f)] = parse_fof("fof(a,axiom, (a & b) | (c & d)).")
    cs = clausify([("a", "axiom", f)], ClausifyConfig(2))
    clauses = [[(l.atom.symbol.name, l.positive) for l in c.literals] for c in cs.clauses]
    assert dpll(clauses) == truth_table_sat(f, ["a", "b", "c", "d"], F.evaluate)
    # every model of the clauses restricts to a model of the formula
    import itertools
    names = ["a", "b", "c", "d", "def1", "def2"]
    for vals in itertools.product([False, True], repeat=6):
        v = dict(zip(names, vals))
        if all(any(v[a] == p for a, p in c) for c in clauses):
            assert F.evaluate(f, v)


def test_below_threshold_distributes():
    cs = _one("fof(a,axiom, (a & b) | (c & d)).", k=4)
    assert not cs.origins and len(cs.clauses) == 4


def test_conjecture_is_negated():
    cs = clausify(parse_fof("fof(c,conjecture, p & q)."))
    assert [c.clause_type for c in cs.clauses] == ["negated_conjecture"]
    assert [l.positive for l in cs.clauses[0].literals] == [False, False]


def test_fresh_names_avoid_existing_symbols():
    cs = _one("fof(a,axiom, ?[X]: skolem1(X)).")
    names = {s.name for s in cs.symbol_table}
    assert "skolem2" in names and len(names) == 2


def test_clausify_origins_on_branching_fixture():
    text = "fof(a,axiom, ![X]: ((p(X) & q(X)) | (r(X) & ?[Y]: s(X,Y)) | (t(X) & u(X))))."
    cs = _one(text, k=4)
    origins = {s.name: o for s, o in cs.origins.items()}
    assert origins["skolem1"] == SKOLEM and _sym(cs, "skolem1").arity == 1
    assert any(o == DEFINITION for o in origins.values())
    for s, o in cs.origins.items():
        assert s.name.startswith("skolem" if o == SKOLEM else "def")


def _random_prop(rng, depth, atoms):
    if depth == 0 or rng.random() < 0.25:
        a = F.Atom(F.Fn(atoms[int(rng.integers(len(atoms)))]))
        return F.Not(a) if rng.random() < 0.3 else a
    k = int(rng.integers(5))
    l, r = _random_prop(rng, depth - 1, atoms), _random_prop(rng, depth - 1, atoms)
    return [F.And((l, r)), F.Or((l, r)), F.Implies(l, r), F.Iff(l, r), F.Not(l)][k]


def test_clausify_equisatisfiable_random_propositional():
    rng = np.random.default_rng(0)
    atoms = ["a", "b", "c", "d", "e", "g"]
    for _ in range(200):
        f = _random_prop(rng, 4, atoms)
        k = int(rng.integers(1, 6))
        cs = clausify([("f", "axiom", f)], ClausifyConfig(k))
        clauses = [[(l.atom.symbol.name, l.positive) for l in c.literals] for c in cs.clauses]
        assert dpll(clauses) == truth_table_sat(f, atoms, F.evaluate)


def test_deterministic_fresh_names():
    text = "fof(a,axiom, ![X]: ?[Y]: ((p(X) & q(Y)) | (r(Y) & s(X)) | (p(Y) & s(Y))))."
    assert format_cnf(_one(text, 2)) == format_cnf(_one(text, 2))


# -- statistics ---------------------------------------------------------------------------

def test_symbol_statistics_counts():
    table = symbol_statistics(parse_cnf("cnf(c1,axiom,p(c)). cnf(c2,axiom,p(d))."))
    assert {k: n for k, (n, _) in table.items()} == {"p": 2, "c": 1, "d": 1}
    assert table["p"][1] == pytest.approx(0.5)


def test_symbol_statistics_empty():
    assert symbol_statistics(ClauseSet([], TermBank())) == {}


def test_symbol_statistics_collapses_fresh_symbols():
    cs = _one("fof(a,axiom, ![X]: ?[Y]: ?[Z]: (r(X,Y) & r(Y,Z))).")
    table = symbol_statistics(cs)
    assert table["skolem"][0] == 3
    raw = symbol_statistics(cs, collapse=False)
    assert "skolem1" in raw and "skolem" not in raw


# -- DeepMath files -----------------------------------------------------------------------

DM = """C fof(t1, conjecture, ![X]: (p(X) => q(X))).
+ fof(a1, axiom, ![X]: (p(X) => r(X))).
+ fof(a2, axiom, ![X]: (r(X) => q(X))).
- fof(a3, axiom, ![X]: s(X)).
- fof(a4, axiom, ?[X]: t(X)).
"""


def test_parse_deepmath_problem():
    p = parse_deepmath(DM, "t1")
    assert p.conjecture[0] == "t1"
    assert [l for *_, l in p.premises] == [1, 1, 0, 0]


def test_parse_deepmath_missing_conjecture():
    with pytest.raises(ParseError):
        parse_deepmath("+ fof(a1, axiom, p).\n")


def test_parse_deepmath_bad_line_reports_number():
    with pytest.raises(ParseError) as e:
        parse_deepmath("C fof(t, conjecture, p).\n* fof(a, axiom, q).\n")
    assert e.value.line == 2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_random_clause_sets_parse_back(seed):
    cs = random_clause_set(np.random.default_rng(seed))
    assert format_cnf(parse_cnf(format_cnf(cs))) == format_cnf(cs)
