import random

import pytest
from hypothesis import given, settings, strategies as st

from trapver.logic import (
    App, Bool, Eq, First, IsMax, IsZero, Le, Structure, Succ, Var, eval_ws1s,
    exists, exists_set, flatten, forall, formula_str, free_vars, iff, implies,
    land, lnot, lor, structures, translate,
)
from trapver.ws1s import (
    ResourceLimitExceeded, accepts, app_aut, app_first_aut, bool_aut,
    compile_formula, complement, decide, eq_aut, eq_first_aut, eq_succ_aut,
    eq_succ_first_aut, equivalent, is_max_aut, is_max_first_aut, le_aut,
    product, project, wf_aut,
)

from test_logic import _pool_formulas


# ---------------------------------------------------------------------------
# Atom automata against the reference evaluator


ATOMS = [
    (lambda: eq_aut("x", "y"), Eq(Var("x"), Var("y")), ["x", "y"], []),
    (lambda: le_aut("x", "y"), Le(Var("x"), Var("y")), ["x", "y"], []),
    (lambda: app_aut("P", "x"), App("P", Var("x")), ["x"], ["P"]),
    (lambda: app_first_aut("P"), App("P", First()), [], ["P"]),
    (lambda: is_max_aut("x"), IsMax(Var("x")), ["x"], []),
    (lambda: is_max_first_aut(), IsMax(First()), [], []),
    (lambda: eq_first_aut("x"), Eq(Var("x"), First()), ["x"], []),
    (lambda: eq_succ_aut("x", "y"), Eq(Succ(Var("x")), Var("y")),
     ["x", "y"], []),
    (lambda: eq_succ_first_aut("x"), Eq(Succ(Var("x")), First()),
     ["x"], []),
]


@pytest.mark.parametrize("build,f,fo,so", ATOMS,
                         ids=[formula_str(a[1]) for a in ATOMS])
def test_atom_automata_match_word_semantics(build, f, fo, so):
    aut = build()
    for n in (1, 2, 3, 4):
        for s in structures(n, fo, so):
            assert accepts(aut, s) == eval_ws1s(f, s), f"n={n} {s}"


def test_bool_automata():
    for n in (1, 2, 3):
        st_ = Structure(n, {}, {})
        assert accepts(bool_aut(True), st_)
        assert not accepts(bool_aut(False), st_)


def test_empty_word_is_never_accepted():
    assert not bool_aut(True).accepts_word([])
    aut = compile_formula(Bool(True))
    assert not aut.accepts_word([])
    assert aut.accepts_word([0])


# ---------------------------------------------------------------------------
# Compilation of composite formulas


def _exhaustive_match(f, max_n=3):
    aut = compile_formula(f)
    fo, so = free_vars(f)
    for n in range(1, max_n + 1):
        for s in structures(n, sorted(fo), sorted(so)):
            assert accepts(aut, s) == eval_ws1s(f, s), f"n={n} {s}"


def test_compile_connectives():
    x, y = Var("x"), Var("y")
    _exhaustive_match(land(Le(x, y), lnot(Eq(x, y))))
    _exhaustive_match(lor(IsZero(x), IsMax(x)))
    _exhaustive_match(implies(App("P", x), App("Q", x)))
    _exhaustive_match(iff(App("P", x), lnot(App("Q", y))))


def test_compile_quantifiers():
    x, y = Var("x"), Var("y")
    _exhaustive_match(exists(["x"], land(App("P", x), IsMax(x))))
    _exhaustive_match(forall(["x"], implies(IsZero(x), App("P", x))))
    _exhaustive_match(exists(["x", "y"], land(Eq(Succ(x), y), App("P", y))))
    _exhaustive_match(
        exists_set(["X"], forall(["x"], iff(App("X", x), lnot(App("P", x))))))


def test_compile_flattens_nested_terms():
    f = App("P", Succ(Succ(Var("x"))))
    _exhaustive_match(f)


def test_compile_rejects_name_used_as_both_sorts():
    f = land(App("X", Var("i")), Le(Var("X"), Var("i")))
    with pytest.raises(ValueError, match="both"):
        compile_formula(f)


def test_tracks_are_sorted_by_name():
    f = land(App("B", Var("x")), App("A", Var("x")))
    assert compile_formula(f).tracks == ("A", "B", "x")


# ---------------------------------------------------------------------------
# Canonical form


def test_language_equal_formulas_compile_identically():
    x, y = Var("x"), Var("y")
    assert compile_formula(Eq(x, y)) == compile_formula(Eq(y, x))
    assert compile_formula(land(Le(x, y), Le(y, x))) == \
        compile_formula(Eq(x, y))
    f = exists(["x", "y"], land(App("P", x), App("Q", y)))
    g = exists(["y", "x"], land(App("Q", y), App("P", x)))
    assert compile_formula(f) == compile_formula(g)
    assert compile_formula(lnot(lnot(Le(x, y)))) == compile_formula(Le(x, y))


def test_equivalent_requires_same_free_variables():
    with pytest.raises(ValueError):
        equivalent(App("P", Var("x")), App("P", Var("y")))
    assert equivalent(implies(App("P", Var("x")), App("P", Var("x"))),
                      lor(App("P", Var("x")), lnot(App("P", Var("x")))))


def test_complement_flips_acceptance():
    f = land(App("P", Var("x")), IsMax(Var("x")))
    aut = compile_formula(f)
    co = complement(aut)
    for n in (1, 2, 3):
        for s in structures(n, ["x"], ["P"]):
            assert accepts(co, s) == (not accepts(aut, s))


def test_project_is_existential_quantification():
    f = land(App("P", Var("x")), IsMax(Var("x")))
    left = project(compile_formula(f), "x")
    right = compile_formula(exists(["x"], f))
    assert left == right


def test_product_underlies_conjunction():
    a = compile_formula(App("P", Var("x")))
    b = compile_formula(App("Q", Var("x")))
    both = product(a, b, lambda p, q: p and q)
    want = compile_formula(land(App("P", Var("x")), App("Q", Var("x"))))
    assert both == want


# ---------------------------------------------------------------------------
# decide


def test_decide_finds_smallest_witness():
    f = exists(["x"], land(IsMax(Var("x")), lnot(IsZero(Var("x")))))
    r = decide(f)
    assert r.sat and r.witness.n == 2
    r3 = decide(f, min_universe=3)
    assert r3.sat and r3.witness.n == 3


def test_decide_unsat():
    f = land(Le(Var("x"), Var("y")), lnot(Le(Var("x"), Var("y"))))
    r = decide(f)
    assert not r.sat and r.witness is None


def test_decide_respects_min_universe():
    only_n1 = forall(["x"], IsZero(Var("x")))
    assert decide(only_n1, min_universe=1).sat
    assert not decide(only_n1, min_universe=2).sat
    with pytest.raises(ValueError):
        decide(only_n1, min_universe=0)


def test_decide_witness_carries_assignments():
    f = land(App("P", Var("x")), IsMax(Var("x")), lnot(App("P", First())))
    r = decide(f)
    assert r.sat
    w = r.witness
    assert w.fo["x"] == w.n - 1
    assert w.fo["x"] in w.so["P"]
    assert 0 not in w.so["P"]
    assert eval_ws1s(f, w)


def test_resource_cap_is_neither_sat_nor_unsat():
    f = exists(["x"], land(App("P", Var("x")), App("Q", Var("x"))))
    with pytest.raises(ResourceLimitExceeded):
        decide(f, max_states=1)


def test_decide_agrees_with_enumeration_on_pool():
    rng = random.Random(414243)
    for f in _pool_formulas(rng, count=24):
        g = translate(flatten(f))
        r = decide(g)
        fo, so = free_vars(g)
        found = None
        for n in (1, 2, 3, 4):
            if any(eval_ws1s(g, s)
                   for s in structures(n, sorted(fo), sorted(so))):
                found = n
                break
        if r.sat and r.witness.n <= 4:
            assert found == r.witness.n, formula_str(f)
        elif r.sat:
            assert found is None, formula_str(f)
        else:
            assert found is None, formula_str(f)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=5), st.data())
def test_successor_automaton_clamps(n, data):
    x = data.draw(st.integers(min_value=0, max_value=n - 1))
    y = data.draw(st.integers(min_value=0, max_value=n - 1))
    aut = eq_succ_aut("x", "y")
    s = Structure(n, {"x": x, "y": y}, {})
    want = (y == x + 1) if x < n - 1 else (y == x)
    assert accepts(aut, s) == want


def test_wf_automaton_wants_exactly_one_bit():
    aut = wf_aut("x")
    assert aut.accepts_word([1])
    assert aut.accepts_word([0, 1, 0])
    assert not aut.accepts_word([0, 0])
    assert not aut.accepts_word([1, 1])
