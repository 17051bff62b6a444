import itertools

import pytest

from trapver.invgen import state_variable_map
from trapver.logic import Structure
from trapver.petri import (
    InstanceNet, OneSafetyViolation, TRAP_ENUM_MAX_PLACES, Transition,
    deadlocks, enabled_transitions, enumerate_structural_one_invariants,
    enumerate_traps, instantiate, is_initially_marked,
    is_structural_one_invariant, is_trap, marking_to_structure, reachable,
    set_to_structure, structure_to_marking, to_dot,
)
from trapver.ws1s import ResourceLimitExceeded

from conftest import corpus_system


# ---------------------------------------------------------------------------
# Instantiation


def test_philosophers_instance_shape(philosophers):
    net = instantiate(philosophers, 3)
    assert net.nplaces == 12
    assert len(net.transitions) == 6
    assert net.duplicates == ()
    # state-major place order, node-minor
    assert net.places[:3] == (("w", 0), ("w", 1), ("w", 2))
    # every philosopher waiting, every fork free
    assert net.places_of(net.m0) == tuple(
        (s, u) for s in ("w", "f") for u in range(3))


def test_philosophers_ring_of_one(philosophers):
    net = instantiate(philosophers, 1)
    assert net.nplaces == 4
    # succ(0) = 0, so grab takes the single fork once (sets, not bags)
    assert len(net.transitions) == 2
    r = reachable(net)
    assert len(r.markings) == 2
    assert deadlocks(net, r) == ()


def test_instance_rejects_empty_ring(philosophers):
    with pytest.raises(ValueError):
        instantiate(philosophers, 0)


def test_transition_pre_post_are_disjoint_here(philosophers):
    net = instantiate(philosophers, 4)
    for t in net.transitions:
        assert t.pre & t.post == 0
        assert t.pre.bit_count() == 3 and t.post.bit_count() == 3


def test_duplicate_transitions_recorded_not_merged_silently():
    sys = corpus_system("israeli_jalfon")
    net = instantiate(sys, 2)
    # on a two-node ring, pass-right and pass-left coincide
    assert len(net.duplicates) == 2
    with pytest.raises(ValueError, match="duality"):
        instantiate(sys, 2, check_duality=True)
    assert instantiate(sys, 3, check_duality=True).duplicates == ()


def test_check_duality_passes_on_philosophers(philosophers):
    for n in (1, 2, 3, 4):
        assert instantiate(philosophers, n,
                           check_duality=True).duplicates == ()


# ---------------------------------------------------------------------------
# Reachability and deadlocks


def test_philosophers_reachability(philosophers):
    net = instantiate(philosophers, 3)
    r = reachable(net)
    assert len(r.markings) == 4
    assert r.markings[0] == net.m0
    assert deadlocks(net, r) == ()
    for m in r.markings:
        assert m.bit_count() == 6


def test_broken_philosophers_deadlock():
    net = instantiate(corpus_system("broken_philosophers"), 2)
    r = reachable(net)
    assert len(r.markings) == 6
    dead = deadlocks(net, r)
    assert len(dead) == 1
    # everyone holding one fork: both philosophers in o, both forks busy
    assert net.places_of(dead[0]) == (("o", 0), ("o", 1),
                                      ("b", 0), ("b", 1))
    assert enabled_transitions(net, dead[0]) == ()


def test_reachable_cap(philosophers):
    net = instantiate(philosophers, 3)
    with pytest.raises(ResourceLimitExceeded):
        reachable(net, cap=2)


def test_one_safety_violation_detected(philosophers):
    net = instantiate(philosophers, 2)
    # forge a transition that drops a second token on a marked place
    bad = Transition(pre=1 << net.place_index[("w", 0)],
                     post=1 << net.place_index[("f", 0)],
                     clause_index=0, assignment=())
    forged = InstanceNet(sys=net.sys, n=net.n, places=net.places,
                         place_index=net.place_index,
                         transitions=net.transitions + (bad,),
                         m0=net.m0, duplicates=())
    with pytest.raises(OneSafetyViolation):
        reachable(forged)


# ---------------------------------------------------------------------------
# Traps and 1-invariants against brute force


def _brute_traps(net):
    out = []
    for bits in itertools.product((0, 1), repeat=net.nplaces):
        w = sum(b << i for i, b in enumerate(bits))
        if w and is_trap(net, w):
            out.append(w)
    return out


def _brute_one_invariants(net):
    out = []
    for bits in itertools.product((0, 1), repeat=net.nplaces):
        w = sum(b << i for i, b in enumerate(bits))
        if w and is_structural_one_invariant(net, w):
            out.append(w)
    return out


@pytest.mark.parametrize("name,n", [("philosophers", 2), ("semaphore", 2),
                                    ("herman", 3)])
def test_trap_enumeration_matches_brute_force(name, n):
    net = instantiate(corpus_system(name), n)
    assert sorted(enumerate_traps(net)) == sorted(_brute_traps(net))


@pytest.mark.parametrize("name,n", [("philosophers", 2), ("semaphore", 2),
                                    ("token_ring_dijkstra", 2)])
def test_one_invariant_enumeration_matches_brute_force(name, n):
    net = instantiate(corpus_system(name), n)
    got = sorted(enumerate_structural_one_invariants(net))
    assert got == sorted(_brute_one_invariants(net))


def test_trap_counts_on_known_instances(philosophers, alternating):
    net = instantiate(philosophers, 3)
    traps = enumerate_traps(net)
    marked = [w for w in traps if is_initially_marked(net, w)]
    assert len(marked) == 2103
    assert len(marked) == len(traps)  # every trap here meets w or f
    net2 = instantiate(alternating, 2)
    traps2 = enumerate_traps(net2)
    assert sum(1 for w in traps2 if is_initially_marked(net2, w)) == 377


def test_one_invariant_count_on_philosophers(philosophers):
    net = instantiate(philosophers, 3)
    invs = enumerate_structural_one_invariants(net)
    assert len(invs) == 9
    # per-node type invariants are among them
    for u in range(3):
        assert net.mask_of([("w", u), ("e", u)]) in invs
        assert net.mask_of([("f", u), ("b", u)]) in invs


def test_enumeration_refuses_large_nets(philosophers):
    net = instantiate(philosophers, 7)  # 28 places
    assert net.nplaces > TRAP_ENUM_MAX_PLACES
    with pytest.raises(ValueError, match="at most"):
        enumerate_traps(net)
    with pytest.raises(ValueError, match="at most"):
        enumerate_structural_one_invariants(net)


def test_trap_predicate_basics(philosophers):
    net = instantiate(philosophers, 2)
    assert not is_trap(net, 0)
    # all forks (free or busy) can never be emptied
    forks = net.mask_of([("f", 0), ("f", 1), ("b", 0), ("b", 1)])
    assert is_trap(net, forks)
    # a single free fork is consumed by the grab next to it
    assert not is_trap(net, net.mask_of([("f", 0)]))


def test_token_ring_mutex_invariant():
    sys = corpus_system("token_ring_dijkstra")
    net = instantiate(sys, 3)
    w = net.mask_of([("go", 0)]
                    + [("t", u) for u in range(3)]
                    + [("c", u) for u in range(3)])
    assert is_structural_one_invariant(net, w)
    r = reachable(net)
    for m in r.markings:
        assert (m & w).bit_count() == 1


# ---------------------------------------------------------------------------
# Structure encoding round-trips


def test_marking_structure_round_trip(philosophers):
    net = instantiate(philosophers, 3)
    svm = state_variable_map(philosophers)
    for m in reachable(net).markings:
        st = marking_to_structure(net, m, svm)
        assert structure_to_marking(net, st, svm) == m


def test_structure_to_marking_rejects_non_markings(philosophers):
    net = instantiate(philosophers, 2)
    svm = state_variable_map(philosophers)
    both = Structure(2, {}, {"X_w": frozenset({0, 1}),
                             "X_e": frozenset({0}),
                             "X_f": frozenset({0, 1}),
                             "X_b": frozenset()})
    with pytest.raises(ValueError, match="node 0 has 2 states"):
        structure_to_marking(net, both, svm)
    wrong_n = Structure(3, {}, {v: frozenset() for v in svm.var.values()})
    with pytest.raises(ValueError, match="3 nodes"):
        structure_to_marking(net, wrong_n, svm)


def test_set_to_structure_decodes_subsets(philosophers):
    net = instantiate(philosophers, 2)
    svm = state_variable_map(philosophers)
    w = net.mask_of([("w", 1), ("b", 0)])
    st = set_to_structure(net, w, svm.var)
    assert st.so["X_w"] == frozenset({1})
    assert st.so["X_b"] == frozenset({0})
    assert st.so["X_e"] == frozenset()


def test_to_dot_mentions_every_place(philosophers):
    net = instantiate(philosophers, 2)
    dot = to_dot(net)
    assert dot.startswith("digraph")
    for s, u in net.places:
        assert f"{s}{u}" in dot or f"{s}_{u}" in dot or f"{s},{u}" in dot
