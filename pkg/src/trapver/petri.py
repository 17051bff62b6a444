"""Finite Petri-net instances of a system on a ring of n nodes.

Places are pairs (state, node); a transition is one filtered minimal
model of one clause, its preset holding the participating ports'
source states and its postset their target states.  These nets serve
as ground-truth oracles for the parameterized claims: trap and
1-invariant enumeration, reachability, deadlock detection.

Markings and place sets are int bit masks over the place list.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernels
from .logic import Structure, minimal_models
from .ws1s import ResourceLimitExceeded

TRAP_ENUM_MAX_PLACES = 24
REACH_CAP = 10 ** 6


class OneSafetyViolation(Exception):
    pass


@dataclass(frozen=True)
class Transition:
    pre: int
    post: int
    clause_index: int
    assignment: tuple  # sorted (variable, node) pairs


@dataclass(frozen=True)
class InstanceNet:
    sys: object
    n: int
    places: tuple          # (state, node), state-major declaration order
    place_index: dict
    transitions: tuple
    m0: int
    duplicates: tuple      # labels merged away by deduplication

    @property
    def nplaces(self) -> int:
        return len(self.places)

    def mask_of(self, places) -> int:
        m = 0
        for p in places:
            m |= 1 << self.place_index[p]
        return m

    def places_of(self, mask: int):
        return tuple(p for i, p in enumerate(self.places)
                     if (mask >> i) & 1)


def instantiate(sys, n: int, check_duality: bool = False) -> InstanceNet:
    """Build the n-node instance.  One transition per filtered minimal
    model of each clause; identical (preset, postset) pairs are merged.
    With check_duality, a merge across distinct (clause, assignment)
    sources raises instead (the usual expectation, but symmetric rule
    pairs can legitimately collide on small rings)."""
    if n < 1:
        raise ValueError("instance needs at least one node")
    places = [(s, u) for s in sys.all_states for u in range(n)]
    index = {p: i for i, p in enumerate(places)}

    raw = []
    for ci, cl in enumerate(sys.clauses):
        for (assign, ports) in minimal_models(cl, n,
                                              port_type=sys.port_type):
            pre = post = 0
            for port in sorted(ports):
                src, dst = sys.pre[port], sys.post[port]
                for u in sorted(ports[port]):
                    pre |= 1 << index[(src, u)]
                    post |= 1 << index[(dst, u)]
            raw.append(Transition(pre, post, ci,
                                  tuple(sorted(assign.items()))))

    seen: dict = {}
    out = []
    duplicates = []
    for t in raw:
        key = (t.pre, t.post)
        if key in seen:
            first = seen[key]
            duplicates.append(((first.clause_index, first.assignment),
                               (t.clause_index, t.assignment)))
            continue
        seen[key] = t
        out.append(t)
    if check_duality and duplicates:
        (c1, a1), (c2, a2) = duplicates[0]
        raise ValueError(
            f"transition duality violated: clause {c1 + 1} at {a1} and "
            f"clause {c2 + 1} at {a2} generate the same transition")

    m0 = 0
    for t in sys.types:
        s0 = sys.init[t.name]
        for u in range(n):
            m0 |= 1 << index[(s0, u)]

    return InstanceNet(sys=sys, n=n, places=tuple(places),
                       place_index=index, transitions=tuple(out), m0=m0,
                       duplicates=tuple(duplicates))


# ---------------------------------------------------------------------------
# Reachability


@dataclass(frozen=True)
class ReachResult:
    markings: tuple   # breadth-first order, m0 first
    marking_set: frozenset


def reachable(net: InstanceNet, cap: int = REACH_CAP) -> ReachResult:
    pres = [t.pre for t in net.transitions]
    posts = [t.post for t in net.transitions]
    order, violated, truncated = _kernels.bfs_reach(
        net.nplaces, pres, posts, net.m0, cap)
    if violated:
        raise OneSafetyViolation(
            "a firing produced a second token on a place")
    if truncated:
        raise ResourceLimitExceeded(
            f"reachability exceeds {cap} markings")
    return ReachResult(markings=tuple(order), marking_set=frozenset(order))


def enabled_transitions(net: InstanceNet, marking: int):
    return tuple(t for t in net.transitions
                 if (marking & t.pre) == t.pre)


def deadlocks(net: InstanceNet, reach: ReachResult):
    return tuple(m for m in reach.markings
                 if not enabled_transitions(net, m))


# ---------------------------------------------------------------------------
# Traps and 1-invariants


def is_trap(net: InstanceNet, w: int) -> bool:
    if w == 0:
        return False
    for t in net.transitions:
        if (w & t.pre) and not (w & t.post):
            return False
    return True


def is_initially_marked(net: InstanceNet, w: int) -> bool:
    return bool(w & net.m0)


def enumerate_traps(net: InstanceNet):
    """All nonempty traps.  Exponential in the place count; refused
    beyond TRAP_ENUM_MAX_PLACES places."""
    if net.nplaces > TRAP_ENUM_MAX_PLACES:
        raise ValueError(
            f"trap enumeration needs at most {TRAP_ENUM_MAX_PLACES} "
            f"places, net has {net.nplaces}")
    pres = [t.pre for t in net.transitions]
    posts = [t.post for t in net.transitions]
    return _kernels.enumerate_traps(net.nplaces, pres, posts)


def is_structural_one_invariant(net: InstanceNet, w: int) -> bool:
    """Exactly one initial token, and every transition either moves one
    token through w, misses it, or consumes two or more of its places
    (so it can never fire while w carries one token)."""
    if (w & net.m0).bit_count() != 1:
        return False
    for t in net.transitions:
        a = (w & t.pre).bit_count()
        if a >= 2:
            continue
        if a != (w & t.post).bit_count():
            return False
    return True


def enumerate_structural_one_invariants(net: InstanceNet):
    if net.nplaces > TRAP_ENUM_MAX_PLACES:
        raise ValueError(
            f"1-invariant enumeration needs at most "
            f"{TRAP_ENUM_MAX_PLACES} places, net has {net.nplaces}")
    pres = [t.pre for t in net.transitions]
    posts = [t.post for t in net.transitions]
    return _kernels.enumerate_one_invariants(net.nplaces, pres, posts,
                                             net.m0)


# ---------------------------------------------------------------------------
# Structures <-> markings


def set_to_structure(net: InstanceNet, w: int, names: dict) -> Structure:
    """Decode a place-set mask into a structure interpreting the given
    state -> variable naming."""
    so = {names[s]: frozenset() for s in net.sys.all_states}
    acc: dict = {s: set() for s in net.sys.all_states}
    for i, (s, u) in enumerate(net.places):
        if (w >> i) & 1:
            acc[s].add(u)
    for s, nodes in acc.items():
        so[names[s]] = frozenset(nodes)
    return Structure(net.n, {}, so)


def marking_to_structure(net: InstanceNet, marking: int,
                         svm) -> Structure:
    return set_to_structure(net, marking, svm.var)


def structure_to_marking(net: InstanceNet, st: Structure, svm) -> int:
    """Encode a structure back into a marking mask; rejects structures
    that are not legal markings of this net."""
    if st.n != net.n:
        raise ValueError(f"structure has {st.n} nodes, net has {net.n}")
    w = 0
    for s in net.sys.all_states:
        name = svm.var[s]
        if name not in st.so:
            raise ValueError(f"structure misses {name!r}")
        for u in st.so[name]:
            w |= 1 << net.place_index[(s, u)]
    for t in net.sys.types:
        for u in range(net.n):
            cnt = sum(1 for s in net.sys.type_states[t.name]
                      if (w >> net.place_index[(s, u)]) & 1)
            if cnt != 1:
                raise ValueError(
                    f"not a marking: node {u} has {cnt} states of "
                    f"type {t.name}")
    return w


def to_dot(net: InstanceNet) -> str:
    lines = ["digraph net {", "  rankdir=LR;"]
    for i, (s, u) in enumerate(net.places):
        marked = ", penwidth=2" if (net.m0 >> i) & 1 else ""
        lines.append(f'  p{i} [shape=circle, label="{s},{u}"{marked}];')
    for k, t in enumerate(net.transitions):
        lines.append(f'  t{k} [shape=box, label="c{t.clause_index + 1}"];')
        for i in range(net.nplaces):
            if (t.pre >> i) & 1:
                lines.append(f"  p{i} -> t{k};")
            if (t.post >> i) & 1:
                lines.append(f"  t{k} -> p{i};")
    lines.append("}")
    return "\n".join(lines) + "\n"
