"""A decision procedure for the word logic over finite words.

Formulas are compiled to deterministic complete track automata: one
track per free variable, a word of length n encodes a structure with
universe {0..n-1}, position u carrying one bit per track.  First-order
tracks are constrained to carry exactly one 1 (the wellformedness
condition); the empty word encodes nothing and is never accepted.

Automata are kept canonical: after every operation the automaton is
minimized and its states renumbered in breadth-first order, so two
automata over the same tracks accept the same language if and only if
they are equal as values.

The compiler works on flattened formulas (succ only inside
succ(x) = y atoms); it flattens its input itself.  The successor is the
clamped one: succ of the last position is the last position.  Use
logic.translate to move ring formulas into this logic first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ._mtbdd import Table
from .logic import (
    App, Bool, Eq, Exists, ExistsSet, First, Forall, ForallSet, Formula,
    Implies, Iff, IsMax, IsZero, Le, Not, And, Or, Structure, Succ, Var,
    eval_ws1s, flatten, free_vars,
)

DEFAULT_MAX_STATES = 10 ** 6


class ResourceLimitExceeded(Exception):
    """Raised when an automaton construction passes the state cap.
    Distinct from any verdict: the caller sees neither sat nor unsat."""


@dataclass(frozen=True)
class TrackAutomaton:
    """Deterministic complete minimized automaton over bit-vector
    letters.  tracks are variable names in sorted order; bit i of a
    letter is the letter's character on tracks[i].  trans[s] is a tuple
    of ((mask, bits), dest) cubes, disjoint and complete."""

    tracks: tuple
    fo_tracks: frozenset
    nstates: int
    initial: int
    accepting: frozenset
    trans: tuple

    def bit(self, name: str) -> int:
        return self.tracks.index(name)

    def step(self, state: int, letter: int) -> int:
        for (mask, bits), dest in self.trans[state]:
            if letter & mask == bits:
                return dest
        raise RuntimeError("incomplete transition table")

    def accepts_word(self, letters) -> bool:
        s = self.initial
        for letter in letters:
            s = self.step(s, letter)
        return s in self.accepting


# ---------------------------------------------------------------------------
# Canonicalization


def _canon(tracks, fo_tracks, nstates, initial, accepting, trans,
           max_states=DEFAULT_MAX_STATES) -> TrackAutomaton:
    """Minimize (Moore refinement with MTBDD signatures) and renumber
    breadth-first, producing the canonical form."""
    if nstates > max_states:
        raise ResourceLimitExceeded(
            f"automaton has {nstates} states, cap is {max_states}")
    ntracks = len(tracks)
    table = Table()

    cls = [1 if s in accepting else 0 for s in range(nstates)]
    while True:
        sig_ids: dict = {}
        new_cls = [0] * nstates
        bdds = []
        for s in range(nstates):
            bdd = table.from_cubes(
                ntracks, [((m, b), cls[d]) for ((m, b), d) in trans[s]],
                default=None)
            bdds.append(bdd)
        for s in range(nstates):
            key = (cls[s], bdds[s])
            if key not in sig_ids:
                sig_ids[key] = len(sig_ids)
            new_cls[s] = sig_ids[key]
        if new_cls == cls:
            break
        cls = new_cls

    # quotient, then breadth-first renumbering from the initial class
    rep: dict = {}
    for s in range(nstates):
        rep.setdefault(cls[s], s)
    order: dict = {cls[initial]: 0}
    queue = [cls[initial]]
    quotient_trans: dict = {}
    qi = 0
    while qi < len(queue):
        c = queue[qi]
        qi += 1
        s = rep[c]
        bdd = table.from_cubes(
            ntracks, [((m, b), cls[d]) for ((m, b), d) in trans[s]],
            default=None)
        cubes = []
        for (m, b, dc) in table.paths(bdd):
            if dc is None:
                raise RuntimeError("transition table has a hole")
            cubes.append(((m, b), dc))
        cubes.sort(key=lambda e: (e[0][0], e[0][1]))
        quotient_trans[c] = cubes
        for (_, dc) in cubes:
            if dc not in order:
                order[dc] = len(order)
                queue.append(dc)

    n = len(order)
    out_trans = [None] * n
    out_acc = set()
    for c, idx in order.items():
        out_trans[idx] = tuple(((m, b), order[d])
                               for ((m, b), d) in quotient_trans[c])
        if rep[c] in accepting:
            out_acc.add(idx)
    return TrackAutomaton(
        tracks=tuple(tracks),
        fo_tracks=frozenset(fo_tracks),
        nstates=n,
        initial=0,
        accepting=frozenset(out_acc),
        trans=tuple(out_trans),
    )


# ---------------------------------------------------------------------------
# Primitive automata
#
# Builders return raw pieces fed through _canon.  All enforce, by
# construction, wellformedness of their first-order tracks and length
# at least one.

def _aut(tracks, fo, trans, initial, accepting, max_states=DEFAULT_MAX_STATES):
    return _canon(tuple(tracks), frozenset(fo), len(trans), initial,
                  frozenset(accepting), tuple(tuple(t) for t in trans),
                  max_states)


def bool_aut(value: bool) -> TrackAutomaton:
    # state 0 initial, state 1 after one or more letters
    trans = [[((0, 0), 1)], [((0, 0), 1)]]
    return _aut((), (), trans, 0, {1} if value else set())


def wf_aut(x: str) -> TrackAutomaton:
    # exactly one 1 on the single track
    trans = [
        [((1, 0), 0), ((1, 1), 1)],
        [((1, 0), 1), ((1, 1), 2)],
        [((0, 0), 2)],
    ]
    return _aut((x,), (x,), trans, 0, {1})


def eq_aut(x: str, y: str) -> TrackAutomaton:
    if x == y:
        return wf_aut(x)
    tracks = tuple(sorted((x, y)))
    bx, by = 1 << tracks.index(x), 1 << tracks.index(y)
    both = bx | by
    trans = [
        [((both, 0), 0), ((both, both), 1), ((both, bx), 2), ((both, by), 2)],
        [((both, 0), 1), ((bx, bx), 2), ((both, by), 2)],
        [((0, 0), 2)],
    ]
    return _aut(tracks, tracks, trans, 0, {1})


def le_aut(x: str, y: str) -> TrackAutomaton:
    if x == y:
        return wf_aut(x)
    tracks = tuple(sorted((x, y)))
    bx, by = 1 << tracks.index(x), 1 << tracks.index(y)
    both = bx | by
    # 0: seen neither; 1: seen x only; 2: seen both; 3: dead
    trans = [
        [((both, 0), 0), ((both, bx), 1), ((both, both), 2), ((both, by), 3)],
        [((both, 0), 1), ((both, by), 2), ((bx, bx), 3)],
        [((both, 0), 2), ((bx, bx), 3), ((by, by), 3)],
        [((0, 0), 3)],
    ]
    return _aut(tracks, tracks, trans, 0, {2})


def app_aut(pred: str, x: str) -> TrackAutomaton:
    if pred == x:
        raise ValueError(f"{pred!r} used both as a set and as a position")
    tracks = tuple(sorted((pred, x)))
    bp, bx = 1 << tracks.index(pred), 1 << tracks.index(x)
    # 0: x not seen; 1: x seen inside pred; 2: dead
    trans = [
        [((bx, 0), 0), ((bx | bp, bx | bp), 1), ((bx | bp, bx), 2)],
        [((bx, 0), 1), ((bx, bx), 2)],
        [((0, 0), 2)],
    ]
    return _aut(tracks, (x,), trans, 0, {1})


def app_first_aut(pred: str) -> TrackAutomaton:
    trans = [
        [((1, 1), 1), ((1, 0), 2)],
        [((0, 0), 1)],
        [((0, 0), 2)],
    ]
    return _aut((pred,), (), trans, 0, {1})


def is_max_aut(x: str) -> TrackAutomaton:
    # x must be the last position
    trans = [
        [((1, 0), 0), ((1, 1), 1)],
        [((0, 0), 2)],
        [((0, 0), 2)],
    ]
    return _aut((x,), (x,), trans, 0, {1})


def is_max_first_aut() -> TrackAutomaton:
    # the first position is the last one: words of length exactly 1
    trans = [
        [((0, 0), 1)],
        [((0, 0), 2)],
        [((0, 0), 2)],
    ]
    return _aut((), (), trans, 0, {1})


def eq_first_aut(x: str) -> TrackAutomaton:
    # x = first position
    trans = [
        [((1, 1), 1), ((1, 0), 2)],
        [((1, 0), 1), ((1, 1), 2)],
        [((0, 0), 2)],
    ]
    return _aut((x,), (x,), trans, 0, {1})


def eq_succ_aut(x: str, y: str) -> TrackAutomaton:
    """succ(x) = y under the clamped successor: either y is right after
    x, or x and y are both the last position."""
    if x == y:
        return is_max_aut(x)
    tracks = tuple(sorted((x, y)))
    bx, by = 1 << tracks.index(x), 1 << tracks.index(y)
    both = bx | by
    # 0: neither seen; 1: x seen one step ago; 2: done (y = x + 1);
    # 3: x and y together, valid only at the end; 4: dead
    trans = [
        [((both, 0), 0), ((both, bx), 1), ((both, both), 3), ((both, by), 4)],
        [((both, by), 2), ((bx, bx), 4), ((both, 0), 4)],
        [((both, 0), 2), ((bx, bx), 4), ((by, by), 4)],
        [((0, 0), 4)],
        [((0, 0), 4)],
    ]
    return _aut(tracks, tracks, trans, 0, {2, 3})


def eq_succ_first_aut(x: str) -> TrackAutomaton:
    # succ(x) = first: impossible unless the universe has one position
    trans = [
        [((1, 1), 1), ((1, 0), 2)],
        [((0, 0), 2)],
        [((0, 0), 2)],
    ]
    return _aut((x,), (x,), trans, 0, {1})


# ---------------------------------------------------------------------------
# Operations


def _expand(cube, posmap):
    mask, bits = cube
    m2 = b2 = 0
    for i, p in enumerate(posmap):
        if (mask >> i) & 1:
            m2 |= 1 << p
            if (bits >> i) & 1:
                b2 |= 1 << p
    return m2, b2


def product(a: TrackAutomaton, b: TrackAutomaton, op,
            max_states=DEFAULT_MAX_STATES) -> TrackAutomaton:
    """Pair construction; acceptance combined with op."""
    tracks = tuple(sorted(set(a.tracks) | set(b.tracks)))
    pos = {t: i for i, t in enumerate(tracks)}
    amap = [pos[t] for t in a.tracks]
    bmap = [pos[t] for t in b.tracks]

    a_exp = [[(_expand(c, amap), d) for (c, d) in row] for row in a.trans]
    b_exp = [[(_expand(c, bmap), d) for (c, d) in row] for row in b.trans]

    ids = {(a.initial, b.initial): 0}
    queue = [(a.initial, b.initial)]
    trans = []
    accepting = set()
    qi = 0
    while qi < len(queue):
        sa, sb = queue[qi]
        qi += 1
        row = []
        for (ma, ba), da in a_exp[sa]:
            for (mb, bb), db in b_exp[sb]:
                if (ba ^ bb) & (ma & mb):
                    continue
                key = (da, db)
                if key not in ids:
                    if len(ids) >= max_states:
                        raise ResourceLimitExceeded(
                            f"product exceeds {max_states} states")
                    ids[key] = len(ids)
                    queue.append(key)
                row.append(((ma | mb, ba | bb), ids[key]))
        trans.append(row)
        if op(sa in a.accepting, sb in b.accepting):
            accepting.add(ids[(sa, sb)])
    return _canon(tracks, a.fo_tracks | b.fo_tracks, len(trans), 0,
                  frozenset(accepting), tuple(tuple(r) for r in trans),
                  max_states)


def _restrict(aut: TrackAutomaton, max_states=DEFAULT_MAX_STATES) -> TrackAutomaton:
    """Re-impose wellformedness of every first-order track and reject
    the empty word."""
    out = product(aut, bool_aut(True), lambda p, q: p and q, max_states)
    for t in sorted(aut.fo_tracks):
        out = product(out, wf_aut(t), lambda p, q: p and q, max_states)
    return out


def complement(aut: TrackAutomaton,
               max_states=DEFAULT_MAX_STATES) -> TrackAutomaton:
    flipped = TrackAutomaton(
        tracks=aut.tracks,
        fo_tracks=aut.fo_tracks,
        nstates=aut.nstates,
        initial=aut.initial,
        accepting=frozenset(range(aut.nstates)) - aut.accepting,
        trans=aut.trans,
    )
    return _restrict(flipped, max_states)


def _drop_bit(cube, k):
    mask, bits = cube
    low = (1 << k) - 1
    m2 = (mask & low) | ((mask >> 1) & ~low)
    b2 = (bits & low) | ((bits >> 1) & ~low)
    return m2, b2


def project(aut: TrackAutomaton, name: str,
            max_states=DEFAULT_MAX_STATES) -> TrackAutomaton:
    """Existential projection: drop the track, determinize, restore the
    invariants on the remaining tracks."""
    if name not in aut.tracks:
        return aut
    k = aut.tracks.index(name)
    tracks = tuple(t for t in aut.tracks if t != name)
    fo = aut.fo_tracks - {name}
    nvars = len(tracks)

    table = Table()
    empty = frozenset()
    state_fn = []
    for row in aut.trans:
        acc = table.const(empty)
        for (cube, dest) in row:
            one = table.from_cubes(nvars, [(_drop_bit(cube, k),
                                            frozenset((dest,)))], empty)
            acc = table.apply2(lambda u, v: u | v, acc, one)
        state_fn.append(acc)

    start = frozenset((aut.initial,))
    ids = {start: 0}
    queue = [start]
    trans = []
    accepting = set()
    qi = 0
    while qi < len(queue):
        subset = queue[qi]
        qi += 1
        fn = table.const(empty)
        for s in sorted(subset):
            fn = table.apply2(lambda u, v: u | v, fn, state_fn[s])
        row = []
        for (m, b, dests) in table.paths(fn):
            if dests not in ids:
                if len(ids) >= max_states:
                    raise ResourceLimitExceeded(
                        f"projection exceeds {max_states} states")
                ids[dests] = len(ids)
                queue.append(dests)
            row.append(((m, b), ids[dests]))
        row.sort(key=lambda e: (e[0][0], e[0][1]))
        trans.append(row)
        if subset & aut.accepting:
            accepting.add(ids[subset])
    raw = _canon(tracks, fo, len(trans), 0, frozenset(accepting),
                 tuple(tuple(r) for r in trans), max_states)
    return _restrict(raw, max_states)


# ---------------------------------------------------------------------------
# Compilation


def _term_kind(t):
    if isinstance(t, Var):
        return ("var", t.name)
    if isinstance(t, First):
        return ("first", None)
    raise ValueError(f"term not flat: {t!r}")


def compile_formula(f: Formula, max_states: int = DEFAULT_MAX_STATES
                    ) -> TrackAutomaton:
    fo, so = free_vars(f)
    clash = fo & so
    if clash:
        raise ValueError(
            f"{sorted(clash)[0]!r} is used both as a position and as a set")
    f = flatten(f)

    def conj(a, b):
        return product(a, b, lambda p, q: p and q, max_states)

    def rec(g: Formula) -> TrackAutomaton:
        if isinstance(g, Bool):
            return bool_aut(g.value)
        if isinstance(g, Eq):
            left, right = g.left, g.right
            if isinstance(right, Succ) and not isinstance(left, Succ):
                left, right = right, left
            if isinstance(left, Succ):
                x = left.arg
                if not isinstance(x, Var):
                    raise ValueError("succ of a constant cannot be compiled")
                rk = _term_kind(right)
                if rk[0] == "first":
                    return eq_succ_first_aut(x.name)
                return eq_succ_aut(x.name, rk[1])
            lk, rk = _term_kind(left), _term_kind(right)
            if lk[0] == "first" and rk[0] == "first":
                return bool_aut(True)
            if lk[0] == "first":
                return eq_first_aut(rk[1])
            if rk[0] == "first":
                return eq_first_aut(lk[1])
            return eq_aut(lk[1], rk[1])
        if isinstance(g, Le):
            lk, rk = _term_kind(g.left), _term_kind(g.right)
            if lk[0] == "first" and rk[0] == "first":
                return bool_aut(True)
            if lk[0] == "first":
                return wf_aut(rk[1])
            if rk[0] == "first":
                return eq_first_aut(lk[1])
            return le_aut(lk[1], rk[1])
        if isinstance(g, App):
            ak = _term_kind(g.arg)
            if ak[0] == "first":
                return app_first_aut(g.pred)
            return app_aut(g.pred, ak[1])
        if isinstance(g, IsZero):
            ak = _term_kind(g.arg)
            if ak[0] == "first":
                return bool_aut(True)
            return eq_first_aut(ak[1])
        if isinstance(g, IsMax):
            ak = _term_kind(g.arg)
            if ak[0] == "first":
                return is_max_first_aut()
            return is_max_aut(ak[1])
        if isinstance(g, Not):
            return complement(rec(g.body), max_states)
        if isinstance(g, And):
            out = rec(g.parts[0])
            for p in g.parts[1:]:
                out = conj(out, rec(p))
            return out
        if isinstance(g, Or):
            out = rec(g.parts[0])
            for p in g.parts[1:]:
                out = product(out, rec(p), lambda a, b: a or b, max_states)
            return _restrict(out, max_states)
        if isinstance(g, Implies):
            out = product(rec(g.left), rec(g.right),
                          lambda a, b: (not a) or b, max_states)
            return _restrict(out, max_states)
        if isinstance(g, Iff):
            out = product(rec(g.left), rec(g.right),
                          lambda a, b: a == b, max_states)
            return _restrict(out, max_states)
        if isinstance(g, (Exists, ExistsSet)):
            names = []
            while isinstance(g, (Exists, ExistsSet)):
                names.append(g.var)
                g = g.body
            out = rec(g)
            for name in names:
                out = project(out, name, max_states)
            return out
        if isinstance(g, (Forall, ForallSet)):
            names = []
            while isinstance(g, (Forall, ForallSet)):
                names.append(g.var)
                g = g.body
            out = complement(rec(g), max_states)
            for name in names:
                out = project(out, name, max_states)
            return complement(out, max_states)
        raise TypeError(f"not a formula: {g!r}")

    return rec(f)


# ---------------------------------------------------------------------------
# Deciding


@dataclass
class DecideResult:
    sat: bool
    witness: Optional[Structure]
    states: int


def _decode(aut: TrackAutomaton, letters) -> Structure:
    n = len(letters)
    fo = {}
    so = {}
    for i, name in enumerate(aut.tracks):
        positions = [u for u, letter in enumerate(letters)
                     if (letter >> i) & 1]
        if name in aut.fo_tracks:
            if len(positions) != 1:
                raise RuntimeError(
                    f"witness track {name!r} is not a singleton")
            fo[name] = positions[0]
        else:
            so[name] = frozenset(positions)
    return Structure(n, fo, so)


def decide(f: Formula, min_universe: int = 1,
           max_states: int = DEFAULT_MAX_STATES) -> DecideResult:
    """Search for a smallest model of f with universe size at least
    min_universe.  The witness, when found, is re-evaluated under the
    word semantics as a soundness cross-check."""
    if min_universe < 1:
        raise ValueError("min_universe must be at least 1")
    aut = compile_formula(f, max_states)
    m = min_universe

    start = (aut.initial, 0)
    parents: dict = {start: None}
    queue = [start]
    goal = None
    qi = 0
    while qi < len(queue):
        state, cnt = queue[qi]
        qi += 1
        if state in aut.accepting and cnt == m:
            goal = (state, cnt)
            break
        for (mask, bits), dest in aut.trans[state]:
            key = (dest, min(cnt + 1, m))
            if key not in parents:
                parents[key] = ((state, cnt), bits)
                queue.append(key)
    if goal is None:
        return DecideResult(sat=False, witness=None, states=aut.nstates)

    letters = []
    node = goal
    while parents[node] is not None:
        node, bits = parents[node]
        letters.append(bits)
    letters.reverse()
    st = _decode(aut, letters)
    if not eval_ws1s(f, st):
        raise RuntimeError(
            "internal error: decoded witness fails re-evaluation")
    return DecideResult(sat=True, witness=st, states=aut.nstates)


def accepts(aut: TrackAutomaton, st: Structure) -> bool:
    """Run the automaton on the word encoding of the structure."""
    letters = []
    for u in range(st.n):
        letter = 0
        for i, name in enumerate(aut.tracks):
            if name in aut.fo_tracks:
                if name not in st.fo:
                    raise KeyError(f"structure misses position var {name!r}")
                if st.fo[name] == u:
                    letter |= 1 << i
            else:
                if name not in st.so:
                    raise KeyError(f"structure misses set symbol {name!r}")
                if u in st.so[name]:
                    letter |= 1 << i
        letters.append(letter)
    return aut.accepts_word(letters)


def equivalent(f: Formula, g: Formula,
               max_states: int = DEFAULT_MAX_STATES) -> bool:
    """Language equality of two formulas over the same free variables.
    Canonical automata make this a structural comparison."""
    if free_vars(f) != free_vars(g):
        raise ValueError("equivalence needs identical free variables")
    af = compile_formula(f, max_states)
    ag = compile_formula(g, max_states)
    return af == ag


# ---------------------------------------------------------------------------
# Inspection


def _cube_str(cube, ntracks: int) -> str:
    mask, bits = cube
    if ntracks == 0:
        return "()"
    out = []
    for i in range(ntracks):
        if (mask >> i) & 1:
            out.append("1" if (bits >> i) & 1 else "0")
        else:
            out.append("-")
    return "".join(out)


def dump(aut: TrackAutomaton) -> str:
    lines = []
    lines.append("tracks: " + (" ".join(aut.tracks) if aut.tracks else "(none)"))
    lines.append("fo: " + (" ".join(sorted(aut.fo_tracks))
                           if aut.fo_tracks else "(none)"))
    lines.append(f"states: {aut.nstates}")
    lines.append(f"initial: {aut.initial}")
    lines.append("accepting: " +
                 (" ".join(str(s) for s in sorted(aut.accepting))
                  if aut.accepting else "(none)"))
    nt = len(aut.tracks)
    for s in range(aut.nstates):
        for (cube, dest) in aut.trans[s]:
            lines.append(f"  {s} {_cube_str(cube, nt)} -> {dest}")
    return "\n".join(lines) + "\n"


def to_dot(aut: TrackAutomaton, name: str = "aut") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;",
             '  hidden [shape=point, style=invis];']
    for s in range(aut.nstates):
        shape = "doublecircle" if s in aut.accepting else "circle"
        lines.append(f'  {s} [shape={shape}];')
    lines.append(f"  hidden -> {aut.initial};")
    nt = len(aut.tracks)
    for s in range(aut.nstates):
        for (cube, dest) in aut.trans[s]:
            lines.append(f'  {s} -> {dest} [label="{_cube_str(cube, nt)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
