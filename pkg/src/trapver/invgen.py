"""Generation of the parameterized invariant formulas.

From a validated system this module builds, purely syntactically, the
word-logic formulas used for verification: the trap predicate and trap
invariant, the marking/initially/intersection helpers, a deadlock
property, the 1-invariant (flow) predicate and invariant, and the final
decision formula.

Naming: every state s gets a set variable X_s plus a primed copy X_s'.
A marking interprets the unprimed family; candidate place sets (traps,
flows) live in the primed one.  All public generators return formulas
in the word logic (flattened, ring successor translated); composition
happens after translation, which is sound because the translation is
local to atoms.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .logic import (
    App, Eq, Exists, Forall, Formula, Var,
    TRUE, flatten, forall, forall_set, free_vars,
    implies, land, lnot, lor, rename_preds, rename_var, translate,
)
from .syntax import BroadcastDecl, ClauseDecl, ValidatedSystem


# ---------------------------------------------------------------------------
# State variables


@dataclass(frozen=True)
class StateVariableMap:
    """Bijection between states and set variables, with primed copies."""

    sys: ValidatedSystem
    var: dict     # state -> X_<state>
    primed: dict  # state -> X_<state>'

    @property
    def states(self) -> tuple:
        return self.sys.all_states

    def prime_table(self) -> dict:
        return {self.var[s]: self.primed[s] for s in self.states}


def state_variable_map(sys: ValidatedSystem) -> StateVariableMap:
    var = {s: f"X_{s}" for s in sys.all_states}
    primed = {s: f"X_{s}'" for s in sys.all_states}
    return StateVariableMap(sys, var, primed)


def _ws(f: Formula) -> Formula:
    return translate(flatten(f))


# ---------------------------------------------------------------------------
# Clause normalization


@dataclass(frozen=True)
class NormalizedSystem(ValidatedSystem):
    """A validated system whose clauses carry at most one broadcast per
    port, with broadcast guards excluding same-port rendezvous indices."""

    changed: bool = False


def normalize_clauses(sys: ValidatedSystem) -> NormalizedSystem:
    """Merge same-port broadcasts into one (disjoined guards) and
    exclude the indices of same-port rendezvous atoms from broadcast
    guards.  Instance semantics are preserved: the excluded node was
    already a participant through the rendezvous atom, and a merged
    broadcast reaches the union of the original receiver sets."""
    changed = False
    new_clauses = []
    for cl in sys.clauses:
        merged: dict = {}
        order: list = []
        for b in cl.broadcasts:
            if b.port in merged:
                prev = merged[b.port]
                guard = lor(prev.guard,
                            rename_var(b.guard, b.var, prev.var))
                merged[b.port] = BroadcastDecl(b.port, prev.var, guard,
                                               prev.pos)
                changed = True
            else:
                merged[b.port] = b
                order.append(b.port)
        out = []
        for port in order:
            b = merged[port]
            same_port_vars = [v for (p, v) in cl.rendezvous if p == port]
            guard = b.guard
            for v in same_port_vars:
                excl = lnot(Eq(Var(b.var), Var(v)))
                guard = land(guard, excl)
                changed = True
            out.append(BroadcastDecl(b.port, b.var, guard, b.pos))
        new_clauses.append(ClauseDecl(cl.bound_vars, cl.guard,
                                      cl.rendezvous, tuple(out), cl.pos))
    if isinstance(sys, NormalizedSystem):
        base = sys
    else:
        base = NormalizedSystem(**{f: getattr(sys, f) for f in (
            "spec", "types", "all_states", "state_type", "port_type",
            "pre", "post", "init", "type_states", "clauses", "properties")})
    return replace(base, clauses=tuple(new_clauses), changed=changed)


# ---------------------------------------------------------------------------
# Internal ring-logic builders (translated once at the public surface)


def _state_of(sys, port: str, which: str) -> str:
    return sys.pre[port] if which == "pre" else sys.post[port]


def _intersects_body(sys, cl: ClauseDecl, m: StateVariableMap,
                     which: str) -> Formula:
    parts = [App(m.var[_state_of(sys, p, which)], Var(v))
             for (p, v) in cl.rendezvous]
    for b in cl.broadcasts:
        parts.append(Exists(b.var, land(
            b.guard, App(m.var[_state_of(sys, b.port, which)], Var(b.var)))))
    return lor(*parts)


def _fresh_name(taken, base: str = "y") -> str:
    if base not in taken:
        return base
    k = 0
    while f"{base}{k}" in taken:
        k += 1
    return f"{base}{k}"


def _unique_ex(sys, cl, m, which):
    """Exactly one rendezvous atom contributes a place of the candidate
    set (repeated ports must agree on the node)."""
    atoms = list(cl.rendezvous)
    out = []
    for i, (p, v) in enumerate(atoms):
        conj = [App(m.var[_state_of(sys, p, which)], Var(v))]
        for o, (p2, v2) in enumerate(atoms):
            if o == i:
                continue
            a2 = App(m.var[_state_of(sys, p2, which)], Var(v2))
            if p2 != p:
                conj.append(lnot(a2))
            else:
                conj.append(implies(a2, Eq(Var(v), Var(v2))))
        out.append(land(*conj))
    return lor(*out)


def _disjoint_ex(sys, cl, m, which):
    return land(*[lnot(App(m.var[_state_of(sys, p, which)], Var(v)))
                  for (p, v) in cl.rendezvous])


def _disjoint_broadcast(sys, cl, m, which, y: str):
    if not cl.broadcasts:
        return TRUE
    parts = []
    for b in cl.broadcasts:
        g = rename_var(b.guard, b.var, y)
        parts.append(implies(
            g, lnot(App(m.var[_state_of(sys, b.port, which)], Var(y)))))
    return Forall(y, land(*parts))


def _unique_broadcast(sys, cl, m, which, y: str):
    out = []
    for j, b in enumerate(cl.broadcasts):
        sv = m.var[_state_of(sys, b.port, which)]
        uniq = implies(land(rename_var(b.guard, b.var, y), App(sv, Var(y))),
                       Eq(Var(y), Var(b.var)))
        others = []
        for o, b2 in enumerate(cl.broadcasts):
            if o == j:
                continue
            sv2 = m.var[_state_of(sys, b2.port, which)]
            others.append(implies(rename_var(b2.guard, b2.var, y),
                                  lnot(App(sv2, Var(y)))))
        body = land(b.guard, App(sv, Var(b.var)),
                    Forall(y, land(uniq, *others)))
        out.append(Exists(b.var, body))
    return lor(*out)


def _unique(sys, cl, m, which, y: str):
    return lor(
        land(_unique_ex(sys, cl, m, which),
             _disjoint_broadcast(sys, cl, m, which, y)),
        land(_unique_broadcast(sys, cl, m, which, y),
             _disjoint_ex(sys, cl, m, which)))


def _unique_initially(m: StateVariableMap):
    inits = [(t.name, m.var[m.sys.init[t.name]]) for t in m.sys.types]
    x, y = "x", "y"
    one = lor(*[land(App(v, Var(x)),
                     *[lnot(App(v2, Var(x)))
                       for (t2, v2) in inits if t2 != tn])
                for (tn, v) in inits])
    any_y = lor(*[App(v, Var(y)) for (_, v) in inits])
    return Exists(x, land(one, Forall(y, implies(any_y,
                                                 Eq(Var(x), Var(y))))))


def _unique_intersection(m: StateVariableMap):
    x, y = "x", "y"

    def both(s, t):
        return land(App(m.var[s], t), App(m.primed[s], t))

    states = list(m.states)
    one = lor(*[land(both(q, Var(x)),
                     *[lnot(both(p, Var(x))) for p in states if p != q])
                for q in states])
    any_y = lor(*[both(q, Var(y)) for q in states])
    return Exists(x, land(one, Forall(y, implies(any_y,
                                                 Eq(Var(x), Var(y))))))


# ---------------------------------------------------------------------------
# Public generators


def gen_intersects_pre(cl: ClauseDecl, m: StateVariableMap) -> Formula:
    """The candidate set meets the clause's pre-places; open over the
    clause's bound variables and X̄."""
    return _ws(_intersects_body(m.sys, cl, m, "pre"))


def gen_intersects_post(cl: ClauseDecl, m: StateVariableMap) -> Formula:
    return _ws(_intersects_body(m.sys, cl, m, "post"))


def gen_trappred(sys, m: StateVariableMap) -> Formula:
    """X̄ is a trap: for every clause instance, meeting the pre-places
    forces meeting the post-places."""
    parts = []
    for cl in sys.clauses:
        body = implies(land(cl.guard, _intersects_body(sys, cl, m, "pre")),
                       _intersects_body(sys, cl, m, "post"))
        parts.append(forall(cl.bound_vars, body))
    return _ws(land(*parts))


def gen_marking(m: StateVariableMap) -> Formula:
    """X̄ encodes a marking: each node is in exactly one state per
    component type."""
    x = "x"
    per_type = []
    for t in m.sys.types:
        states = m.sys.type_states[t.name]
        alts = [land(App(m.var[s], Var(x)),
                     *[lnot(App(m.var[s2], Var(x)))
                       for s2 in states if s2 != s])
                for s in states]
        per_type.append(lor(*alts))
    return _ws(Forall(x, land(*per_type)))


def gen_initially(m: StateVariableMap) -> Formula:
    """X̄ contains an initially marked place."""
    x = "x"
    return _ws(Exists(x, lor(*[App(m.var[m.sys.init[t.name]], Var(x))
                               for t in m.sys.types])))


def gen_intersection(m: StateVariableMap) -> Formula:
    """The unprimed and primed families share a place."""
    x = "x"
    return _ws(Exists(x, lor(*[land(App(m.var[s], Var(x)),
                                    App(m.primed[s], Var(x)))
                               for s in m.states])))


def gen_trap_invariant(sys, m: StateVariableMap) -> Formula:
    """Every initially marked trap (quantified as X̄') intersects X̄."""
    prime = m.prime_table()
    trap_p = rename_preds(gen_trappred(sys, m), prime)
    init_p = rename_preds(gen_initially(m), prime)
    body = implies(land(trap_p, init_p), gen_intersection(m))
    return forall_set(sorted(prime.values()), body)


def gen_deadlock_property(sys, m: StateVariableMap) -> Formula:
    """No clause instance is enabled: for every guard-satisfying tuple,
    some pre-place is unmarked (a broadcast blocks if some receiver
    satisfying its guard is not in the port's pre-state)."""
    parts = []
    for cl in sys.clauses:
        ready = [App(m.var[sys.pre[p]], Var(v)) for (p, v) in cl.rendezvous]
        for b in cl.broadcasts:
            ready.append(Forall(b.var, implies(
                b.guard, App(m.var[sys.pre[b.port]], Var(b.var)))))
        parts.append(forall(cl.bound_vars,
                            implies(cl.guard, lnot(land(*ready)))))
    return _ws(land(*parts))


def gen_flowpred(sys_norm: NormalizedSystem, m: StateVariableMap) -> Formula:
    """X̄ is (structurally) a 1-invariant: it holds exactly one
    initially marked place, and every clause instance either misses it
    entirely, moves exactly one token through it, or consumes at least
    two of its places (and so can never fire with one token on it)."""
    if not isinstance(sys_norm, NormalizedSystem):
        raise ValueError("gen_flowpred needs a normalized system; "
                         "call normalize_clauses first")
    parts = [_unique_initially(m)]
    for cl in sys_norm.clauses:
        taken = set(cl.bound_vars) | {b.var for b in cl.broadcasts}
        taken |= {"x"}
        y = _fresh_name(taken)
        pre_i = _intersects_body(sys_norm, cl, m, "pre")
        post_i = _intersects_body(sys_norm, cl, m, "post")
        u_pre = _unique(sys_norm, cl, m, "pre", y)
        u_post = _unique(sys_norm, cl, m, "post", y)
        three_way = lor(
            land(lnot(pre_i), lnot(post_i)),
            land(u_pre, u_post),
            land(pre_i, lnot(u_pre)))
        parts.append(forall(cl.bound_vars, implies(cl.guard, three_way)))
    return _ws(land(*parts))


def gen_flow_invariant(sys_norm: NormalizedSystem,
                       m: StateVariableMap) -> Formula:
    """Every 1-invariant candidate (quantified as X̄') meets X̄ in
    exactly one place."""
    prime = m.prime_table()
    flow_p = rename_preds(gen_flowpred(sys_norm, m), prime)
    body = implies(flow_p, _ws(_unique_intersection(m)))
    return forall_set(sorted(prime.values()), body)


def state_property(m: StateVariableMap, f: Formula) -> Formula:
    """Lift a surface property (over state names) to the word logic
    over the X̄ variables."""
    _, so = free_vars(f)
    bad = so - set(m.var)
    if bad:
        raise ValueError(f"property uses unknown state {sorted(bad)[0]!r}")
    return _ws(rename_preds(f, dict(m.var)))


def gen_decision_formula(sys, prop: Formula, use_flow: bool,
                         m: StateVariableMap) -> Formula:
    """marking ∧ trap-invariant ∧ [flow-invariant] ∧ ¬property, with X̄
    free; satisfiability = existence of a counterexample candidate."""
    fo, so = free_vars(prop)
    if fo:
        raise ValueError(f"property must be closed; {sorted(fo)[0]!r} "
                         f"is free")
    known = set(m.var.values())
    bad = so - known
    if bad:
        raise ValueError(
            f"property references unknown state variable {sorted(bad)[0]!r}")
    target = sys
    if use_flow and not isinstance(sys, NormalizedSystem):
        target = normalize_clauses(sys)
    parts = [gen_marking(m), gen_trap_invariant(target, m)]
    if use_flow:
        parts.append(gen_flow_invariant(target, m))
    parts.append(lnot(prop))
    return land(*parts)
