"""Terms, formulas and finite-structure evaluation for the two logics.

The index logic (IL) speaks about node indices of a ring universe
{0..n-1}: terms are variables under iterated succ, atoms compare terms
or apply a monadic predicate to a term, and succ wraps around modulo n.

The word logic (WS) reads the same syntax over finite words: the
universe is the set of word positions, succ of the last position is the
last position itself (self-loop convention), `first` denotes position 0
and max(x) holds iff x is the last position.  Set quantifiers are only
available in the word logic.

Both logics share one AST.  `eval_il` and `eval_ws1s` fix the flavor.
`flatten` and `translate` implement the IL-to-WS reduction: flatten
rewrites nested succ applications into chains of succ(x) = y atoms with
fresh variables, translate maps the wrap-around successor onto the
self-loop one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional


# ---------------------------------------------------------------------------
# Terms


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str

    def __repr__(self):
        return f"Var({self.name!r})"


@dataclass(frozen=True)
class First(Term):
    """The first position of the word (word logic only)."""

    def __repr__(self):
        return "First()"


@dataclass(frozen=True)
class Succ(Term):
    arg: Term

    def __repr__(self):
        return f"Succ({self.arg!r})"


def succ_depth(t: Term) -> int:
    d = 0
    while isinstance(t, Succ):
        d += 1
        t = t.arg
    return d


def term_base(t: Term) -> Term:
    """The variable or constant under a stack of succ applications."""
    while isinstance(t, Succ):
        t = t.arg
    return t


# ---------------------------------------------------------------------------
# Formulas


class Formula:
    __slots__ = ()

    # convenience connective builders, used heavily by the generators
    def __and__(self, other: "Formula") -> "Formula":
        return land(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return lor(self, other)

    def __invert__(self) -> "Formula":
        return lnot(self)


@dataclass(frozen=True)
class Bool(Formula):
    value: bool


TRUE = Bool(True)
FALSE = Bool(False)


@dataclass(frozen=True)
class Le(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class App(Formula):
    """Monadic predicate application: a port, a state or a set variable."""

    pred: str
    arg: Term


@dataclass(frozen=True)
class IsZero(Formula):
    """Derived atom: the term denotes index 0 (forall y . t <= y)."""

    arg: Term


@dataclass(frozen=True)
class IsMax(Formula):
    """Derived atom: the term denotes the last index (forall y . y <= t)."""

    arg: Term


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    parts: tuple


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class ExistsSet(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class ForallSet(Formula):
    var: str
    body: Formula


# smart constructors ---------------------------------------------------------


def land(*parts: Formula) -> Formula:
    flat = []
    for p in parts:
        if isinstance(p, Bool):
            if not p.value:
                return FALSE
            continue
        if isinstance(p, And):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def lor(*parts: Formula) -> Formula:
    flat = []
    for p in parts:
        if isinstance(p, Bool):
            if p.value:
                return TRUE
            continue
        if isinstance(p, Or):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def lnot(f: Formula) -> Formula:
    if isinstance(f, Bool):
        return Bool(not f.value)
    if isinstance(f, Not):
        return f.body
    return Not(f)


def implies(a: Formula, b: Formula) -> Formula:
    if isinstance(a, Bool):
        return b if a.value else TRUE
    if isinstance(b, Bool) and b.value:
        return TRUE
    return Implies(a, b)


def iff(a: Formula, b: Formula) -> Formula:
    return Iff(a, b)


def exists(names, body: Formula) -> Formula:
    if isinstance(names, str):
        names = [names]
    for name in reversed(list(names)):
        body = Exists(name, body)
    return body


def forall(names, body: Formula) -> Formula:
    if isinstance(names, str):
        names = [names]
    for name in reversed(list(names)):
        body = Forall(name, body)
    return body


def exists_set(names, body: Formula) -> Formula:
    if isinstance(names, str):
        names = [names]
    for name in reversed(list(names)):
        body = ExistsSet(name, body)
    return body


def forall_set(names, body: Formula) -> Formula:
    if isinstance(names, str):
        names = [names]
    for name in reversed(list(names)):
        body = ForallSet(name, body)
    return body


# ---------------------------------------------------------------------------
# Free variables


def free_vars(f: Formula) -> tuple:
    """Free (position, set) variable names of f, as a pair of frozensets.

    Monadic predicate symbols count as set variables: in IL formulas they
    are the ports, in WS formulas the set variables proper.
    """
    fo: set = set()
    so: set = set()

    def term(t: Term, bound: frozenset):
        base = term_base(t)
        if isinstance(base, Var) and base.name not in bound:
            fo.add(base.name)

    def walk(g: Formula, bfo: frozenset, bso: frozenset):
        if isinstance(g, Bool):
            return
        if isinstance(g, (Le, Eq)):
            term(g.left, bfo)
            term(g.right, bfo)
        elif isinstance(g, App):
            if g.pred not in bso:
                so.add(g.pred)
            term(g.arg, bfo)
        elif isinstance(g, (IsZero, IsMax)):
            term(g.arg, bfo)
        elif isinstance(g, Not):
            walk(g.body, bfo, bso)
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p, bfo, bso)
        elif isinstance(g, (Implies, Iff)):
            walk(g.left, bfo, bso)
            walk(g.right, bfo, bso)
        elif isinstance(g, (Exists, Forall)):
            walk(g.body, bfo | {g.var}, bso)
        elif isinstance(g, (ExistsSet, ForallSet)):
            walk(g.body, bfo, bso | {g.var})
        else:
            raise TypeError(f"not a formula: {g!r}")

    walk(f, frozenset(), frozenset())
    return frozenset(fo), frozenset(so)


def rename_var(f: Formula, old: str, new: str) -> Formula:
    """Rename a free position variable.  Only safe on quantifier-free
    formulas or when `new` is not captured; callers use it on clause
    guards, which are quantifier-free."""

    def term(t: Term) -> Term:
        if isinstance(t, Succ):
            return Succ(term(t.arg))
        if isinstance(t, Var) and t.name == old:
            return Var(new)
        return t

    def walk(g: Formula) -> Formula:
        if isinstance(g, Bool):
            return g
        if isinstance(g, Le):
            return Le(term(g.left), term(g.right))
        if isinstance(g, Eq):
            return Eq(term(g.left), term(g.right))
        if isinstance(g, App):
            return App(g.pred, term(g.arg))
        if isinstance(g, IsZero):
            return IsZero(term(g.arg))
        if isinstance(g, IsMax):
            return IsMax(term(g.arg))
        if isinstance(g, Not):
            return Not(walk(g.body))
        if isinstance(g, And):
            return And(tuple(walk(p) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(walk(p) for p in g.parts))
        if isinstance(g, Implies):
            return Implies(walk(g.left), walk(g.right))
        if isinstance(g, Iff):
            return Iff(walk(g.left), walk(g.right))
        if isinstance(g, (Exists, Forall)):
            if g.var == old:
                return g
            if g.var == new:
                raise ValueError(f"rename would capture {new!r}")
            return type(g)(g.var, walk(g.body))
        if isinstance(g, (ExistsSet, ForallSet)):
            return type(g)(g.var, walk(g.body))
        raise TypeError(f"not a formula: {g!r}")

    return walk(f)


def rename_preds(f: Formula, table: Mapping[str, str]) -> Formula:
    """Rename monadic predicate symbols (used to map states onto set
    variables and to build primed copies)."""

    def walk(g: Formula) -> Formula:
        if isinstance(g, (Bool, Le, Eq, IsZero, IsMax)):
            return g
        if isinstance(g, App):
            return App(table.get(g.pred, g.pred), g.arg)
        if isinstance(g, Not):
            return Not(walk(g.body))
        if isinstance(g, And):
            return And(tuple(walk(p) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(walk(p) for p in g.parts))
        if isinstance(g, Implies):
            return Implies(walk(g.left), walk(g.right))
        if isinstance(g, Iff):
            return Iff(walk(g.left), walk(g.right))
        if isinstance(g, (Exists, Forall)):
            return type(g)(g.var, walk(g.body))
        if isinstance(g, (ExistsSet, ForallSet)):
            if g.var in table:
                raise ValueError(f"predicate rename hits bound set {g.var!r}")
            return type(g)(g.var, walk(g.body))
        raise TypeError(f"not a formula: {g!r}")

    return walk(f)


# ---------------------------------------------------------------------------
# Structures


@dataclass
class Structure:
    """A finite interpretation: universe {0..n-1}, position values for
    first-order variables, subsets for set variables and predicates."""

    n: int
    fo: dict = field(default_factory=dict)
    so: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("universe size must be at least 1")

    def with_fo(self, name: str, value: int) -> "Structure":
        fo = dict(self.fo)
        fo[name] = value
        return Structure(self.n, fo, self.so)

    def with_so(self, name: str, value) -> "Structure":
        so = dict(self.so)
        so[name] = frozenset(value)
        return Structure(self.n, self.fo, so)


def structures(n: int, fo_names=(), so_names=()) -> Iterator[Structure]:
    """All structures of universe size n over the given variable names."""
    fo_names = sorted(fo_names)
    so_names = sorted(so_names)
    subsets = [frozenset(s) for k in range(n + 1)
               for s in itertools.combinations(range(n), k)]
    for fo_vals in itertools.product(range(n), repeat=len(fo_names)):
        for so_vals in itertools.product(subsets, repeat=len(so_names)):
            yield Structure(n, dict(zip(fo_names, fo_vals)),
                            dict(zip(so_names, so_vals)))


# ---------------------------------------------------------------------------
# Evaluation
#
# Formulas are compiled once to nested closures over slot arrays: F holds
# position values, S holds set values as bit masks.  The compiled form is
# cached per formula identity, which makes the big second-order
# enumerations in the test oracles affordable.


class _Compiler:
    def __init__(self, flavor: str):
        self.flavor = flavor  # "il" or "ws"
        self.nf = 0
        self.ns = 0

    def fo_slot(self) -> int:
        s = self.nf
        self.nf += 1
        return s

    def so_slot(self) -> int:
        s = self.ns
        self.ns += 1
        return s

    def term(self, t: Term, fsc: Mapping[str, int]):
        if isinstance(t, Var):
            slot = fsc[t.name]
            return lambda n, F, S: F[slot]
        if isinstance(t, First):
            if self.flavor != "ws":
                raise ValueError("first is a word-logic constant")
            return lambda n, F, S: 0
        if isinstance(t, Succ):
            inner = self.term(t.arg, fsc)
            if self.flavor == "il":
                return lambda n, F, S: (inner(n, F, S) + 1) % n
            return lambda n, F, S: min(inner(n, F, S) + 1, n - 1)
        raise TypeError(f"not a term: {t!r}")

    def compile(self, f: Formula, fsc: Mapping[str, int], ssc: Mapping[str, int]):
        if isinstance(f, Bool):
            v = f.value
            return lambda n, F, S: v
        if isinstance(f, Le):
            a, b = self.term(f.left, fsc), self.term(f.right, fsc)
            return lambda n, F, S: a(n, F, S) <= b(n, F, S)
        if isinstance(f, Eq):
            a, b = self.term(f.left, fsc), self.term(f.right, fsc)
            return lambda n, F, S: a(n, F, S) == b(n, F, S)
        if isinstance(f, App):
            slot = ssc[f.pred]
            a = self.term(f.arg, fsc)
            return lambda n, F, S: (S[slot] >> a(n, F, S)) & 1 == 1
        if isinstance(f, IsZero):
            a = self.term(f.arg, fsc)
            return lambda n, F, S: a(n, F, S) == 0
        if isinstance(f, IsMax):
            a = self.term(f.arg, fsc)
            return lambda n, F, S: a(n, F, S) == n - 1
        if isinstance(f, Not):
            b = self.compile(f.body, fsc, ssc)
            return lambda n, F, S: not b(n, F, S)
        if isinstance(f, And):
            parts = [self.compile(p, fsc, ssc) for p in f.parts]
            if len(parts) == 2:
                p0, p1 = parts
                return lambda n, F, S: p0(n, F, S) and p1(n, F, S)

            def conj(n, F, S, parts=tuple(parts)):
                for p in parts:
                    if not p(n, F, S):
                        return False
                return True

            return conj
        if isinstance(f, Or):
            parts = [self.compile(p, fsc, ssc) for p in f.parts]
            if len(parts) == 2:
                p0, p1 = parts
                return lambda n, F, S: p0(n, F, S) or p1(n, F, S)

            def disj(n, F, S, parts=tuple(parts)):
                for p in parts:
                    if p(n, F, S):
                        return True
                return False

            return disj
        if isinstance(f, Implies):
            a = self.compile(f.left, fsc, ssc)
            b = self.compile(f.right, fsc, ssc)
            return lambda n, F, S: not a(n, F, S) or b(n, F, S)
        if isinstance(f, Iff):
            a = self.compile(f.left, fsc, ssc)
            b = self.compile(f.right, fsc, ssc)
            return lambda n, F, S: a(n, F, S) == b(n, F, S)
        if isinstance(f, (Exists, Forall)):
            slot = self.fo_slot()
            body = self.compile(f.body, {**fsc, f.var: slot}, ssc)
            if isinstance(f, Exists):
                def ex(n, F, S):
                    for u in range(n):
                        F[slot] = u
                        if body(n, F, S):
                            return True
                    return False
                return ex

            def fa(n, F, S):
                for u in range(n):
                    F[slot] = u
                    if not body(n, F, S):
                        return False
                return True
            return fa
        if isinstance(f, (ExistsSet, ForallSet)):
            if self.flavor != "ws":
                raise ValueError("set quantifiers are word-logic only")
            slot = self.so_slot()
            body = self.compile(f.body, fsc, {**ssc, f.var: slot})
            if isinstance(f, ExistsSet):
                def ex2(n, F, S):
                    for m in range(1 << n):
                        S[slot] = m
                        if body(n, F, S):
                            return True
                    return False
                return ex2

            def fa2(n, F, S):
                for m in range(1 << n):
                    S[slot] = m
                    if not body(n, F, S):
                        return False
                return True
            return fa2
        raise TypeError(f"not a formula: {f!r}")


_EVAL_CACHE: dict = {}
_CACHE_PIN: dict = {}


def _compiled(f: Formula, flavor: str):
    key = (id(f), flavor)
    hit = _EVAL_CACHE.get(key)
    if hit is not None:
        return hit
    if len(_EVAL_CACHE) > 8192:
        _EVAL_CACHE.clear()
        _CACHE_PIN.clear()
    fo, so = free_vars(f)
    comp = _Compiler(flavor)
    fsc = {name: i for i, name in enumerate(sorted(fo))}
    ssc = {name: i for i, name in enumerate(sorted(so))}
    comp.nf = len(fsc)
    comp.ns = len(ssc)
    fn = comp.compile(f, fsc, ssc)
    entry = (fn, sorted(fo), sorted(so), comp.nf, comp.ns)
    _EVAL_CACHE[key] = entry
    _CACHE_PIN[id(f)] = f
    return entry


def _eval(f: Formula, s: Structure, flavor: str) -> bool:
    fn, fo_names, so_names, nf, ns = _compiled(f, flavor)
    F = [0] * nf
    S = [0] * ns
    for i, name in enumerate(fo_names):
        try:
            v = s.fo[name]
        except KeyError:
            raise KeyError(f"unassigned position variable {name!r}") from None
        if not 0 <= v < s.n:
            raise ValueError(f"value of {name!r} outside the universe")
        F[i] = v
    for i, name in enumerate(so_names):
        try:
            vals = s.so[name]
        except KeyError:
            raise KeyError(f"unassigned set symbol {name!r}") from None
        m = 0
        for u in vals:
            if not 0 <= u < s.n:
                raise ValueError(f"set {name!r} reaches outside the universe")
            m |= 1 << u
        S[i] = m
    return fn(s.n, F, S)


def eval_il(f: Formula, s: Structure) -> bool:
    """Truth of f under the ring semantics (succ modulo n)."""
    return _eval(f, s, "il")


def eval_ws1s(f: Formula, s: Structure) -> bool:
    """Truth of f under the word semantics (succ clamps at the last
    position, first denotes 0, max(x) iff x = n-1)."""
    return _eval(f, s, "ws")


# ---------------------------------------------------------------------------
# Flattening

FRESH_PREFIX = "$"


class _Fresh:
    def __init__(self):
        self.k = 0

    def __call__(self) -> str:
        name = f"{FRESH_PREFIX}{self.k}"
        self.k += 1
        return name


def _flatten_term(t: Term, fresh: _Fresh):
    """Lower t to a variable, returning (var, chain) where chain is a list
    of (x, y) pairs standing for succ(x) = y atoms."""
    if isinstance(t, Var):
        return t, []
    if isinstance(t, First):
        return t, []
    base = term_base(t)
    if not isinstance(base, Var):
        raise ValueError("succ applied to a constant cannot be flattened")
    chain = []
    cur = base
    for _ in range(succ_depth(t)):
        nxt = Var(fresh())
        chain.append((cur, nxt))
        cur = nxt
    return cur, chain


def _close(atom: Formula, chains) -> Formula:
    """Wrap atom in the existential chain introduced for its terms."""
    out = atom
    for (x, y) in reversed(chains):
        out = Exists(y.name, land(Eq(Succ(x), y), out))
    return out


def flatten(f: Formula) -> Formula:
    """Rewrite so that succ occurs only in atoms succ(x) = y.

    Fresh variables use the reserved "$" prefix with a deterministic
    counter, so output is reproducible and cannot clash with source
    names.  An equality between a succ term and a variable keeps its
    outermost succ in place: depth d costs d - 1 fresh variables there,
    and d fresh variables in any other atom position.
    """
    fresh = _Fresh()

    def atom_terms(make, terms):
        chains = []
        vars_ = []
        for t in terms:
            v, ch = _flatten_term(t, fresh)
            chains.extend(ch)
            vars_.append(v)
        return _close(make(vars_), chains)

    def walk(g: Formula) -> Formula:
        if isinstance(g, Bool):
            return g
        if isinstance(g, Eq):
            left, right = g.left, g.right
            # orient succ-on-one-side equalities to succ(x) = y
            if isinstance(right, Succ) and not isinstance(left, Succ):
                left, right = right, left
            if isinstance(left, Succ) and not isinstance(right, Succ):
                inner, chain = _flatten_term(left.arg, fresh)
                if isinstance(right, First):
                    return _close(Eq(Succ(inner), right), chain)
                rv, rchain = _flatten_term(right, fresh)
                return _close(Eq(Succ(inner), rv), chain + rchain)
            return atom_terms(lambda vs: Eq(vs[0], vs[1]), [left, right])
        if isinstance(g, Le):
            return atom_terms(lambda vs: Le(vs[0], vs[1]), [g.left, g.right])
        if isinstance(g, App):
            return atom_terms(lambda vs: App(g.pred, vs[0]), [g.arg])
        if isinstance(g, IsZero):
            return atom_terms(lambda vs: IsZero(vs[0]), [g.arg])
        if isinstance(g, IsMax):
            return atom_terms(lambda vs: IsMax(vs[0]), [g.arg])
        if isinstance(g, Not):
            return lnot(walk(g.body))
        if isinstance(g, And):
            return land(*[walk(p) for p in g.parts])
        if isinstance(g, Or):
            return lor(*[walk(p) for p in g.parts])
        if isinstance(g, Implies):
            return Implies(walk(g.left), walk(g.right))
        if isinstance(g, Iff):
            return Iff(walk(g.left), walk(g.right))
        if isinstance(g, (Exists, Forall, ExistsSet, ForallSet)):
            return type(g)(g.var, walk(g.body))
        raise TypeError(f"not a formula: {g!r}")

    return walk(f)


def is_flat(f: Formula) -> bool:
    """True iff succ occurs only in atoms of shape succ(x) = y."""

    def ok_term(t: Term) -> bool:
        return isinstance(t, (Var, First))

    def walk(g: Formula) -> bool:
        if isinstance(g, Bool):
            return True
        if isinstance(g, Eq):
            l, r = g.left, g.right
            if isinstance(l, Succ):
                return isinstance(l.arg, Var) and ok_term(r)
            return ok_term(l) and ok_term(r)
        if isinstance(g, Le):
            return ok_term(g.left) and ok_term(g.right)
        if isinstance(g, App):
            return ok_term(g.arg)
        if isinstance(g, (IsZero, IsMax)):
            return ok_term(g.arg)
        if isinstance(g, Not):
            return walk(g.body)
        if isinstance(g, (And, Or)):
            return all(walk(p) for p in g.parts)
        if isinstance(g, (Implies, Iff)):
            return walk(g.left) and walk(g.right)
        if isinstance(g, (Exists, Forall, ExistsSet, ForallSet)):
            return walk(g.body)
        raise TypeError(f"not a formula: {g!r}")

    return walk(f)


# ---------------------------------------------------------------------------
# Translation to the word logic


def translate(f: Formula) -> Formula:
    """Map a flattened IL formula onto the word logic.

    Homomorphic except on successor equalities, which become

        (not max(x) and succ(x) = y) or (max(x) and y = first)

    so that the word logic's clamped successor simulates the ring's
    wrap-around.  Derived zero atoms become equalities with first.
    """
    if not is_flat(f):
        raise ValueError("translate requires a flattened formula")

    def walk(g: Formula) -> Formula:
        if isinstance(g, (Bool, Le, App, IsMax)):
            return g
        if isinstance(g, Eq):
            if isinstance(g.left, Succ):
                x, y = g.left.arg, g.right
                return lor(land(lnot(IsMax(x)), Eq(Succ(x), y)),
                           land(IsMax(x), Eq(y, First())))
            return g
        if isinstance(g, IsZero):
            return Eq(g.arg, First())
        if isinstance(g, Not):
            return lnot(walk(g.body))
        if isinstance(g, And):
            return land(*[walk(p) for p in g.parts])
        if isinstance(g, Or):
            return lor(*[walk(p) for p in g.parts])
        if isinstance(g, Implies):
            return Implies(walk(g.left), walk(g.right))
        if isinstance(g, Iff):
            return Iff(walk(g.left), walk(g.right))
        if isinstance(g, (Exists, Forall, ExistsSet, ForallSet)):
            return type(g)(g.var, walk(g.body))
        raise TypeError(f"not a formula: {g!r}")

    return walk(f)


# ---------------------------------------------------------------------------
# Minimal models of interaction clauses


def minimal_models(clause, n: int, port_type: Optional[Mapping[str, str]] = None):
    """Enumerate the minimal models of an interaction clause over
    universe {0..n-1}.

    Returns a list of (assignment, ports) pairs: assignment maps each
    bound variable to a node, ports maps each port of the clause to the
    frozen set of participating nodes (a singleton per rendezvous atom,
    united over repeated ports; the guard-satisfying node set per
    broadcast).

    When port_type is given, candidate models in which two distinct
    ports of the same component type touch intersecting node sets are
    dropped: such interactions are ruled out by the side condition on
    interaction formulas.  Without port_type no filtering happens.
    """
    if n < 1:
        raise ValueError("universe size must be at least 1")
    out = []
    bound = list(clause.bound_vars)
    for tup in itertools.product(range(n), repeat=len(bound)):
        assign = dict(zip(bound, tup))
        s = Structure(n, assign, {})
        if not eval_il(clause.guard, s):
            continue
        ports: dict = {}
        for port, var in clause.rendezvous:
            ports.setdefault(port, set()).add(assign[var])
        for b in clause.broadcasts:
            recv = {u for u in range(n)
                    if eval_il(b.guard, s.with_fo(b.var, u))}
            ports.setdefault(b.port, set()).update(recv)
        if port_type is not None and _axiom_violated(ports, port_type):
            continue
        out.append((assign, {p: frozenset(v) for p, v in ports.items()}))
    return out


def _axiom_violated(ports: Mapping[str, set], port_type: Mapping[str, str]) -> bool:
    items = sorted(ports.items())
    for i, (p, pset) in enumerate(items):
        for q, qset in items[i + 1:]:
            if port_type[p] == port_type[q] and pset & qset:
                return True
    return False


def clause_formula(clause) -> Formula:
    """The clause body as an IL formula over its ports, with the bound
    variables left free: guard and rendezvous atoms and broadcasts."""
    parts = [clause.guard]
    for port, var in clause.rendezvous:
        parts.append(App(port, Var(var)))
    for b in clause.broadcasts:
        parts.append(Forall(b.var, implies(b.guard, App(b.port, Var(b.var)))))
    return land(*parts)


# ---------------------------------------------------------------------------
# Pretty-printing


def term_str(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, First):
        return "first"
    if isinstance(t, Succ):
        return f"succ({term_str(t.arg)})"
    raise TypeError(f"not a term: {t!r}")


def formula_str(f: Formula) -> str:
    """Deterministic fully-parenthesized rendering."""
    if isinstance(f, Bool):
        return "true" if f.value else "false"
    if isinstance(f, Le):
        return f"{term_str(f.left)} <= {term_str(f.right)}"
    if isinstance(f, Eq):
        return f"{term_str(f.left)} = {term_str(f.right)}"
    if isinstance(f, App):
        return f"{f.pred}({term_str(f.arg)})"
    if isinstance(f, IsZero):
        return f"zero({term_str(f.arg)})"
    if isinstance(f, IsMax):
        return f"max({term_str(f.arg)})"
    if isinstance(f, Not):
        return f"~{_paren(f.body)}"
    if isinstance(f, And):
        return " & ".join(_paren(p) for p in f.parts)
    if isinstance(f, Or):
        return " | ".join(_paren(p) for p in f.parts)
    if isinstance(f, Implies):
        return f"{_paren(f.left)} -> {_paren(f.right)}"
    if isinstance(f, Iff):
        return f"{_paren(f.left)} <-> {_paren(f.right)}"
    if isinstance(f, Exists):
        return f"ex {f.var} . {formula_str(f.body)}"
    if isinstance(f, Forall):
        return f"all {f.var} . {formula_str(f.body)}"
    if isinstance(f, ExistsSet):
        return f"ex2 {f.var} . {formula_str(f.body)}"
    if isinstance(f, ForallSet):
        return f"all2 {f.var} . {formula_str(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def _paren(f: Formula) -> str:
    if isinstance(f, (Bool, App, IsZero, IsMax, Not)):
        return formula_str(f)
    if isinstance(f, (Le, Eq)):
        return f"({formula_str(f)})"
    return f"({formula_str(f)})"


def formula_size(f: Formula) -> int:
    """Node count, reported by the command line tool."""
    if isinstance(f, Bool):
        return 1
    if isinstance(f, (Le, Eq, App, IsZero, IsMax)):
        return 1
    if isinstance(f, Not):
        return 1 + formula_size(f.body)
    if isinstance(f, (And, Or)):
        return 1 + sum(formula_size(p) for p in f.parts)
    if isinstance(f, (Implies, Iff)):
        return 1 + formula_size(f.left) + formula_size(f.right)
    if isinstance(f, (Exists, Forall, ExistsSet, ForallSet)):
        return 1 + formula_size(f.body)
    raise TypeError(f"not a formula: {f!r}")
