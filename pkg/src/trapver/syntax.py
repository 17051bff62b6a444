"""Surface syntax for component-based ring systems.

A system file declares component types (states, an initial state and
ports, each port moving one state to another), interaction clauses
(existentially bound index variables, an optional guard, rendezvous
atoms and optional broadcast parts) and named properties (first-order
formulas over states and index variables).

Example:

    component Fork {
      states f, b
      init f
      port t: f -> b
      port l: b -> f
    }

    clause exists i, j when succ(i) = j sync p(i), l(i), l(j)

    property deadlock_free_hint {
      forall i . f(i) or b(i)
    }

Guards of clauses are conjunctions of literals over index comparisons
and the zero/max tests.  Property formulas allow the full first-order
layer.  Comments run from '#' to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .logic import (
    App, Bool, Eq, Formula, IsMax, IsZero, Le, Not, Succ, Term, Var,
    exists as l_exists, forall as l_forall, free_vars, land, lnot, lor,
    iff as l_iff, implies as l_implies, term_str,
)


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


class ValidationError(Exception):
    pass


# ---------------------------------------------------------------------------
# Tokens

KEYWORDS = {
    "component", "states", "init", "port", "clause", "exists", "when",
    "sync", "broadcast", "property", "forall", "not", "and", "or",
    "true", "false", "succ", "zero", "max",
}

_SYMBOLS = ("->", "<=", "<->", "!=", "<", "=", "{", "}", "(", ")", ",", ":", ".")


@dataclass
class Token:
    kind: str  # "ident", "kw", symbol text, or "eof"
    text: str
    line: int
    col: int


def tokenize(src: str):
    toks = []
    line, col = 1, 1
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and src[i] != "\n":
                i += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            word = src[i:j]
            kind = "kw" if word in KEYWORDS else "ident"
            toks.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        matched = None
        for sym in _SYMBOLS:
            if src.startswith(sym, i):
                matched = sym
                break
        if matched:
            toks.append(Token(matched, matched, line, col))
            i += len(matched)
            col += len(matched)
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Declarations


@dataclass(frozen=True)
class PortDecl:
    name: str
    source: str
    target: str
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class ComponentTypeDecl:
    name: str
    states: tuple
    init: str
    ports: tuple
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class BroadcastDecl:
    port: str
    var: str
    guard: Formula
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class ClauseDecl:
    bound_vars: tuple
    guard: Formula
    rendezvous: tuple  # of (port, var)
    broadcasts: tuple  # of BroadcastDecl
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class PropertyDecl:
    name: str
    formula: Formula
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SystemSpec:
    components: tuple
    clauses: tuple
    properties: tuple


_SUCC_NAME = re.compile(r"succ\d+\Z")


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def err(self, msg: str):
        t = self.cur
        got = t.text if t.kind != "eof" else "end of input"
        raise ParseError(f"{msg}, got {got!r}", t.line, t.col)

    def take(self, kind: str, what: Optional[str] = None) -> Token:
        t = self.cur
        if t.kind != kind and not (t.kind == "kw" and t.text == kind):
            self.err(f"expected {what or kind}")
        self.i += 1
        return t

    def at_kw(self, word: str) -> bool:
        t = self.cur
        return t.kind == "kw" and t.text == word

    def eat_kw(self, word: str) -> bool:
        if self.at_kw(word):
            self.i += 1
            return True
        return False

    def ident(self, what: str) -> Token:
        t = self.cur
        if t.kind != "ident":
            self.err(f"expected {what}")
        if _SUCC_NAME.match(t.text):
            raise ParseError(
                f"{t.text!r} is reserved (looks like the succ operator)",
                t.line, t.col)
        self.i += 1
        return t

    # terms and atoms -------------------------------------------------------

    def term(self) -> Term:
        if self.eat_kw("succ"):
            self.take("(")
            inner = self.term()
            self.take(")")
            return Succ(inner)
        t = self.ident("an index variable")
        return Var(t.text)

    def atom(self, preds: bool) -> Formula:
        """One atom.  With preds true, name(term) predicate applications
        are allowed (property formulas); guards only compare indices."""
        if self.eat_kw("true"):
            return Bool(True)
        if self.eat_kw("false"):
            return Bool(False)
        if self.eat_kw("zero"):
            self.take("(")
            t = self.term()
            self.take(")")
            return IsZero(t)
        if self.eat_kw("max"):
            self.take("(")
            t = self.term()
            self.take(")")
            return IsMax(t)
        if preds and self.cur.kind == "ident" and \
                self.toks[self.i + 1].kind == "(":
            name = self.ident("a state name")
            self.take("(")
            t = self.term()
            self.take(")")
            return App(name.text, t)
        left = self.term()
        op = self.cur
        if op.kind == "=":
            self.i += 1
            return Eq(left, self.term())
        if op.kind == "<=":
            self.i += 1
            return Le(left, self.term())
        if op.kind == "<":
            self.i += 1
            right = self.term()
            return land(Le(left, right), lnot(Eq(left, right)))
        if op.kind == "!=":
            self.i += 1
            return lnot(Eq(left, self.term()))
        self.err("expected a comparison operator")

    # guards: conjunctions of literals --------------------------------------

    def guard(self) -> Formula:
        lits = [self.guard_literal()]
        while self.eat_kw("and"):
            lits.append(self.guard_literal())
        return land(*lits)

    def guard_literal(self) -> Formula:
        if self.eat_kw("not"):
            return lnot(self.guard_primary())
        return self.guard_primary()

    def guard_primary(self) -> Formula:
        if self.cur.kind == "(":
            self.i += 1
            inner = self.atom(preds=False)
            self.take(")")
            return inner
        return self.atom(preds=False)

    # property formulas: full first-order layer ------------------------------

    def formula(self) -> Formula:
        left = self.formula_implies()
        if self.cur.kind == "<->":
            self.i += 1
            return l_iff(left, self.formula())
        return left

    def formula_implies(self) -> Formula:
        left = self.formula_or()
        if self.cur.kind == "->":
            self.i += 1
            return l_implies(left, self.formula_implies())
        return left

    def formula_or(self) -> Formula:
        parts = [self.formula_and()]
        while self.eat_kw("or"):
            parts.append(self.formula_and())
        return lor(*parts)

    def formula_and(self) -> Formula:
        parts = [self.formula_unary()]
        while self.eat_kw("and"):
            parts.append(self.formula_unary())
        return land(*parts)

    def formula_unary(self) -> Formula:
        if self.eat_kw("not"):
            return lnot(self.formula_unary())
        if self.at_kw("forall") or self.at_kw("exists"):
            univ = self.eat_kw("forall")
            if not univ:
                self.eat_kw("exists")
            names = [self.ident("a variable").text]
            while self.cur.kind == ",":
                self.i += 1
                names.append(self.ident("a variable").text)
            self.take(".")
            body = self.formula()
            return l_forall(names, body) if univ else l_exists(names, body)
        if self.cur.kind == "(":
            # lookahead: parenthesized formula vs parenthesized term
            self.i += 1
            inner = self.formula()
            self.take(")")
            return inner
        return self.atom(preds=True)

    # declarations -----------------------------------------------------------

    def component(self) -> ComponentTypeDecl:
        start = self.cur
        self.take("component")
        name = self.ident("a component type name")
        self.take("{")
        self.take("states")
        states = [self.ident("a state name").text]
        while self.cur.kind == ",":
            self.i += 1
            states.append(self.ident("a state name").text)
        self.take("init")
        init = self.ident("the initial state").text
        ports = []
        while self.at_kw("port"):
            self.i += 1
            pt = self.cur
            pname = self.ident("a port name").text
            self.take(":")
            src = self.ident("a state name").text
            self.take("->")
            dst = self.ident("a state name").text
            ports.append(PortDecl(pname, src, dst, (pt.line, pt.col)))
        self.take("}")
        return ComponentTypeDecl(name.text, tuple(states), init,
                                 tuple(ports), (start.line, start.col))

    def clause(self) -> ClauseDecl:
        start = self.cur
        self.take("clause")
        self.take("exists")
        bound = [self.ident("an index variable").text]
        while self.cur.kind == ",":
            self.i += 1
            bound.append(self.ident("an index variable").text)
        guard: Formula = Bool(True)
        if self.eat_kw("when"):
            guard = self.guard()
        self.take("sync")
        rendezvous = [self.sync_atom()]
        while self.cur.kind == ",":
            self.i += 1
            rendezvous.append(self.sync_atom())
        broadcasts = []
        while self.at_kw("broadcast"):
            bt = self.cur
            self.i += 1
            port = self.ident("a port name").text
            self.take("(")
            var = self.ident("the broadcast variable").text
            self.take(")")
            bguard: Formula = Bool(True)
            if self.eat_kw("when"):
                bguard = self.guard()
            broadcasts.append(BroadcastDecl(port, var, bguard,
                                            (bt.line, bt.col)))
        return ClauseDecl(tuple(bound), guard, tuple(rendezvous),
                          tuple(broadcasts), (start.line, start.col))

    def sync_atom(self):
        port = self.ident("a port name").text
        self.take("(")
        var = self.ident("an index variable").text
        self.take(")")
        return (port, var)

    def property_decl(self) -> PropertyDecl:
        start = self.cur
        self.take("property")
        name = self.ident("a property name")
        self.take("{")
        f = self.formula()
        self.take("}")
        return PropertyDecl(name.text, f, (start.line, start.col))

    def system(self) -> SystemSpec:
        components, clauses, properties = [], [], []
        while self.cur.kind != "eof":
            if self.at_kw("component"):
                components.append(self.component())
            elif self.at_kw("clause"):
                clauses.append(self.clause())
            elif self.at_kw("property"):
                properties.append(self.property_decl())
            else:
                self.err("expected component, clause or property")
        return SystemSpec(tuple(components), tuple(clauses),
                          tuple(properties))


def parse_system(src: str) -> SystemSpec:
    return _Parser(tokenize(src)).system()


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class ValidatedSystem:
    spec: SystemSpec
    types: tuple                 # ComponentTypeDecl, declaration order
    all_states: tuple            # global state order
    state_type: dict             # state -> component type name
    port_type: dict              # port -> component type name
    pre: dict                    # port -> source state
    post: dict                   # port -> target state
    init: dict                   # type name -> initial state
    type_states: dict            # type name -> tuple of states
    clauses: tuple
    properties: dict             # name -> Formula

    @property
    def has_broadcasts(self) -> bool:
        return any(c.broadcasts for c in self.clauses)


_GUARD_ATOMS = (Le, Eq, IsZero, IsMax, Bool)


def _check_guard(guard: Formula, allowed: set, where: str):
    from .logic import And
    lits = list(guard.parts) if isinstance(guard, And) else [guard]
    for lit in lits:
        core = lit.body if isinstance(lit, Not) else lit
        if not isinstance(core, _GUARD_ATOMS):
            raise ValidationError(
                f"{where}: guard must be a conjunction of literals over "
                f"index atoms")
        fo, _ = free_vars(core)
        bad = fo - allowed
        if bad:
            raise ValidationError(
                f"{where}: guard uses undeclared variable "
                f"{sorted(bad)[0]!r}")


def validate(spec: SystemSpec) -> ValidatedSystem:
    if not spec.components:
        raise ValidationError("a system needs at least one component type")

    seen_types: set = set()
    state_type: dict = {}
    port_type: dict = {}
    pre: dict = {}
    post: dict = {}
    init: dict = {}
    type_states: dict = {}
    all_states: list = []

    for comp in spec.components:
        if comp.name in seen_types:
            raise ValidationError(f"duplicate component type {comp.name!r}")
        seen_types.add(comp.name)
        if len(set(comp.states)) != len(comp.states):
            raise ValidationError(
                f"component {comp.name!r} repeats a state name")
        for s in comp.states:
            if s in state_type:
                raise ValidationError(
                    f"state {s!r} declared in both {state_type[s]!r} "
                    f"and {comp.name!r}")
            state_type[s] = comp.name
            all_states.append(s)
        if comp.init not in comp.states:
            raise ValidationError(
                f"component {comp.name!r}: initial state {comp.init!r} "
                f"is not declared")
        init[comp.name] = comp.init
        type_states[comp.name] = tuple(comp.states)
        for p in comp.ports:
            if p.name in port_type:
                raise ValidationError(f"duplicate port {p.name!r}")
            port_type[p.name] = comp.name
            if p.source not in comp.states or p.target not in comp.states:
                raise ValidationError(
                    f"port {p.name!r} of {comp.name!r} moves between "
                    f"undeclared states")
            pre[p.name] = p.source
            post[p.name] = p.target

    overlap = set(state_type) & set(port_type)
    if overlap:
        raise ValidationError(
            f"name {sorted(overlap)[0]!r} is used both as a state and "
            f"as a port")

    if not spec.clauses:
        raise ValidationError("a system needs at least one clause")

    for k, cl in enumerate(spec.clauses):
        where = f"clause {k + 1}"
        if not cl.bound_vars:
            raise ValidationError(f"{where}: needs a bound variable")
        if len(set(cl.bound_vars)) != len(cl.bound_vars):
            raise ValidationError(f"{where}: repeats a bound variable")
        bound = set(cl.bound_vars)
        if not cl.rendezvous:
            raise ValidationError(f"{where}: needs a rendezvous atom")
        _check_guard(cl.guard, bound, where)
        for (p, v) in cl.rendezvous:
            if p not in port_type:
                raise ValidationError(f"{where}: unknown port {p!r}")
            if v not in bound:
                raise ValidationError(
                    f"{where}: rendezvous variable {v!r} is not bound")
        for b in cl.broadcasts:
            if b.port not in port_type:
                raise ValidationError(f"{where}: unknown port {b.port!r}")
            if b.var in bound:
                raise ValidationError(
                    f"{where}: broadcast variable {b.var!r} shadows a "
                    f"bound variable")
            _check_guard(b.guard, bound | {b.var}, where)
        used = set(v for (_, v) in cl.rendezvous)
        gfo, _ = free_vars(cl.guard)
        for v in cl.bound_vars:
            if v not in used and v not in gfo:
                raise ValidationError(
                    f"{where}: bound variable {v!r} appears in no "
                    f"rendezvous atom and not in the guard")

    properties: dict = {}
    for pd in spec.properties:
        if pd.name in properties:
            raise ValidationError(f"duplicate property {pd.name!r}")
        fo, so = free_vars(pd.formula)
        if fo:
            raise ValidationError(
                f"property {pd.name!r}: free index variable "
                f"{sorted(fo)[0]!r}")
        bad = so - set(state_type)
        if bad:
            raise ValidationError(
                f"property {pd.name!r}: {sorted(bad)[0]!r} is not a state")
        properties[pd.name] = pd.formula

    return ValidatedSystem(
        spec=spec,
        types=spec.components,
        all_states=tuple(all_states),
        state_type=state_type,
        port_type=port_type,
        pre=pre,
        post=post,
        init=init,
        type_states=type_states,
        clauses=spec.clauses,
        properties=properties,
    )


def load_system(path: str) -> ValidatedSystem:
    with open(path, "r", encoding="utf-8") as fh:
        return validate(parse_system(fh.read()))


def parse_properties(src: str, sys: ValidatedSystem) -> dict:
    """Parse a standalone file of `property name { ... }` declarations and
    validate them against an already-loaded system.  Returns name -> Formula
    in declaration order."""
    parser = _Parser(tokenize(src))
    decls = []
    while parser.cur.kind != "eof":
        if not parser.at_kw("property"):
            parser.err("expected a property declaration")
        decls.append(parser.property_decl())
    out: dict = {}
    for pd in decls:
        if pd.name in out:
            raise ValidationError(f"duplicate property {pd.name!r}")
        fo, so = free_vars(pd.formula)
        if fo:
            raise ValidationError(
                f"property {pd.name!r}: free index variable "
                f"{sorted(fo)[0]!r}")
        bad = so - set(sys.state_type)
        if bad:
            raise ValidationError(
                f"property {pd.name!r}: {sorted(bad)[0]!r} is not a state")
        out[pd.name] = pd.formula
    return out


def load_properties(path: str, sys: ValidatedSystem) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_properties(fh.read(), sys)


# ---------------------------------------------------------------------------
# Formatting (canonical round-trippable source)


def _guard_src(g: Formula) -> str:
    from .logic import And
    lits = list(g.parts) if isinstance(g, And) else [g]
    out = []
    for lit in lits:
        neg = isinstance(lit, Not)
        core = lit.body if neg else lit
        if isinstance(core, Le):
            s = f"{term_str(core.left)} <= {term_str(core.right)}"
        elif isinstance(core, Eq):
            s = f"{term_str(core.left)} = {term_str(core.right)}"
        elif isinstance(core, IsZero):
            s = f"zero({term_str(core.arg)})"
        elif isinstance(core, IsMax):
            s = f"max({term_str(core.arg)})"
        elif isinstance(core, Bool):
            s = "true" if core.value else "false"
        else:
            raise ValueError(f"guard literal cannot be formatted: {core!r}")
        out.append(f"not ({s})" if neg else s)
    return " and ".join(out)


def _property_src(f: Formula) -> str:
    from .logic import (And, Or, Implies, Iff, Exists, Forall)

    def walk(g: Formula) -> str:
        if isinstance(g, Bool):
            return "true" if g.value else "false"
        if isinstance(g, Le):
            return f"{term_str(g.left)} <= {term_str(g.right)}"
        if isinstance(g, Eq):
            return f"{term_str(g.left)} = {term_str(g.right)}"
        if isinstance(g, App):
            return f"{g.pred}({term_str(g.arg)})"
        if isinstance(g, IsZero):
            return f"zero({term_str(g.arg)})"
        if isinstance(g, IsMax):
            return f"max({term_str(g.arg)})"
        if isinstance(g, Not):
            return f"not ({walk(g.body)})"
        if isinstance(g, And):
            return " and ".join(f"({walk(p)})" for p in g.parts)
        if isinstance(g, Or):
            return " or ".join(f"({walk(p)})" for p in g.parts)
        if isinstance(g, Implies):
            return f"({walk(g.left)}) -> ({walk(g.right)})"
        if isinstance(g, Iff):
            return f"({walk(g.left)}) <-> ({walk(g.right)})"
        if isinstance(g, Forall):
            return f"forall {g.var} . {walk(g.body)}"
        if isinstance(g, Exists):
            return f"exists {g.var} . {walk(g.body)}"
        raise ValueError(f"property formula cannot be formatted: {g!r}")

    return walk(f)


def format_system(spec: SystemSpec) -> str:
    lines = []
    for comp in spec.components:
        lines.append(f"component {comp.name} {{")
        lines.append(f"  states {', '.join(comp.states)}")
        lines.append(f"  init {comp.init}")
        for p in comp.ports:
            lines.append(f"  port {p.name}: {p.source} -> {p.target}")
        lines.append("}")
        lines.append("")
    for cl in spec.clauses:
        parts = [f"clause exists {', '.join(cl.bound_vars)}"]
        if not (isinstance(cl.guard, Bool) and cl.guard.value):
            parts.append(f"when {_guard_src(cl.guard)}")
        atoms = ", ".join(f"{p}({v})" for (p, v) in cl.rendezvous)
        parts.append(f"sync {atoms}")
        for b in cl.broadcasts:
            seg = f"broadcast {b.port}({b.var})"
            if not (isinstance(b.guard, Bool) and b.guard.value):
                seg += f" when {_guard_src(b.guard)}"
            parts.append(seg)
        lines.append(" ".join(parts))
    if spec.clauses:
        lines.append("")
    for pd in spec.properties:
        lines.append(f"property {pd.name} {{")
        lines.append(f"  {_property_src(pd.formula)}")
        lines.append("}")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"
