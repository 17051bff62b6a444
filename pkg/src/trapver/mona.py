"""Export of word-logic formulas to Mona's string mode.

The emitted file opens with `m2l-str;`, declares the free variables and
states the formula.  Successor, first and last are encoded through the
ordering alone, so the output does not depend on arithmetic that
behaves differently across modes:

    succ(x) = y   ~>  (x < y & no position strictly between) |
                      (nothing after x & y = x)
    x = first     ~>  no position before x
    max(x)        ~>  no position after x

Identifiers are sanitized to Mona's lexical rules (letters, digits,
underscores), with collisions resolved deterministically.
"""

from __future__ import annotations

import re

from .logic import (
    App, Bool, Eq, Exists, ExistsSet, First, Forall, ForallSet, Formula,
    Iff, Implies, IsMax, IsZero, Le, Not, And, Or, Succ, Var,
    free_vars, is_flat,
)

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

_RESERVED = {
    "ws1s", "ws2s", "m2l", "ex0", "ex1", "ex2", "all0", "all1", "all2",
    "let0", "let1", "let2", "var0", "var1", "var2", "macro", "pred",
    "true", "false", "in", "notin", "sub", "empty", "restrict", "import",
    "export", "prefix", "max", "min", "pconst", "union", "inter",
    "assert", "guide", "universe", "include", "allpos", "type", "tree",
    "const", "where",
}


def _sanitize_all(names) -> dict:
    """Deterministic collision-free renaming into Mona identifiers.
    The qq/sz prefixes are kept free for generated helper variables."""
    table: dict = {}
    used: set = set()
    for name in sorted(names):
        base = name.replace("'", "P").replace("$", "t")
        base = re.sub(r"[^A-Za-z0-9_]", "", base).replace("_", "")
        if not base or not base[0].isalpha() or base in _RESERVED or \
                base.startswith(("qq", "sz")):
            base = "v" + base
        cand = base
        k = 1
        while cand in used or not _IDENT.match(cand):
            k += 1
            cand = f"{base}{k}"
        used.add(cand)
        table[name] = cand
    return table


def _collect_names(f: Formula) -> set:
    names: set = set()

    def term(t):
        while isinstance(t, Succ):
            t = t.arg
        if isinstance(t, Var):
            names.add(t.name)

    def walk(g):
        if isinstance(g, Bool):
            return
        if isinstance(g, (Le, Eq)):
            term(g.left)
            term(g.right)
        elif isinstance(g, App):
            names.add(g.pred)
            term(g.arg)
        elif isinstance(g, (IsZero, IsMax)):
            term(g.arg)
        elif isinstance(g, Not):
            walk(g.body)
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p)
        elif isinstance(g, (Implies, Iff)):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, (Exists, Forall, ExistsSet, ForallSet)):
            names.add(g.var)
            walk(g.body)
        else:
            raise TypeError(f"not a formula: {g!r}")

    walk(f)
    return names


class _Emitter:
    def __init__(self, table: dict):
        self.table = table
        self.aux = 0

    def fresh(self) -> str:
        name = f"qq{self.aux}"
        self.aux += 1
        return name

    def term_var(self, t) -> str:
        if isinstance(t, Var):
            return self.table[t.name]
        raise ValueError(f"unexpected term {t!r}")

    def first_eq(self, x: str) -> str:
        q = self.fresh()
        return f"(~ex1 {q}: {q} < {x})"

    def emit(self, f: Formula) -> str:
        if isinstance(f, Bool):
            return "true" if f.value else "false"
        if isinstance(f, Eq):
            left, right = f.left, f.right
            if isinstance(right, Succ) and not isinstance(left, Succ):
                left, right = right, left
            if isinstance(left, Succ):
                x = self.term_var(left.arg)
                if isinstance(right, First):
                    # succ(x) = first: universe of one position only
                    q = self.fresh()
                    return (f"((~ex1 {q}: {q} < {x}) & "
                            f"(~ex1 {q}: {x} < {q}))")
                y = self.term_var(right)
                q1, q2 = self.fresh(), self.fresh()
                return (f"((({x} < {y}) & ~(ex1 {q1}: {x} < {q1} & "
                        f"{q1} < {y})) | ((~ex1 {q2}: {x} < {q2}) & "
                        f"({y} = {x})))")
            if isinstance(left, First) and isinstance(right, First):
                return "true"
            if isinstance(left, First):
                return self.first_eq(self.term_var(right))
            if isinstance(right, First):
                return self.first_eq(self.term_var(left))
            return f"({self.term_var(left)} = {self.term_var(right)})"
        if isinstance(f, Le):
            if isinstance(f.left, First) and isinstance(f.right, First):
                return "true"
            if isinstance(f.left, First):
                return "true"
            if isinstance(f.right, First):
                return self.first_eq(self.term_var(f.left))
            return f"({self.term_var(f.left)} <= {self.term_var(f.right)})"
        if isinstance(f, App):
            pred = self.table[f.pred]
            if isinstance(f.arg, First):
                q, r = self.fresh(), self.fresh()
                return (f"(ex1 {q}: (~ex1 {r}: {r} < {q}) & "
                        f"{q} in {pred})")
            return f"({self.term_var(f.arg)} in {pred})"
        if isinstance(f, IsZero):
            if isinstance(f.arg, First):
                return "true"
            return self.first_eq(self.term_var(f.arg))
        if isinstance(f, IsMax):
            if isinstance(f.arg, First):
                q, r = self.fresh(), self.fresh()
                return f"(~ex1 {q}: ex1 {r}: {r} < {q})"
            x = self.term_var(f.arg)
            q = self.fresh()
            return f"(~ex1 {q}: {x} < {q})"
        if isinstance(f, Not):
            return f"~{self.emit(f.body)}"
        if isinstance(f, And):
            return "(" + " & ".join(self.emit(p) for p in f.parts) + ")"
        if isinstance(f, Or):
            return "(" + " | ".join(self.emit(p) for p in f.parts) + ")"
        if isinstance(f, Implies):
            return f"({self.emit(f.left)} => {self.emit(f.right)})"
        if isinstance(f, Iff):
            return f"({self.emit(f.left)} <=> {self.emit(f.right)})"
        if isinstance(f, Exists):
            return f"(ex1 {self.table[f.var]}: {self.emit(f.body)})"
        if isinstance(f, Forall):
            return f"(all1 {self.table[f.var]}: {self.emit(f.body)})"
        if isinstance(f, ExistsSet):
            return f"(ex2 {self.table[f.var]}: {self.emit(f.body)})"
        if isinstance(f, ForallSet):
            return f"(all2 {self.table[f.var]}: {self.emit(f.body)})"
        raise TypeError(f"not a formula: {f!r}")


def export_solver_input(f: Formula, name: str = "formula",
                        min_universe: int = 1) -> str:
    """Render a word-logic formula as a Mona string-mode input whose
    satisfying strings are exactly the formula's models with universe
    size at least min_universe."""
    if not is_flat(f):
        raise ValueError("export needs a flattened formula")
    if min_universe < 1:
        raise ValueError("min_universe must be at least 1")
    fo, so = free_vars(f)
    table = _sanitize_all(_collect_names(f))
    em = _Emitter(table)
    body = em.emit(f)

    lines = [f"# {name}", "m2l-str;"]
    if so:
        decl = ", ".join(table[v] for v in sorted(so))
        lines.append(f"var2 {decl};")
    if fo:
        decl = ", ".join(table[v] for v in sorted(fo))
        lines.append(f"var1 {decl};")
    size_vars = [f"sz{i}" for i in range(min_universe)]
    distinct = [f"{a} ~= {b}"
                for i, a in enumerate(size_vars)
                for b in size_vars[i + 1:]]
    size = "ex1 " + ", ".join(size_vars) + ": " + \
        (" & ".join(distinct) if distinct else "true")
    lines.append(f"({size}) &")
    lines.append(body + ";")
    return "\n".join(lines) + "\n"
