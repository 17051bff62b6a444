"""Batch driver: load a system, generate the invariants, decide, report.

Exit codes: 0 when every selected property is VERIFIED (the decision
formula is unsatisfiable over all universe sizes), 1 when some property
comes back UNKNOWN (the formula is satisfiable: either the invariant is
too weak or the system really is unsafe; satisfiability alone cannot
tell these apart), 2 on errors and resource limits.

The text report is a flat sequence of `key value` lines with dotted
keys, stable across runs except for the `*.time` lines.  The json
report is the same key/value map as one document.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field

from . import __version__, petri
from .invgen import (
    gen_deadlock_property, gen_decision_formula, normalize_clauses,
    state_property, state_variable_map,
)
from .logic import eval_ws1s, formula_size, lnot
from .mona import export_solver_input
from .syntax import ParseError, ValidationError, load_properties, load_system
from .ws1s import DEFAULT_MAX_STATES, ResourceLimitExceeded, decide

BUILTIN_DEADLOCK = "deadlock-freedom"


@dataclass
class RunConfig:
    path: str
    prop: str = "deadlock"          # "deadlock" | "all" | a declared name
    property_file: str = ""
    flow: bool = False
    min_universe: int = 2
    oracle: tuple = ()              # instance sizes to cross-check
    export_solver: str = ""
    report: str = "text"            # "text" | "json"
    max_states: int = DEFAULT_MAX_STATES
    reach_cap: int = petri.REACH_CAP


class Report:
    """Ordered, duplicate-free key/value rows."""

    def __init__(self):
        self.rows = []
        self._keys = set()

    def add(self, key: str, value):
        if key in self._keys:
            raise ValueError(f"duplicate report key {key!r}")
        self._keys.add(key)
        self.rows.append((key, str(value)))

    def to_text(self) -> str:
        return "".join(f"{k} {v}\n" for k, v in self.rows)

    def to_json(self) -> str:
        return json.dumps(dict(self.rows), indent=2) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_text()


@dataclass
class _PropOutcome:
    name: str
    verdict: str = "ERROR"
    formula_size: int = 0
    automaton_states: int = -1
    seconds: float = 0.0
    note: str = ""
    witness: object = None          # Structure, when UNKNOWN
    witness_nodes: list = field(default_factory=list)
    witness_oracle: str = ""
    export_path: str = ""


def _fmt_secs(dt: float) -> str:
    return f"{dt:.2f}s"


def _witness_nodes(st, svm, sys) -> list:
    """Per node, the states whose set variable holds it."""
    out = []
    for u in range(st.n):
        here = [s for s in sys.all_states if u in st.so.get(svm.var[s], ())]
        out.append(" ".join(here) if here else "-")
    return out


def _export_path(base: str, name: str, many: bool) -> str:
    if not many:
        return base
    stem, ext = os.path.splitext(base)
    return f"{stem}-{name}{ext or '.mona'}"


def _select_properties(config: RunConfig, sys, svm) -> list:
    """Resolve the property selection to [(name, good-state formula)]
    over the X̄ set variables, sorted by name."""
    pool = {BUILTIN_DEADLOCK: lnot(gen_deadlock_property(sys, svm))}
    declared = dict(sys.properties)
    if config.property_file:
        extra = load_properties(config.property_file, sys)
        clash = set(extra) & set(declared)
        if clash:
            raise ValidationError(
                f"property {sorted(clash)[0]!r} declared both in the "
                f"system and in the property file")
        declared.update(extra)
    for name, f in declared.items():
        if name == BUILTIN_DEADLOCK:
            raise ValidationError(
                f"property name {BUILTIN_DEADLOCK!r} is reserved for the "
                f"built-in deadlock check")
        pool[name] = state_property(svm, f)
    if config.prop == "deadlock":
        chosen = [BUILTIN_DEADLOCK]
    elif config.prop == "all":
        chosen = sorted(pool)
    elif config.prop in pool:
        chosen = [config.prop]
    else:
        raise ValidationError(
            f"unknown property {config.prop!r}; declared: "
            f"{', '.join(sorted(declared)) or 'none'}")
    return [(name, pool[name]) for name in chosen]


def _oracle_instance(cache: dict, sys, n: int, cap: int):
    """(net, reach) at size n, or (None, message) on failure.  Cached."""
    if n not in cache:
        try:
            net = petri.instantiate(sys, n)
            reach = petri.reachable(net, cap)
            cache[n] = (net, reach)
        except OverflowError as e:
            cache[n] = (None, str(e))
        except petri.OneSafetyViolation as e:
            cache[n] = (None, f"one-safety violated: {e}")
        except ResourceLimitExceeded as e:
            cache[n] = (None, f"resource limit: {e}")
    return cache[n]


def _check_property_on_instance(net, reach, svm, good) -> str:
    bad = 0
    for mk in reach.markings:
        st = petri.marking_to_structure(net, mk, svm)
        if not eval_ws1s(good, st):
            bad += 1
    if bad:
        return (f"violated ({bad} of {len(reach.markings)} reachable "
                f"markings falsify the property)")
    return f"ok ({len(reach.markings)} reachable markings)"


def _trap_check(net, reach) -> str:
    if net.nplaces > petri.TRAP_ENUM_MAX_PLACES:
        return f"skipped ({net.nplaces} places exceeds enumeration bound)"
    traps = [w for w in petri.enumerate_traps(net)
             if petri.is_initially_marked(net, w)]
    for mk in reach.markings:
        for w in traps:
            if not (mk & w):
                return "FAILED (a reachable marking misses an " \
                       "initially-marked trap)"
    return f"ok ({len(traps)} initially-marked traps, all stay marked)"


def _flow_check(net, reach) -> str:
    if net.nplaces > petri.TRAP_ENUM_MAX_PLACES:
        return f"skipped ({net.nplaces} places exceeds enumeration bound)"
    invs = petri.enumerate_structural_one_invariants(net)
    for mk in reach.markings:
        for w in invs:
            if (mk & w).bit_count() != 1:
                return "FAILED (a reachable marking breaks a structural " \
                       "1-invariant)"
    return f"ok ({len(invs)} structural 1-invariants, all hold one token)"


def _resolve_witness(cache, sys, svm, outcome, cap: int):
    st = outcome.witness
    net, reach = _oracle_instance(cache, sys, st.n, cap)
    if net is None:
        outcome.witness_oracle = f"unresolved ({reach})"
        return
    try:
        mk = petri.structure_to_marking(net, st, svm)
    except ValueError as e:
        outcome.witness_oracle = f"unresolved (not a marking: {e})"
        return
    if mk in reach.marking_set:
        outcome.witness_oracle = \
            f"REACHABLE (genuine counterexample at n={st.n})"
    else:
        outcome.witness_oracle = f"SPURIOUS (unreachable at n={st.n})"


def run(config: RunConfig):
    """Run one verification batch.  Returns (exit_code, Report)."""
    rep = Report()
    rep.add("tool", f"trapver {__version__}")
    t_start = time.perf_counter()

    if config.min_universe < 1:
        rep.add("error", "min-universe must be at least 1")
        return 2, rep
    if any(n < 1 for n in config.oracle):
        rep.add("error", "oracle sizes must be at least 1")
        return 2, rep
    if config.report not in ("text", "json"):
        rep.add("error", f"unknown report format {config.report!r}")
        return 2, rep

    try:
        sys_ = load_system(config.path)
    except OSError as e:
        rep.add("error", f"cannot read {config.path}: {e.strerror or e}")
        return 2, rep
    except (ParseError, ValidationError) as e:
        rep.add("error", str(e))
        return 2, rep

    rep.add("system.path", config.path)
    for ct in sys_.types:
        rep.add(f"system.component.{ct.name}",
                f"states={','.join(ct.states)} init={ct.init} "
                f"ports={','.join(p.name for p in ct.ports)}")
    rep.add("system.clauses", len(sys_.clauses))
    rep.add("system.broadcasts", "yes" if sys_.has_broadcasts else "no")
    rep.add("system.properties",
            ",".join(sorted(sys_.properties)) or "none")

    nsys = normalize_clauses(sys_)
    rep.add("system.normalization",
            "changed" if nsys.changed else "unchanged")

    rep.add("config.property", config.prop)
    rep.add("config.flow", "on" if config.flow else "off")
    rep.add("config.min-universe", config.min_universe)
    rep.add("config.max-states", config.max_states)
    rep.add("config.oracle",
            ",".join(str(n) for n in sorted(set(config.oracle))) or "none")
    if config.min_universe == 1:
        rep.add("config.warning",
                "min-universe 1 admits a single node that is its own "
                "neighbor; interactions there can be degenerate")

    svm = state_variable_map(sys_)
    try:
        selected = _select_properties(config, sys_, svm)
    except (OSError, ParseError, ValidationError) as e:
        rep.add("error", str(e))
        return 2, rep

    target = nsys if config.flow else sys_
    outcomes = []
    many = len(selected) > 1
    for name, good in selected:
        out = _PropOutcome(name=name)
        outcomes.append(out)
        t0 = time.perf_counter()
        try:
            df = gen_decision_formula(target, good, config.flow, svm)
            out.formula_size = formula_size(df)
            if config.export_solver:
                out.export_path = _export_path(
                    config.export_solver, name, many)
                with open(out.export_path, "w", encoding="utf-8") as fh:
                    fh.write(export_solver_input(
                        df, name=name, min_universe=config.min_universe))
            res = decide(df, min_universe=config.min_universe,
                         max_states=config.max_states)
            out.automaton_states = res.states
            if res.sat:
                out.verdict = "UNKNOWN"
                out.note = ("satisfiable: invariant too weak or the " \
                            "system is unsafe; the two cases cannot be " \
                            "distinguished here")
                out.witness = res.witness
                out.witness_nodes = _witness_nodes(res.witness, svm, sys_)
            else:
                out.verdict = "VERIFIED"
        except ResourceLimitExceeded as e:
            out.verdict = "RESOURCE-LIMIT"
            out.note = str(e)
        out.seconds = time.perf_counter() - t0

    oracle_sizes = sorted(set(config.oracle))
    cache: dict = {}
    oracle_rows = []
    if oracle_sizes:
        for n in oracle_sizes:
            key = f"oracle.n{n}"
            net, reach = _oracle_instance(cache, sys_, n, config.reach_cap)
            if net is None:
                oracle_rows.append((f"{key}.skipped", reach))
                continue
            oracle_rows.append((f"{key}.places", net.nplaces))
            oracle_rows.append((f"{key}.transitions", len(net.transitions)))
            if net.duplicates:
                oracle_rows.append((f"{key}.duplicate-transitions",
                                    len(net.duplicates)))
            oracle_rows.append((f"{key}.reachable", len(reach.markings)))
            oracle_rows.append((f"{key}.deadlocks",
                                len(petri.deadlocks(net, reach))))
            oracle_rows.append((f"{key}.trap-check", _trap_check(net, reach)))
            if config.flow:
                oracle_rows.append((f"{key}.flow-check",
                                    _flow_check(net, reach)))
            for name, good in selected:
                oracle_rows.append((
                    f"{key}.property.{name}",
                    _check_property_on_instance(net, reach, svm, good)))
        for out in outcomes:
            if out.witness is not None:
                _resolve_witness(cache, sys_, svm, out, config.reach_cap)

    for out in outcomes:
        key = f"property.{out.name}"
        rep.add(f"{key}.formula-size", out.formula_size)
        rep.add(f"{key}.verdict", out.verdict)
        if out.automaton_states >= 0:
            rep.add(f"{key}.automaton-states", out.automaton_states)
        if out.note:
            rep.add(f"{key}.note", out.note)
        if out.witness is not None:
            rep.add(f"{key}.witness.size", out.witness.n)
            for u, states in enumerate(out.witness_nodes):
                rep.add(f"{key}.witness.node{u}", states)
        if out.witness_oracle:
            rep.add(f"{key}.witness.oracle", out.witness_oracle)
        if out.export_path:
            rep.add(f"{key}.export", out.export_path)
        rep.add(f"{key}.time", _fmt_secs(out.seconds))

    for k, v in oracle_rows:
        rep.add(k, v)

    if any(o.verdict == "RESOURCE-LIMIT" for o in outcomes):
        code = 2
    elif any(o.verdict != "VERIFIED" for o in outcomes):
        code = 1
    else:
        code = 0
    rep.add("summary.exit", code)
    rep.add("summary.time", _fmt_secs(time.perf_counter() - t_start))
    return code, rep


def _parse_oracle(text: str):
    if not text:
        return ()
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"--oracle wants comma-separated integers, got {text!r}")


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="trapver",
        description="Prove safety properties of parameterized ring "
                    "systems from syntactically generated trap and "
                    "1-invariants.")
    ap.add_argument("system", help="system description (.cbs file)")
    ap.add_argument("--property", default="deadlock", dest="prop",
                    metavar="NAME",
                    help="deadlock (built-in, default), a declared "
                         "property name, or all")
    ap.add_argument("--property-file", default="", metavar="FILE",
                    help="extra property declarations to load")
    ap.add_argument("--flow", choices=("on", "off"), default="off",
                    help="also conjoin the 1-invariant (default off)")
    ap.add_argument("--min-universe", type=int, default=2, metavar="N",
                    help="smallest universe size considered (default 2)")
    ap.add_argument("--oracle", type=_parse_oracle, default=(),
                    metavar="N1,N2",
                    help="cross-check instances of these sizes")
    ap.add_argument("--export-solver", default="", metavar="PATH",
                    help="write the decision formula(s) in the external "
                         "solver's string-mode syntax")
    ap.add_argument("--report", choices=("text", "json"), default="text")
    ap.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES,
                    metavar="N", help="automaton state cap")
    ap.add_argument("--reach-cap", type=int, default=petri.REACH_CAP,
                    metavar="N", help="oracle reachability cap")
    ap.add_argument("--version", action="version",
                    version=f"trapver {__version__}")
    return ap


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    config = RunConfig(
        path=args.system,
        prop=args.prop,
        property_file=args.property_file,
        flow=(args.flow == "on"),
        min_universe=args.min_universe,
        oracle=args.oracle,
        export_solver=args.export_solver,
        report=args.report,
        max_states=args.max_states,
        reach_cap=args.reach_cap,
    )
    code, rep = run(config)
    sys.stdout.write(rep.render(config.report))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
