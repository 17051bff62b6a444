"""trapver: parameterized safety verification of ring-shaped component
systems.  Trap invariants and 1-invariants are generated syntactically
from the interaction clauses and discharged by a built-in decision
procedure for monadic second-order logic over finite words.
"""

__version__ = "0.1.0"

from .syntax import (                                        # noqa: F401
    ParseError, ValidationError, ValidatedSystem,
    load_system, parse_system, validate, format_system,
)
from .logic import (                                         # noqa: F401
    Structure, eval_il, eval_ws1s, flatten, translate, minimal_models,
    formula_str,
)
from .ws1s import (                                          # noqa: F401
    DecideResult, ResourceLimitExceeded, TrackAutomaton,
    compile_formula, decide, equivalent,
)
from .invgen import (                                        # noqa: F401
    NormalizedSystem, StateVariableMap, gen_deadlock_property,
    gen_decision_formula, gen_flow_invariant, gen_flowpred,
    gen_trap_invariant, gen_trappred, normalize_clauses, state_property,
    state_variable_map,
)
from .petri import (                                         # noqa: F401
    InstanceNet, OneSafetyViolation, deadlocks, instantiate, reachable,
)
from .mona import export_solver_input                        # noqa: F401
from .cli import RunConfig, run                              # noqa: F401
