"""casp: a constraint answer set solver.

A conflict-driven Boolean engine over completion nogoods is coupled with a
finite-domain interval constraint engine.  Constraint atoms link the two
worlds; conflicts and propagation reasons crossing the boundary can be
reduced to irreducible inconsistent sets by a family of filtering
algorithms.  See README.md for the input language and CLI.
"""

from .core import (
    AbsOp,
    ArithConstraint,
    Atom,
    AtomTable,
    BinOp,
    Const,
    CountConstraint,
    DistinctConstraint,
    Expr,
    GammaMap,
    IntegerOverflowError,
    Lit,
    MappingError,
    Nogood,
    Relation,
    Trail,
    VarRef,
    F,
    T,
    format_lit,
    make_nogood,
)
from .csp import Domain, Space, SpaceBuilder
from .iis import (
    FILTERS,
    FILTER_LETTERS,
    ConsistencyOracle,
    FilterError,
    backward_filtering,
    cc_filtering,
    cc_range_filtering,
    conflict_nogood,
    deletion_filtering,
    forward_filtering,
    range_filtering,
    reason_nogood,
    simple_filtering,
)
from .parser import ParseError, parse_program
from .grounder import GroundProgram, GroundingError, ground_program, ground_text
from .semantics import (
    check_constraint_answer_set,
    oracle_model_set,
    oracle_witnesses,
)
from .translate import CompiledProgram, TranslateError, translate
from .cdcl import Engine, EngineStats, PostPropagator, SolveTimeout
from .bridge import TheoryConfig, TheoryPropagator, TheoryStats, initial_lookahead
from .driver import (
    OPTIMUM_FOUND,
    SATISFIABLE,
    UNKNOWN,
    UNSATISFIABLE,
    Model,
    Result,
    RunStats,
    Solver,
    SolverConfig,
    solve_text,
)

__version__ = "0.1.0"

__all__ = [
    "AbsOp",
    "ArithConstraint",
    "Atom",
    "AtomTable",
    "BinOp",
    "CompiledProgram",
    "Const",
    "ConsistencyOracle",
    "CountConstraint",
    "DistinctConstraint",
    "Domain",
    "Engine",
    "EngineStats",
    "Expr",
    "F",
    "FILTERS",
    "FILTER_LETTERS",
    "FilterError",
    "GammaMap",
    "GroundProgram",
    "GroundingError",
    "IntegerOverflowError",
    "Lit",
    "MappingError",
    "Model",
    "Nogood",
    "OPTIMUM_FOUND",
    "ParseError",
    "PostPropagator",
    "Relation",
    "Result",
    "RunStats",
    "SATISFIABLE",
    "SolveTimeout",
    "Solver",
    "SolverConfig",
    "Space",
    "SpaceBuilder",
    "T",
    "TheoryConfig",
    "TheoryPropagator",
    "TheoryStats",
    "Trail",
    "TranslateError",
    "UNKNOWN",
    "UNSATISFIABLE",
    "VarRef",
    "backward_filtering",
    "cc_filtering",
    "cc_range_filtering",
    "check_constraint_answer_set",
    "conflict_nogood",
    "deletion_filtering",
    "format_lit",
    "forward_filtering",
    "ground_program",
    "ground_text",
    "initial_lookahead",
    "make_nogood",
    "oracle_model_set",
    "oracle_witnesses",
    "parse_program",
    "range_filtering",
    "reason_nogood",
    "simple_filtering",
    "solve_text",
    "translate",
]
