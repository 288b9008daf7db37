"""End-to-end solving: text in, constraint answer sets out.

Wires the frontend, the nogood translation, the Boolean engine and the
theory propagator together; handles model enumeration, the optimization
loop with bound tightening, statistics and timeouts.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .bridge import TheoryConfig, TheoryPropagator, initial_lookahead
from .cdcl import Engine, SolveTimeout
from .core import BinOp, Expr
from .grounder import GroundProgram, ground_text, tightness_check
from .translate import CompiledProgram, translate

SATISFIABLE = "SATISFIABLE"
UNSATISFIABLE = "UNSATISFIABLE"
OPTIMUM_FOUND = "OPTIMUM FOUND"
UNKNOWN = "UNKNOWN"


@dataclass
class SolverConfig:
    conflict_filter: str = "simple"
    reason_filter: str = "simple"
    delay: int = 1
    lookahead: bool = False
    probe_entail: bool = False
    snapshot: bool = True
    opt_all: bool = False
    opt_val: Optional[int] = None
    max_models: int = 1  # 0 = all
    enum_witnesses: bool = False
    seed: int = 0
    timeout: Optional[float] = None


@dataclass
class Model:
    index: int
    atoms: list
    constraint_atoms: list
    assignment: dict
    objective: Optional[list] = None

    def shown(self) -> list:
        return list(self.atoms) + list(self.constraint_atoms)


@dataclass
class RunStats:
    decisions: int = 0
    conflicts: int = 0
    conflict_literals: int = 0
    propagations: int = 0
    theory_propagations: int = 0
    theory_conflicts: int = 0
    restarts: int = 0
    conflict_filter_calls: int = 0
    reason_filter_calls: int = 0
    oracle_checks: int = 0
    oracle_rebuilds: int = 0
    total_checks: int = 0
    models: int = 0
    filter_time: float = 0.0
    solve_time: float = 0.0

    @property
    def avg_conflict_size(self) -> float:
        if self.conflicts == 0:
            return 0.0
        return self.conflict_literals / self.conflicts

    def as_dict(self) -> dict:
        out = dict(self.__dict__)
        out["avg_conflict_size"] = self.avg_conflict_size
        return out


@dataclass
class Result:
    status: str
    models: list = field(default_factory=list)
    optimum: Optional[list] = None
    stats: RunStats = field(default_factory=RunStats)

    @property
    def best(self) -> Optional[Model]:
        return self.models[-1] if self.models else None


def _sum_expr(exprs: list) -> Expr:
    acc = exprs[0]
    for e in exprs[1:]:
        acc = BinOp("+", acc, e)
    return acc


def _lex_cmp(senses: list, a: list, b: list) -> int:
    """-1 when a is strictly better than b, +1 when worse, 0 when equal."""
    for sense, va, vb in zip(senses, a, b):
        if va == vb:
            continue
        better = va < vb if sense == "minimize" else va > vb
        return -1 if better else 1
    return 0


class Solver:
    def __init__(self, text: str, config: Optional[SolverConfig] = None) -> None:
        self.config = config or SolverConfig()
        self.program: GroundProgram = ground_text(text)
        tightness_check(self.program)
        self.compiled: CompiledProgram = translate(self.program)
        self.objectives = [
            (sense, _sum_expr(exprs))
            for sense, exprs in self.program.optimize_statements
        ]
        cfg = self.config
        self.engine = Engine(len(self.program.atoms), seed=cfg.seed)
        for ng in self.compiled.nogoods:
            if not self.engine.add_nogood(ng):
                break
        theory_cfg = TheoryConfig(
            conflict_filter=cfg.conflict_filter,
            reason_filter=cfg.reason_filter,
            delay=cfg.delay,
            probe_entail=cfg.probe_entail,
            snapshot=cfg.snapshot,
            opt_all=cfg.opt_all,
        )
        self.bridge = TheoryPropagator(self.compiled, theory_cfg, self.objectives)
        self.engine.register_post(self.bridge)
        if self.compiled.unsat:
            self.engine.unsat = True
        if cfg.lookahead and not self.engine.unsat:
            for ng in initial_lookahead(self.compiled):
                if not self.engine.add_nogood(ng):
                    break
        if cfg.opt_val is not None and self.objectives:
            self.bridge.preload_bound(cfg.opt_val)

    # -- model extraction ------------------------------------------------------

    def _extract(self, lits: list, index: int) -> Model:
        atoms = self.program.atoms
        shown: list = []
        catoms: list = []
        for a in atoms:
            lit_value = self.engine.trail.value(a.index)
            if lit_value is not True or a.synthetic:
                continue
            if a.is_constraint:
                catoms.append(a.name)
            else:
                shown.append(a.name)
        witness = dict(self.bridge.witness or {})
        return Model(index, shown, catoms, witness)

    # -- run -------------------------------------------------------------------

    def run(self) -> Result:
        cfg = self.config
        stats = RunStats()
        start = time.perf_counter()
        if cfg.timeout is not None:
            self.engine.deadline = time.monotonic() + cfg.timeout
        result = Result(UNKNOWN, stats=stats)
        timed_out = False
        senses = [s for s, _ in self.objectives]
        best: Optional[list] = None
        try:
            for lits in self.engine.models():
                model = self._extract(lits, len(result.models) + 1)
                if self.objectives:
                    values = list(self.bridge.witness_values)
                    model.objective = values
                    if best is not None:
                        cmp = _lex_cmp(senses, values, best)
                        accept = cmp < 0 or (cmp == 0 and cfg.opt_all)
                    else:
                        accept = True
                    if accept:
                        if best is None or _lex_cmp(senses, values, best) < 0:
                            best = values
                            self.bridge.add_bound(best)
                        model.index = len(result.models) + 1
                        result.models.append(model)
                    continue  # optimization always runs to exhaustion
                result.models.append(model)
                if cfg.enum_witnesses and self.bridge.space is not None:
                    for extra in self.bridge.space.solutions():
                        if cfg.max_models and len(result.models) >= cfg.max_models:
                            break
                        if extra == model.assignment:
                            continue
                        clone = Model(
                            len(result.models) + 1,
                            model.atoms,
                            model.constraint_atoms,
                            dict(extra),
                        )
                        result.models.append(clone)
                if cfg.max_models and len(result.models) >= cfg.max_models:
                    break
        except (SolveTimeout, TimeoutError):
            timed_out = True
        stats.solve_time = time.perf_counter() - start
        self._collect(stats, len(result.models))
        if timed_out:
            result.status = UNKNOWN
        elif self.objectives:
            if result.models:
                result.status = OPTIMUM_FOUND
                result.optimum = best
            else:
                result.status = UNSATISFIABLE
        else:
            result.status = SATISFIABLE if result.models else UNSATISFIABLE
        return result

    def _collect(self, stats: RunStats, nmodels: int) -> None:
        es = self.engine.stats
        ts = self.bridge.stats
        oracle = self.bridge.oracle
        stats.decisions = es.decisions
        stats.conflicts = es.conflicts
        stats.conflict_literals = es.learnt_literals
        stats.propagations = es.propagations
        stats.restarts = es.restarts
        stats.theory_propagations = ts.theory_propagations
        stats.theory_conflicts = ts.theory_conflicts
        stats.conflict_filter_calls = ts.conflict_filter_calls
        stats.reason_filter_calls = ts.reason_filter_calls
        stats.total_checks = ts.total_checks
        stats.filter_time = ts.filter_time
        stats.oracle_checks = oracle.checks
        stats.oracle_rebuilds = oracle.rebuilds
        stats.models = nmodels


def solve_text(text: str, config: Optional[SolverConfig] = None) -> Result:
    return Solver(text, config).run()
