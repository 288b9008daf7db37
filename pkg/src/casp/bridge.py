"""Theory propagation bridging the Boolean engine and the constraint space.

Registered as a post propagator: newly assigned constraint literals are
mirrored (via the constraint-atom mapping) into a monotone space, failures
come back as filtered conflict nogoods, entailed constraint atoms come back
as implied literals with filtered reasons, and total assignments are checked
for a concrete variable witness (optimizing it when objectives are present).
Spaces are restored on backjump from per-level snapshots, or rebuilt from
the posted trail when snapshots are disabled.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from .cdcl import Engine, PostPropagator
from .core import ArithConstraint, Const, Lit, Relation, constraint_variables
from .csp import Space, SpaceBuilder
from .iis import (
    FILTERS,
    ConsistencyOracle,
    FilterError,
    _close_over,
    cc_range_filtering,
    conflict_nogood,
    reason_nogood,
    simple_filtering,
)
from .translate import CompiledProgram


@dataclass
class TheoryConfig:
    conflict_filter: str = "simple"
    reason_filter: str = "simple"
    delay: int = 1
    probe_entail: bool = False
    snapshot: bool = True
    opt_all: bool = False


@dataclass
class TheoryStats:
    conflict_filter_calls: int = 0
    reason_filter_calls: int = 0
    theory_propagations: int = 0
    theory_conflicts: int = 0
    total_checks: int = 0
    filter_time: float = 0.0


class _SuffixChain:
    """Shared scaffolding for connected-scan reason filtering over one scan.

    When the seen-variable closure of a probe already covers every variable
    of the posted prefix, the connected back-to-front scan admits the whole
    prefix in suffix order, so its result is the shortest suffix that is
    inconsistent together with the negated consequence.  Suffix
    inconsistency is monotone in the suffix length, so that length can be
    found by galloping search over a lazily grown chain of spaces, each
    extending the previous one by the next prefix entry from the back.  The
    chain (and the work of building it) is shared by every probe of the
    same propagation scan; the result is identical to running the scan
    directly."""

    def __init__(self, builder: SpaceBuilder, constraints, lits) -> None:
        self.items = list(reversed(constraints))
        self.lits = list(reversed(lits))
        self.groups = _base_groups_of(builder)
        all_vars: set = set()
        for c in constraints:
            all_vars |= constraint_variables(c)
        self.all_vars = all_vars
        self.spaces = [builder.fresh()]  # spaces[t] holds base + items[:t]

    def _space(self, t: int) -> Optional[Space]:
        while len(self.spaces) <= t:
            nxt = self.spaces[-1].copy()
            if not nxt.post(self.items[len(self.spaces) - 1]):
                return None  # suffix alone inconsistent: leave to the scan
            self.spaces.append(nxt)
        return self.spaces[t]

    def _fails(self, t: int, neg_c: ArithConstraint) -> Optional[bool]:
        sp = self._space(t)
        if sp is None:
            return None
        # a definite entailment verdict decides the probe without posting
        val = sp.entail(neg_c)
        if val is not None:
            return not val
        return not sp.copy().post(neg_c)

    def reason(self, neg_c: ArithConstraint, lit: Lit) -> Optional[frozenset]:
        """The filtered reason nogood, or None when the scan must run."""
        omega = _close_over(set(constraint_variables(neg_c)), self.groups)
        if not self.all_vars <= omega:
            return None
        n = len(self.items)
        lo, t = 0, 0
        while True:
            failed = self._fails(t, neg_c)
            if failed is None:
                return None
            if failed:
                break
            if t >= n:
                return None  # even the full suffix is consistent: bail out
            lo, t = t, (1 if t == 0 else min(n, t * 2))
        hi = t
        while hi - lo > 1:
            mid = (lo + hi) // 2
            failed = self._fails(mid, neg_c)
            if failed is None:
                return None
            if failed:
                hi = mid
            else:
                lo = mid
        return frozenset(self.lits[:hi]) | {lit.neg()}


def _base_groups_of(builder: SpaceBuilder) -> list:
    groups = []
    for c in builder.base:
        cvars = constraint_variables(c)
        if len(cvars) > 1:
            groups.append(cvars)
    return groups


class TheoryPropagator(PostPropagator):
    def __init__(
        self,
        compiled: CompiledProgram,
        config: Optional[TheoryConfig] = None,
        objectives: Optional[list] = None,
    ) -> None:
        self.config = config or TheoryConfig()
        self.atoms = compiled.atoms
        self.gamma = compiled.gamma
        program = compiled.program
        self.builder = SpaceBuilder(
            program.variables, program.domain, list(program.global_constraints)
        )
        self.oracle = ConsistencyOracle(self.builder)
        self.conflict_filter = FILTERS[self.config.conflict_filter]
        self.reason_filter = FILTERS[self.config.reason_filter]
        self.stats = TheoryStats()
        # A|C mirrored in assignment order, with gamma applied alongside
        self.lits: list[Lit] = []
        self.constraints: list[ArithConstraint] = []
        self.levels: list[int] = []
        self.posted = 0
        self.synced = 0
        self.space: Optional[Space] = None
        self.snapshots: dict[int, tuple] = {}
        self.last_snap: Optional[tuple] = None
        self.calls = 0
        self.touched: set = set(self.builder.variables)
        self.objectives: list = list(objectives or [])
        self.bounds: list[ArithConstraint] = []
        self.witness: Optional[dict] = None
        self.witness_values: list = []

    # -- mirroring ------------------------------------------------------------

    def _sync(self, engine: Engine) -> None:
        trail = engine.trail
        while self.synced < len(trail.lits):
            lit = trail.lits[self.synced]
            self.synced += 1
            if self.atoms.is_constraint(lit.atom):
                self.lits.append(lit)
                self.constraints.append(self.gamma.gamma(lit))
                self.levels.append(trail.level_of(lit.atom))

    def _ensure_space(self) -> None:
        if self.space is None:
            self.space = self.builder.fresh()
            self.posted = 0
            self.touched = set(self.builder.variables)

    # -- post propagator interface ---------------------------------------------

    def propagate(self, engine: Engine):
        self._sync(engine)
        self.calls += 1
        n = self.config.delay
        if n == 0 or (n > 1 and self.calls % n != 0):
            return None
        return self._flush(engine, scan=True)

    def on_total(self, engine: Engine):
        self._sync(engine)
        self.stats.total_checks += 1
        self.witness = None
        self.witness_values = []
        conflict = self._flush(engine, scan=False)
        if conflict is not None:
            return conflict
        space = self.space
        assert space is not None
        space.deadline = engine.deadline
        if self.objectives:
            got = space.branch_and_bound(self.objectives)
            if got is not None:
                self.witness, self.witness_values = got
        else:
            self.witness = space.solve()
        if self.witness is not None:
            return None
        # Propagation accepted the posted list but search found no witness:
        # the whole constraint-literal assignment is jointly unsatisfiable.
        return frozenset(self.lits)

    def on_backjump(self, engine: Engine, level: int) -> None:
        cut = len(self.levels)
        while cut > 0 and self.levels[cut - 1] > level:
            cut -= 1
        del self.lits[cut:]
        del self.constraints[cut:]
        del self.levels[cut:]
        self.synced = len(engine.trail.lits)
        for l in [l for l in self.snapshots if l > level]:
            del self.snapshots[l]
        self.last_snap = None
        if self.config.snapshot and self.snapshots:
            best = max(l for l in self.snapshots if l <= level)
            space, posted, nlits = self.snapshots[best]
            assert posted <= cut and nlits <= cut
            self.space = space.copy()
            self.posted = posted
            self.touched = set(self.builder.variables)
        else:
            self.space = None
            self.posted = 0

    # -- posting and scanning ----------------------------------------------------

    def _absorb_root(self) -> None:
        """Fold root-level mirror entries into the ambient base.

        Constraint literals assigned at decision level 0 are permanent for
        the rest of the run, exactly like objective bounds: every
        consistency session includes them regardless, so moving them into
        the builder lets sessions start from the root-propagated space and
        keeps filter scans to the backtrackable part of the trail."""
        k = 0
        while k < len(self.levels) and self.levels[k] == 0:
            k += 1
        if k == 0:
            return
        self.builder.base.extend(self.constraints[:k])
        del self.lits[:k]
        del self.constraints[:k]
        del self.levels[:k]
        self.invalidate()

    def _flush(self, engine: Engine, scan: bool):
        if self.levels and self.levels[0] == 0 and engine.trail.level > 0:
            self._absorb_root()
        self._ensure_space()
        space = self.space
        if space.failed:
            return self._conflict()
        while self.posted < len(self.constraints):
            c = self.constraints[self.posted]
            self.posted += 1
            if not space.post(c):
                return self._conflict()
        result = None
        if scan:
            result = self._entail_scan(engine)
        if result is None and self.config.snapshot:
            state = (engine.trail.level, self.posted, len(self.lits))
            if state != self.last_snap:
                self.snapshots[engine.trail.level] = (
                    space.copy(),
                    self.posted,
                    len(self.lits),
                )
                self.last_snap = state
        return result

    def _conflict(self):
        self.stats.theory_conflicts += 1
        self.stats.conflict_filter_calls += 1
        full = list(self.constraints)
        start = time.perf_counter()
        try:
            filtered = self.conflict_filter(full, self.oracle)
        except FilterError:
            filtered = full
        self.stats.filter_time += time.perf_counter() - start
        return conflict_nogood(filtered, self.gamma)

    def _entail_scan(self, engine: Engine):
        space = self.space
        scan_vars = self.touched | space.touched
        self.touched = set()
        space.touched.clear()
        if not scan_vars:
            return None
        trail = engine.trail
        posted = self.constraints[: self.posted]
        chain: Optional[_SuffixChain] = None
        if self.reason_filter is cc_range_filtering:
            chain = _SuffixChain(self.builder, posted, self.lits[: self.posted])
        for atom in self.gamma.atoms():
            if trail.value(atom) is not None:
                continue
            c = self.gamma.forward(atom)
            if not (constraint_variables(c) & scan_vars):
                continue
            val = space.entail(c)
            if val is None and self.config.probe_entail:
                val = self._probe(space, c)
            if val is None:
                continue
            lit = Lit(atom, val)
            self.stats.reason_filter_calls += 1
            self.stats.theory_propagations += 1
            start = time.perf_counter()
            if self.reason_filter is simple_filtering:
                # the mirror already knows the literals of the posted prefix
                reason = frozenset(self.lits[: self.posted]) | {lit.neg()}
            else:
                reason = None
                if chain is not None:
                    reason = chain.reason(self.gamma.gamma(lit.neg()), lit)
                if reason is None:
                    reason = reason_nogood(
                        posted, lit, self.gamma, self.oracle, self.reason_filter
                    )
            self.stats.filter_time += time.perf_counter() - start
            engine.assign(lit, tuple(reason))
        return None

    @staticmethod
    def _probe(space: Space, c: ArithConstraint) -> Optional[bool]:
        trial = space.copy()
        if not trial.post(c):
            return False
        trial = space.copy()
        if not trial.post(c.complement()):
            return True
        return None

    # -- optimization --------------------------------------------------------------

    def add_bound(self, values: list) -> None:
        """Bound future witnesses by the best objective vector seen so far."""
        for c in self.bounds:
            self.builder.base.remove(c)
        self.bounds = []
        sense, expr = self.objectives[0]
        strict = len(self.objectives) == 1 and not self.config.opt_all
        if sense == "minimize":
            rel = Relation.LT if strict else Relation.LE
        else:
            rel = Relation.GT if strict else Relation.GE
        bound = ArithConstraint(expr, rel, Const(values[0]))
        self.bounds.append(bound)
        self.builder.base.append(bound)
        self.invalidate()

    def preload_bound(self, value: int) -> None:
        """Start the search from a user-provided objective value."""
        sense, expr = self.objectives[0]
        strict = not self.config.opt_all
        if sense == "minimize":
            rel = Relation.LT if strict else Relation.LE
        else:
            rel = Relation.GT if strict else Relation.GE
        bound = ArithConstraint(expr, rel, Const(value))
        self.bounds.append(bound)
        self.builder.base.append(bound)
        self.invalidate()

    def invalidate(self) -> None:
        self.builder.invalidate()
        self.snapshots = {}
        self.last_snap = None
        self.space = None
        self.posted = 0


# ---------------------------------------------------------------------------
# Initial lookahead


def initial_lookahead(compiled: CompiledProgram) -> list:
    """Probe every constraint literal in isolation and harvest the binary
    nogoods between constraint atoms it implies (plus unary nogoods for
    literals that are inconsistent on their own)."""
    program = compiled.program
    gamma = compiled.gamma
    builder = SpaceBuilder(
        program.variables, program.domain, list(program.global_constraints)
    )
    catoms = gamma.atoms()
    seen: set = set()
    out: list = []

    def emit(ng: frozenset) -> None:
        if ng not in seen:
            seen.add(ng)
            out.append(ng)

    for atom in catoms:
        for sign in (True, False):
            lit = Lit(atom, sign)
            space = builder.fresh()
            if not space.post(gamma.gamma(lit)):
                emit(frozenset([lit]))
                continue
            for other in catoms:
                if other == atom:
                    continue
                c = gamma.forward(other)
                val = space.entail(c)
                if val is None:
                    val = TheoryPropagator._probe(space, c)
                if val is None:
                    continue
                # forbid `lit` together with the complement of the implication
                emit(frozenset([lit, Lit(other, not val)]))
    return out
