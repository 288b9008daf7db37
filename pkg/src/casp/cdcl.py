"""Conflict-driven nogood learning over Boolean atoms.

A nogood is a set of signed literals that no solution may contain.  The
engine watches two literals per nogood, propagates units, analyses conflicts
to the first unique implication point, backjumps, and enumerates models via
blocking nogoods over the decision literals.  Theory reasoning plugs in
through post propagators invoked at propagation fixpoints and on total
assignments.
"""

from __future__ import annotations

import heapq
import random
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .core import F, Lit, T, Trail

VAR_DECAY = 0.95
RESTART_BASE = 100
RESTART_FACTOR = 1.5


class SolveTimeout(Exception):
    """The configured deadline expired during search."""


@dataclass
class EngineStats:
    decisions: int = 0
    conflicts: int = 0
    propagations: int = 0
    restarts: int = 0
    learnt_count: int = 0
    learnt_literals: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


class PostPropagator:
    """Extension point run at unit-propagation fixpoints."""

    def propagate(self, engine: "Engine") -> Optional[Iterable[Lit]]:
        """Do theory propagation; return a conflict nogood or None."""
        return None

    def on_backjump(self, engine: "Engine", level: int) -> None:
        pass

    def on_total(self, engine: "Engine") -> Optional[Iterable[Lit]]:
        """Accept (None) or reject (a nogood) a total assignment."""
        return None

    def on_model(self, engine: "Engine") -> None:
        pass


class Engine:
    def __init__(self, natoms: int, seed: int = 0) -> None:
        self.natoms = natoms
        self.trail = Trail(natoms)
        self.stats = EngineStats()
        self.unsat = False
        self.qhead = 0
        self.ngs: list[tuple] = []
        self.wpair: list[list] = []
        self.watches: list[list] = [[] for _ in range(2 * natoms)]
        self.post_propagators: list[PostPropagator] = []
        rng = random.Random(seed)
        self.activity = [rng.random() * 1e-4 for _ in range(natoms)]
        self.var_inc = 1.0
        self.phase = [False] * natoms
        self.heap: list[tuple] = []
        for atom in range(natoms):
            heapq.heappush(self.heap, (-self.activity[atom], atom))
        self.enumerating = False
        self.restart_limit = float(RESTART_BASE)
        self.conflicts_since_restart = 0
        self.deadline: Optional[float] = None

    # -- bookkeeping -----------------------------------------------------------

    @staticmethod
    def _slot(lit: Lit) -> int:
        return 2 * lit.atom + (1 if lit.sign else 0)

    def value(self, atom: int) -> Optional[bool]:
        return self.trail.value(atom)

    def register_post(self, pp: PostPropagator) -> None:
        self.post_propagators.append(pp)

    def bump(self, atom: int) -> None:
        self.activity[atom] += self.var_inc
        if self.activity[atom] > 1e100:
            for i in range(self.natoms):
                self.activity[i] *= 1e-100
            self.var_inc *= 1e-100
        heapq.heappush(self.heap, (-self.activity[atom], atom))

    def decay(self) -> None:
        self.var_inc /= VAR_DECAY

    # -- nogood management -----------------------------------------------------

    def add_nogood(self, lits: Iterable[Lit]) -> bool:
        """Add a nogood; returns False when it makes the problem unsatisfiable
        at the root.  Must be called with consistent watches available."""
        unique = list(dict.fromkeys(lits))
        if any(l.neg() in unique for l in unique):
            return True  # vacuous
        if not unique:
            self.unsat = True
            return False
        if len(unique) == 1:
            lit = unique[0]
            if self.trail.holds(lit):
                if self.trail.level > 0:
                    raise ValueError("unit nogood added above the root level")
                self.unsat = True
                return False
            if not self.trail.falsified(lit):
                self.assign(lit.neg(), tuple(unique))
            return True
        self._attach(tuple(unique))
        return True

    def _attach(self, lits: tuple) -> None:
        ng_id = len(self.ngs)
        self.ngs.append(lits)
        by_pref = sorted(lits, key=self._watch_rank)
        pair = [by_pref[0], by_pref[1]]
        self.wpair.append(pair)
        self.watches[self._slot(pair[0])].append(ng_id)
        self.watches[self._slot(pair[1])].append(ng_id)

    def _watch_rank(self, lit: Lit) -> tuple:
        v = self.trail.value(lit.atom)
        if v is None:
            return (0, 0)
        if v is not lit.sign:
            return (1, -self.trail.level_of(lit.atom))
        return (2, -self.trail.level_of(lit.atom))

    # -- propagation -----------------------------------------------------------

    def assign(self, lit: Lit, reason: Optional[tuple]) -> None:
        self.trail.assign(lit, reason)
        self.stats.propagations += 1

    def propagate(self) -> Optional[tuple]:
        """Unit propagation to fixpoint; returns a violated nogood or None."""
        trail = self.trail
        while self.qhead < len(trail.lits):
            lit = trail.lits[self.qhead]
            self.qhead += 1
            slot = self._slot(lit)
            old = self.watches[slot]
            kept: list = []
            conflict = None
            for pos, ng_id in enumerate(old):
                lits = self.ngs[ng_id]
                pair = self.wpair[ng_id]
                if pair[0] == lit:
                    this, other = lit, pair[1]
                else:
                    this, other = lit, pair[0]
                moved = False
                for cand in lits:
                    if cand == this or cand == other:
                        continue
                    if not trail.holds(cand):
                        pair[0] = other
                        pair[1] = cand
                        self.watches[self._slot(cand)].append(ng_id)
                        moved = True
                        break
                if moved:
                    continue
                kept.append(ng_id)
                ov = trail.value(other.atom)
                if ov is None:
                    self.assign(other.neg(), lits)
                elif ov is other.sign:
                    conflict = lits
                    kept.extend(old[pos + 1 :])
                    break
            self.watches[slot] = kept
            if conflict is not None:
                return conflict
        return None

    def propagate_full(self) -> Optional[tuple]:
        """Unit propagation interleaved with post propagators to fixpoint."""
        while True:
            conflict = self.propagate()
            if conflict is not None:
                return conflict
            before = len(self.trail.lits)
            for pp in self.post_propagators:
                theory_conflict = pp.propagate(self)
                if theory_conflict is not None:
                    return tuple(theory_conflict)
                if len(self.trail.lits) != before:
                    break
            if len(self.trail.lits) == before:
                return None

    # -- conflict analysis ------------------------------------------------------

    def analyze(self, conflict: tuple) -> tuple:
        """1UIP resolution; returns (learnt nogood lits, backjump level)."""
        trail = self.trail
        level = trail.level
        seen = set()
        learnt: list = []
        counter = 0
        idx = len(trail.lits) - 1
        p: Optional[Lit] = None
        reason: Iterable[Lit] = conflict
        while True:
            for lit in reason:
                if p is not None and lit == p.neg():
                    continue
                if lit.atom in seen:
                    continue
                seen.add(lit.atom)
                self.bump(lit.atom)
                l = trail.level_of(lit.atom)
                if l == level:
                    counter += 1
                elif l > 0:
                    learnt.append(lit)
            while True:
                t = trail.lits[idx]
                idx -= 1
                if t.atom in seen and trail.level_of(t.atom) == level:
                    break
            p = t
            counter -= 1
            if counter == 0:
                break
            reason = trail.reason_of(p.atom)
            assert reason is not None, "non-decision literal without a reason"
        learnt.append(p)
        back = max((trail.level_of(l.atom) for l in learnt[:-1]), default=0)
        return learnt, back

    def handle_conflict(self, conflict: tuple) -> bool:
        """Learn from a conflict; False when the search space is exhausted."""
        self.stats.conflicts += 1
        self.conflicts_since_restart += 1
        self.decay()
        trail = self.trail
        levels = [trail.level_of(l.atom) for l in conflict]
        top = max(levels, default=0)
        if top == 0:
            self.unsat = True
            return False
        if top < trail.level:
            self.backjump(top)
        learnt, back = self.analyze(tuple(conflict))
        self.stats.learnt_count += 1
        self.stats.learnt_literals += len(learnt)
        self.backjump(back)
        uip = learnt[-1]
        if len(learnt) == 1:
            self.assign(uip.neg(), tuple(learnt))
        else:
            self._attach(tuple(learnt))
            self.assign(uip.neg(), tuple(learnt))
        return True

    def backjump(self, level: int) -> None:
        removed = self.trail.backjump(level)
        for lit in removed:
            self.phase[lit.atom] = lit.sign
            heapq.heappush(self.heap, (-self.activity[lit.atom], lit.atom))
        self.qhead = min(self.qhead, len(self.trail.lits))
        for pp in self.post_propagators:
            pp.on_backjump(self, level)

    # -- search ------------------------------------------------------------------

    def _pick_atom(self) -> Optional[int]:
        trail = self.trail
        while self.heap:
            act, atom = self.heap[0]
            if trail.value(atom) is not None or -act != self.activity[atom]:
                heapq.heappop(self.heap)
                continue
            return atom
        return None

    def decide(self, atom: int) -> None:
        self.trail.new_level()
        self.stats.decisions += 1
        self.trail.assign(Lit(atom, self.phase[atom]), None)

    def _check_deadline(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise SolveTimeout

    def models(self):
        """Yield total assignments (as literal lists) until exhaustion."""
        if self.unsat:
            return
        while True:
            self._check_deadline()
            conflict = self.propagate_full()
            if conflict is not None:
                if not self.handle_conflict(conflict):
                    return
                continue
            atom = self._pick_atom()
            if atom is None:
                reject = None
                for pp in self.post_propagators:
                    reject = pp.on_total(self)
                    if reject is not None:
                        break
                if reject is not None:
                    if not self.handle_conflict(tuple(reject)):
                        return
                    continue
                for pp in self.post_propagators:
                    pp.on_model(self)
                self.enumerating = True
                yield list(self.trail.lits)
                blocking = self.trail.decisions()
                if not blocking:
                    return
                if not self.handle_conflict(tuple(blocking)):
                    return
                continue
            if (
                not self.enumerating
                and self.conflicts_since_restart >= self.restart_limit
            ):
                self.stats.restarts += 1
                self.restart_limit *= RESTART_FACTOR
                self.conflicts_since_restart = 0
                self.backjump(0)
                continue
            self.decide(atom)
