"""Reference semantics: brute-force checking and enumeration of constraint
answer sets.

A candidate is a pair (model, assignment).  The assignment fixes every theory
variable; each constraint atom must take exactly the truth value of its
constraint under the assignment, global constraints must hold outright, and
the model restricted to regular atoms must be a stable model of the program
reduced by the constraint-atom values.  Deliberately slow and simple: this
module is the yardstick the search engine is measured against.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Optional

from .core import IntegerOverflowError
from .grounder import GroundProgram


class _Rule:
    __slots__ = ("head", "choice", "pos", "neg", "reqs")

    def __init__(self, head: Optional[int], choice: bool, pos: int, neg: int, reqs: tuple):
        self.head = head
        self.choice = choice
        self.pos = pos
        self.neg = neg
        self.reqs = reqs  # (constraint atom, required sign) pairs


class _Card:
    __slots__ = ("lower", "upper", "elems", "pos", "neg", "reqs")

    def __init__(self, lower, upper, elems: int, pos: int, neg: int, reqs: tuple):
        self.lower = lower
        self.upper = upper
        self.elems = elems
        self.pos = pos
        self.neg = neg
        self.reqs = reqs


class BooleanChecker:
    """Bitmask evaluator for the regular part of a ground program."""

    def __init__(self, program: GroundProgram) -> None:
        self.program = program
        regular = [a for a in program.atoms if not a.is_constraint and not a.synthetic]
        self.names = [a.name for a in regular]
        self.bit = {name: i for i, name in enumerate(self.names)}
        self.rules: list[_Rule] = []
        self.integrity: list[_Rule] = []
        self.cards: list[_Card] = []
        gamma = program.gamma
        for rule in program.rules:
            pos = self._mask(rule.pos)
            neg = self._mask(rule.neg)
            reqs = self._reqs(rule.cpos, rule.cneg)
            if rule.chead is not None:
                lit = gamma.gamma_inverse(rule.chead)
                self.integrity.append(
                    _Rule(None, False, pos, neg, reqs + ((lit.atom, not lit.sign),))
                )
            elif rule.head is None:
                self.integrity.append(_Rule(None, False, pos, neg, reqs))
            else:
                self.rules.append(_Rule(self.bit[rule.head], rule.choice, pos, neg, reqs))
        for card in program.cardinality_rules:
            self.cards.append(
                _Card(
                    card.lower,
                    card.upper,
                    self._mask(card.atoms),
                    self._mask(card.pos),
                    self._mask(card.neg),
                    self._reqs(card.cpos, card.cneg),
                )
            )

    def _mask(self, names: Iterable[str]) -> int:
        mask = 0
        for name in names:
            mask |= 1 << self.bit[name]
        return mask

    def _reqs(self, cpos, cneg) -> tuple:
        gamma = self.program.gamma
        reqs = []
        for c in cpos:
            lit = gamma.gamma_inverse(c)
            reqs.append((lit.atom, lit.sign))
        for c in cneg:
            lit = gamma.gamma_inverse(c)
            reqs.append((lit.atom, not lit.sign))
        return tuple(reqs)

    # -- evaluation under one constraint-atom valuation ------------------------

    def _active(self, vec: dict) -> tuple:
        rules = [r for r in self.rules if all(vec[a] is s for a, s in r.reqs)]
        integrity = [r for r in self.integrity if all(vec[a] is s for a, s in r.reqs)]
        cards = [c for c in self.cards if all(vec[a] is s for a, s in c.reqs)]
        return rules, integrity, cards

    def stable(self, x: int, rules, integrity, cards) -> bool:
        for r in integrity:
            if r.pos & ~x == 0 and r.neg & x == 0:
                return False
        for c in cards:
            if c.pos & ~x == 0 and c.neg & x == 0:
                n = (x & c.elems).bit_count()
                if c.lower is not None and n < c.lower:
                    return False
                if c.upper is not None and n > c.upper:
                    return False
        lm = 0
        changed = True
        while changed:
            changed = False
            for r in rules:
                head_bit = 1 << r.head
                if lm & head_bit:
                    continue
                if r.choice and not (x & head_bit):
                    continue
                if r.neg & x:
                    continue
                if r.pos & ~lm == 0:
                    lm |= head_bit
                    changed = True
        return lm == x

    def stable_models(self, vec: dict) -> list[int]:
        rules, integrity, cards = self._active(vec)
        if len(self.names) > 22:
            raise ValueError("program too large for exhaustive checking")
        return [
            x
            for x in range(1 << len(self.names))
            if self.stable(x, rules, integrity, cards)
        ]


# ---------------------------------------------------------------------------


def iter_assignments(variables: list, domain: tuple):
    lo, hi = domain
    if (hi - lo + 1) ** max(len(variables), 1) > 10**7:
        raise ValueError("assignment space too large for exhaustive checking")
    values = range(lo, hi + 1)
    for combo in itertools.product(values, repeat=len(variables)):
        yield dict(zip(variables, combo))


def _constraint_vector(program: GroundProgram, assign: dict) -> Optional[dict]:
    vec = {}
    try:
        for atom in program.gamma.atoms():
            vec[atom] = program.gamma.forward(atom).evaluate(assign)
        for g in program.global_constraints:
            if not g.satisfied(assign):
                return None
    except IntegerOverflowError:
        return None
    return vec


def check_constraint_answer_set(program: GroundProgram, model: set, assign: dict) -> bool:
    """Is (model, assign) a constraint answer set of the program?"""
    for var in program.variables:
        if var not in assign:
            return False
        if not program.domain[0] <= assign[var] <= program.domain[1]:
            return False
    vec = _constraint_vector(program, assign)
    if vec is None:
        return False
    checker = BooleanChecker(program)
    x = 0
    for name in model:
        bit = checker.bit.get(name)
        if bit is None:
            raise ValueError(f"unknown atom {name!r} in model")
        x |= 1 << bit
    rules, integrity, cards = checker._active(vec)
    return checker.stable(x, rules, integrity, cards)


def oracle_model_set(program: GroundProgram) -> set:
    """All constraint answer sets, projected to Boolean assignments.

    Returns pairs (true regular atoms, true constraint atoms); a pair is
    included when at least one witness assignment exists for it.
    """
    checker = BooleanChecker(program)
    vectors: dict = {}
    for assign in iter_assignments(program.variables, program.domain):
        vec = _constraint_vector(program, assign)
        if vec is None:
            continue
        vectors.setdefault(tuple(sorted(vec.items())), vec)
    out = set()
    name_of = program.atoms.name
    for key, vec in vectors.items():
        catoms = frozenset(name_of(a) for a, v in vec.items() if v)
        for x in checker.stable_models(vec):
            atoms = frozenset(
                name for name, bit in checker.bit.items() if x & (1 << bit)
            )
            out.add((atoms, catoms))
    return out


def oracle_witnesses(program: GroundProgram, model: set) -> list:
    """All assignments witnessing a given regular-atom model."""
    checker = BooleanChecker(program)
    x = 0
    for name in model:
        x |= 1 << checker.bit[name]
    out = []
    for assign in iter_assignments(program.variables, program.domain):
        vec = _constraint_vector(program, assign)
        if vec is None:
            continue
        if checker.stable(x, *checker._active(vec)):
            out.append(assign)
    return out
