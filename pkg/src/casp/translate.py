"""Translate a tight ground program into the initial nogood store.

Clark completion: every rule body becomes a shared body literal (a fresh atom
for conjunctions of size two or more), bodies force non-choice heads, and
every head atom needs one of its bodies as support.  Theory-headed rules are
shifted into the negative body.  Cardinality bounds compile to a sequential
counter built from and/or gates with constant folding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .core import F, Lit, T, make_nogood
from .grounder import CardinalityRule, GroundProgram, GroundRule


class TranslateError(Exception):
    pass


TRUE = "true"
FALSE = "false"
GateValue = Union[Lit, str]  # a literal or one of the two constants


@dataclass
class CompiledProgram:
    program: GroundProgram
    nogoods: list = field(default_factory=list)
    choice_atoms: set = field(default_factory=set)
    body_literals: dict = field(default_factory=dict)  # body key -> Lit
    unsat: bool = False

    @property
    def atoms(self):
        return self.program.atoms

    @property
    def gamma(self):
        return self.program.gamma


class _Translator:
    def __init__(self, program: GroundProgram) -> None:
        self.program = program
        self.out = CompiledProgram(program)
        self.seen: set = set()
        self.gate_cache: dict = {}

    def add(self, lits) -> None:
        ng = make_nogood(lits)
        if ng is None:
            return
        if not ng:
            self.out.unsat = True
        if ng not in self.seen:
            self.seen.add(ng)
            self.out.nogoods.append(ng)

    # -- body literals -------------------------------------------------------

    def body_lits(self, rule) -> list:
        gamma = self.program.gamma
        atoms = self.program.atoms
        lits = [T(atoms.intern(a)) for a in rule.pos]
        lits += [F(atoms.intern(a)) for a in rule.neg]
        lits += [gamma.gamma_inverse(c) for c in rule.cpos]
        lits += [gamma.gamma_inverse(c).neg() for c in rule.cneg]
        return lits

    def body_literal(self, lits: list) -> GateValue:
        """The literal standing for a body conjunction (shared)."""
        return self.and_gate(lits, "body")

    # -- gates ---------------------------------------------------------------

    def and_gate(self, lits: list, hint: str) -> GateValue:
        folded = []
        for lit in lits:
            if lit is TRUE:
                continue
            if lit is FALSE:
                return FALSE
            folded.append(lit)
        unique = list(dict.fromkeys(folded))
        for lit in unique:
            if lit.neg() in unique:
                return FALSE
        if not unique:
            return TRUE
        if len(unique) == 1:
            return unique[0]
        key = ("and", frozenset(unique))
        got = self.gate_cache.get(key)
        if got is not None:
            return got
        atom = self.program.atoms.fresh(hint)
        gate = T(atom)
        self.gate_cache[key] = gate
        if hint == "body":
            self.out.body_literals[frozenset(unique)] = gate
        self.add([F(atom)] + unique)
        for lit in unique:
            self.add([T(atom), lit.neg()])
        return gate

    def or_gate(self, lits: list, hint: str) -> GateValue:
        folded = []
        for lit in lits:
            if lit is FALSE:
                continue
            if lit is TRUE:
                return TRUE
            folded.append(lit)
        unique = list(dict.fromkeys(folded))
        for lit in unique:
            if lit.neg() in unique:
                return TRUE
        if not unique:
            return FALSE
        if len(unique) == 1:
            return unique[0]
        key = ("or", frozenset(unique))
        got = self.gate_cache.get(key)
        if got is not None:
            return got
        atom = self.program.atoms.fresh(hint)
        gate = T(atom)
        self.gate_cache[key] = gate
        self.add([T(atom)] + [l.neg() for l in unique])
        for lit in unique:
            self.add([F(atom), lit])
        return gate

    # -- rules ---------------------------------------------------------------

    def run(self) -> CompiledProgram:
        program = self.program
        atoms = program.atoms
        supports: dict = {}  # head atom -> list of body GateValue
        for name in program.choice_atoms:
            self.out.choice_atoms.add(atoms.intern(name))
        for rule in program.rules:
            lits = self.body_lits(rule)
            if rule.chead is not None:
                clit = program.gamma.gamma_inverse(rule.chead)
                self.add(lits + [clit.neg()])
                continue
            if rule.head is None:
                self.add(lits)
                continue
            head = atoms.intern(rule.head)
            beta = self.body_literal(lits)
            supports.setdefault(head, []).append(beta)
            if not rule.choice and beta is not FALSE:
                if beta is TRUE:
                    self.add([F(head)])
                else:
                    self.add([beta, F(head)])
        for card in program.cardinality_rules:
            self.cardinality(card)
        for atom in atoms:
            if atom.is_constraint or atom.synthetic:
                continue
            bodies = supports.get(atom.index)
            if bodies is None:
                bodies = []
            if any(b is TRUE for b in bodies):
                continue
            bodies = [b for b in bodies if b is not FALSE]
            self.add([T(atom.index)] + [b.neg() for b in bodies])
        return self.out

    # -- cardinality ---------------------------------------------------------

    def cardinality(self, card: CardinalityRule) -> None:
        n = len(card.atoms)
        lower = card.lower if card.lower is not None and card.lower > 0 else None
        upper = card.upper if card.upper is not None and card.upper < n else None
        if card.lower is not None and card.upper is not None and card.lower > card.upper:
            raise TranslateError(
                f"cardinality bounds {card.lower} > {card.upper} can never hold"
            )
        if upper is not None and upper < 0:
            raise TranslateError(f"negative upper bound {upper}")
        body = self.body_lits(card)
        if lower is not None and lower > n:
            self.add(body)  # unsatisfiable whenever the body holds
            return
        if lower is None and upper is None:
            return
        elems = [T(self.program.atoms.intern(a)) for a in card.atoms]
        width = (upper + 1) if upper is not None else lower
        # counts[j] is "at least j+1 of the elements seen so far are true"
        counts: list = []
        for i, elem in enumerate(elems):
            nxt = min(i + 1, width)
            new_counts = list(counts) + [FALSE] * (nxt - len(counts))
            for j in range(nxt - 1, -1, -1):
                carry = counts[j - 1] if j > 0 else TRUE
                conj = self.and_gate([carry, elem], "cnt")
                prev = counts[j] if j < len(counts) else FALSE
                new_counts[j] = self.or_gate([prev, conj], "cnt")
            counts = new_counts
        if lower is not None:
            self.require(body, counts[lower - 1])
        if upper is not None:
            self.require(body, self.negate(counts[upper]))

    def negate(self, value: GateValue) -> GateValue:
        if value is TRUE:
            return FALSE
        if value is FALSE:
            return TRUE
        return value.neg()

    def require(self, body: list, value: GateValue) -> None:
        """Whenever the body holds, `value` must hold."""
        if value is TRUE:
            return
        if value is FALSE:
            self.add(body)
            return
        self.add(body + [value.neg()])


def translate(program: GroundProgram) -> CompiledProgram:
    """Compile a tight ground program to its initial nogoods."""
    return _Translator(program).run()
