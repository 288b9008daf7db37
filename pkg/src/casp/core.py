"""Core vocabulary shared across the solver: atoms, signed literals, nogoods,
integer expression trees, theory constraints and the constraint-atom mapping."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class IntegerOverflowError(ArithmeticError):
    """Integer arithmetic left the signed 64-bit range."""


class MappingError(Exception):
    """Unknown constraint atom, or a constraint that was never registered."""


def check64(value: int) -> int:
    if value < INT64_MIN or value > INT64_MAX:
        raise IntegerOverflowError(f"value {value} exceeds the 64-bit integer range")
    return value


def checked_add(a: int, b: int) -> int:
    return check64(a + b)


def checked_sub(a: int, b: int) -> int:
    return check64(a - b)


def checked_mul(a: int, b: int) -> int:
    return check64(a * b)


# ---------------------------------------------------------------------------
# Signed literals and nogoods


class Lit(NamedTuple):
    """A signed literal: the claim that `atom` is assigned `sign`."""

    atom: int
    sign: bool

    def neg(self) -> "Lit":
        return Lit(self.atom, not self.sign)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"{'T' if self.sign else 'F'}{self.atom}"


def T(atom: int) -> Lit:
    return Lit(atom, True)


def F(atom: int) -> Lit:
    return Lit(atom, False)


Nogood = frozenset  # of Lit


def make_nogood(lits: Iterable[Lit]) -> Optional[frozenset]:
    """Build a nogood from literals.

    Returns None when some atom occurs with both signs: such a nogood can
    never be contained in an assignment and must be discarded.
    """
    ng = frozenset(lits)
    atoms = set()
    for lit in ng:
        if lit.atom in atoms and lit.neg() in ng:
            return None
        atoms.add(lit.atom)
    return ng


def format_lit(lit: Lit, atoms: "AtomTable") -> str:
    return f"{'T' if lit.sign else 'F'} {atoms.name(lit.atom)}"


# ---------------------------------------------------------------------------
# Atom table


@dataclass
class Atom:
    index: int
    name: str
    is_constraint: bool = False
    synthetic: bool = False


class AtomTable:
    """Dense symbol table mapping atom names to integer ids."""

    def __init__(self) -> None:
        self._atoms: list[Atom] = []
        self._index: dict[str, int] = {}

    def __len__(self) -> int:
        return len(self._atoms)

    def __iter__(self) -> Iterator[Atom]:
        return iter(self._atoms)

    def intern(self, name: str, *, is_constraint: bool = False, synthetic: bool = False) -> int:
        got = self._index.get(name)
        if got is not None:
            atom = self._atoms[got]
            if atom.is_constraint != is_constraint:
                raise MappingError(f"atom {name!r} registered with conflicting kinds")
            return got
        idx = len(self._atoms)
        self._atoms.append(Atom(idx, name, is_constraint, synthetic))
        self._index[name] = idx
        return idx

    def fresh(self, hint: str) -> int:
        """Create a synthetic helper atom with a unique name."""
        name = f"__{hint}_{len(self._atoms)}"
        while name in self._index:
            name += "'"
        return self.intern(name, synthetic=True)

    def lookup(self, name: str) -> Optional[int]:
        return self._index.get(name)

    def name(self, atom: int) -> str:
        return self._atoms[atom].name

    def is_constraint(self, atom: int) -> bool:
        return self._atoms[atom].is_constraint

    def is_synthetic(self, atom: int) -> bool:
        return self._atoms[atom].synthetic


# ---------------------------------------------------------------------------
# Arithmetic expressions over integer-valued theory variables


class Expr:
    """Base class for integer expression trees."""

    def variables(self) -> tuple[str, ...]:
        raise NotImplementedError

    def evaluate(self, env: dict) -> int:
        raise NotImplementedError

    def render(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class Const(Expr):
    value: int

    def variables(self) -> tuple[str, ...]:
        return ()

    def evaluate(self, env: dict) -> int:
        return self.value

    def render(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class VarRef(Expr):
    name: str

    def variables(self) -> tuple[str, ...]:
        return (self.name,)

    def evaluate(self, env: dict) -> int:
        return env[self.name]

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - *
    left: Expr
    right: Expr

    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for v in self.left.variables() + self.right.variables():
            seen.setdefault(v)
        return tuple(seen)

    def evaluate(self, env: dict) -> int:
        a = self.left.evaluate(env)
        b = self.right.evaluate(env)
        if self.op == "+":
            return checked_add(a, b)
        if self.op == "-":
            return checked_sub(a, b)
        if self.op == "*":
            return checked_mul(a, b)
        raise ValueError(f"unknown operator {self.op!r}")

    def render(self) -> str:
        return f"{self._wrap(self.left)}${self.op}{self._wrap(self.right, right=True)}"

    def _wrap(self, child: Expr, right: bool = False) -> str:
        text = child.render()
        if isinstance(child, BinOp):
            weaker = child.op in "+-" and self.op == "*"
            # subtraction is not associative on the right
            same = right and self.op == "-" and child.op in "+-"
            if weaker or same:
                return f"({text})"
        return text


@dataclass(frozen=True)
class AbsOp(Expr):
    arg: Expr

    def variables(self) -> tuple[str, ...]:
        return self.arg.variables()

    def evaluate(self, env: dict) -> int:
        return abs(self.arg.evaluate(env))

    def render(self) -> str:
        return f"$abs({self.arg.render()})"


def canonical_expr(e: Expr) -> Expr:
    """Sort the operands of commutative operators so that structurally equal
    constraints written in a different order intern to the same atom."""
    if isinstance(e, BinOp):
        left = canonical_expr(e.left)
        right = canonical_expr(e.right)
        if e.op in "+*" and left.render() > right.render():
            left, right = right, left
        return BinOp(e.op, left, right)
    if isinstance(e, AbsOp):
        return AbsOp(canonical_expr(e.arg))
    return e


# ---------------------------------------------------------------------------
# Relations and constraints


class Relation(Enum):
    EQ = "$=="
    NE = "$!="
    LT = "$<"
    LE = "$<="
    GT = "$>"
    GE = "$>="

    @property
    def symbol(self) -> str:
        return self.value

    @property
    def complement(self) -> "Relation":
        return _COMPLEMENT[self]

    def holds(self, a: int, b: int) -> bool:
        if self is Relation.EQ:
            return a == b
        if self is Relation.NE:
            return a != b
        if self is Relation.LT:
            return a < b
        if self is Relation.LE:
            return a <= b
        if self is Relation.GT:
            return a > b
        return a >= b


_COMPLEMENT = {
    Relation.EQ: Relation.NE,
    Relation.NE: Relation.EQ,
    Relation.LT: Relation.GE,
    Relation.GE: Relation.LT,
    Relation.GT: Relation.LE,
    Relation.LE: Relation.GT,
}


@dataclass(frozen=True)
class ArithConstraint:
    """A relational constraint between two integer expressions."""

    lhs: Expr
    rel: Relation
    rhs: Expr

    def complement(self) -> "ArithConstraint":
        return ArithConstraint(self.lhs, self.rel.complement, self.rhs)

    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for v in self.lhs.variables() + self.rhs.variables():
            seen.setdefault(v)
        return tuple(seen)

    def evaluate(self, env: dict) -> bool:
        return self.rel.holds(self.lhs.evaluate(env), self.rhs.evaluate(env))

    def render(self) -> str:
        return f"{self.lhs.render()}{self.rel.symbol}{self.rhs.render()}"

    def __str__(self) -> str:
        return self.render()


@lru_cache(maxsize=None)
def constraint_variables(c: ArithConstraint) -> frozenset:
    return frozenset(c.variables())


def canonical_key(c: ArithConstraint) -> str:
    """A structural key identifying a constraint up to commutativity."""
    lhs = canonical_expr(c.lhs)
    rhs = canonical_expr(c.rhs)
    if c.rel in (Relation.EQ, Relation.NE) and lhs.render() > rhs.render():
        lhs, rhs = rhs, lhs
    return f"{lhs.render()}{c.rel.symbol}{rhs.render()}"


# ---------------------------------------------------------------------------
# Global (non-reified) theory constraints


@dataclass(frozen=True)
class CountConstraint:
    """#true elements REL bound, over reified element constraints."""

    elements: tuple[ArithConstraint, ...]
    rel: Relation
    bound: Expr

    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for e in self.elements:
            for v in e.variables():
                seen.setdefault(v)
        for v in self.bound.variables():
            seen.setdefault(v)
        return tuple(seen)

    def satisfied(self, env: dict) -> bool:
        n = sum(1 for e in self.elements if e.evaluate(env))
        return self.rel.holds(n, self.bound.evaluate(env))

    def render(self) -> str:
        inner = ",".join(e.render() for e in self.elements)
        return f"$count[{inner}]{self.rel.symbol}{self.bound.render()}"


@dataclass(frozen=True)
class DistinctConstraint:
    """All element expressions take pairwise different values."""

    elements: tuple[Expr, ...]

    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for e in self.elements:
            for v in e.variables():
                seen.setdefault(v)
        return tuple(seen)

    def satisfied(self, env: dict) -> bool:
        values = [e.evaluate(env) for e in self.elements]
        return len(values) == len(set(values))

    def render(self) -> str:
        return "$distinct{" + ";".join(e.render() for e in self.elements) + "}"


GlobalConstraint = Union[CountConstraint, DistinctConstraint]


# ---------------------------------------------------------------------------
# Mapping between constraint atoms and theory constraints


class GammaMap:
    """Bijection between constraint atoms and theory constraints.

    `gamma` maps a true literal of a constraint atom to the registered
    constraint and a false literal to its complement.  Registration interns
    structurally equal constraints (up to commutativity) once; registering the
    complement of a known constraint yields the false literal of the existing
    atom instead of a second atom.
    """

    def __init__(self, atoms: AtomTable) -> None:
        self._atoms = atoms
        self._forward: dict[int, ArithConstraint] = {}
        self._by_key: dict[str, int] = {}
        self._inv_cache: dict[ArithConstraint, Lit] = {}

    def __len__(self) -> int:
        return len(self._forward)

    def atoms(self) -> list[int]:
        return list(self._forward)

    def register(self, c: ArithConstraint, name: Optional[str] = None) -> Lit:
        key = canonical_key(c)
        atom = self._by_key.get(key)
        if atom is not None:
            return T(atom)
        comp_key = canonical_key(c.complement())
        atom = self._by_key.get(comp_key)
        if atom is not None:
            return F(atom)
        atom = self._atoms.intern(name if name is not None else c.render(), is_constraint=True)
        self._forward[atom] = c
        self._by_key[key] = atom
        return T(atom)

    def forward(self, atom: int) -> ArithConstraint:
        try:
            return self._forward[atom]
        except KeyError:
            raise MappingError(f"atom {atom} is not a registered constraint atom") from None

    def gamma(self, lit: Lit) -> ArithConstraint:
        c = self.forward(lit.atom)
        return c if lit.sign else c.complement()

    def gamma_inverse(self, c: ArithConstraint) -> Lit:
        hit = self._inv_cache.get(c)
        if hit is not None:
            return hit
        atom = self._by_key.get(canonical_key(c))
        if atom is not None:
            lit = T(atom)
        else:
            atom = self._by_key.get(canonical_key(c.complement()))
            if atom is None:
                raise MappingError(f"constraint {c.render()} was never registered")
            lit = F(atom)
        self._inv_cache[c] = lit
        return lit


# ---------------------------------------------------------------------------
# Assignment trail


class Trail:
    """Ordered Boolean assignment with decision levels and reasons.

    The trail records literals in assignment order; `lim[i]` is the trail
    length at the moment decision level i+1 was opened.
    """

    def __init__(self, natoms: int) -> None:
        self.values: list[Optional[bool]] = [None] * natoms
        self.levels: list[int] = [0] * natoms
        self.reasons: list[Optional[frozenset]] = [None] * natoms
        self.lits: list[Lit] = []
        self.lim: list[int] = []

    def __len__(self) -> int:
        return len(self.lits)

    @property
    def level(self) -> int:
        return len(self.lim)

    def value(self, atom: int) -> Optional[bool]:
        return self.values[atom]

    def holds(self, lit: Lit) -> bool:
        return self.values[lit.atom] is lit.sign

    def falsified(self, lit: Lit) -> bool:
        v = self.values[lit.atom]
        return v is not None and v is not lit.sign

    def level_of(self, atom: int) -> int:
        return self.levels[atom]

    def reason_of(self, atom: int) -> Optional[frozenset]:
        return self.reasons[atom]

    def new_level(self) -> int:
        self.lim.append(len(self.lits))
        return self.level

    def assign(self, lit: Lit, reason: Optional[frozenset] = None) -> None:
        if self.values[lit.atom] is not None:
            raise ValueError(f"atom {lit.atom} is already assigned")
        self.values[lit.atom] = lit.sign
        self.levels[lit.atom] = self.level
        self.reasons[lit.atom] = reason
        self.lits.append(lit)

    def backjump(self, level: int) -> list[Lit]:
        """Drop all literals above `level`; returns them newest-first."""
        if level >= self.level:
            return []
        keep = self.lim[level]
        removed = self.lits[keep:]
        for lit in reversed(removed):
            self.values[lit.atom] = None
            self.reasons[lit.atom] = None
        del self.lits[keep:]
        del self.lim[level:]
        return list(reversed(removed))

    def is_total(self) -> bool:
        return len(self.lits) == len(self.values)

    def decisions(self) -> list[Lit]:
        return [self.lits[i] for i in self.lim]

    def constraint_literals(self, atoms: AtomTable) -> list[Lit]:
        """The restriction of the assignment to constraint atoms, in trail order."""
        return [lit for lit in self.lits if atoms.is_constraint(lit.atom)]
