"""Shared fixtures: worked examples, random program/constraint generators,
and brute-force oracles used across the suite."""

from __future__ import annotations

import os
import random
import tempfile

os.environ.setdefault("MPLCONFIGDIR", tempfile.mkdtemp(prefix="mpl"))

import pytest

from casp.core import ArithConstraint, BinOp, Const, Relation, VarRef
from casp.csp import SpaceBuilder
from casp.iis import ConsistencyOracle


# ---------------------------------------------------------------------------
# Worked examples

SCHEDULING = """\
$domain(0..10).
person(adam;smith;lea;john).
1{team(A,B) : person(B) : B != A}1 :- person(A), A == adam.
{friday}.

work(A) $+ work(B) $> 6 :- team(A,B).
work(B) $- work(adam) $== 1 :- friday, team(adam,B).
:- team(adam,lea), not work(lea) $== work(adam).
work(B) $== 0 :- person(B), not team(adam,B), B != adam.

$count[work(A) $== 8 : person(A)] $== fulltime.

$maximize{work(A) : person(A)}.
"""

SQUARE_MINIMIZE = """\
$domain(1..100).
a :- x $* x $< 25.
$minimize{x}.
"""


def scheduling_conflict_items() -> list:
    """The five-constraint inconsistent list from the scheduling example,
    in trail order: eq, john, smith, sum, diff."""
    lea, adam, john, smith = (
        VarRef("work(lea)"),
        VarRef("work(adam)"),
        VarRef("work(john)"),
        VarRef("work(smith)"),
    )
    return [
        ArithConstraint(lea, Relation.EQ, adam),
        ArithConstraint(john, Relation.EQ, Const(0)),
        ArithConstraint(smith, Relation.EQ, Const(0)),
        ArithConstraint(BinOp("+", adam, lea), Relation.GT, Const(6)),
        ArithConstraint(BinOp("-", lea, adam), Relation.EQ, Const(1)),
    ]


def scheduling_oracle() -> ConsistencyOracle:
    names = [f"work({p})" for p in ("lea", "adam", "john", "smith")]
    return ConsistencyOracle(SpaceBuilder(names, (0, 10)))


@pytest.fixture
def schedule_conflict():
    return scheduling_conflict_items(), scheduling_oracle()


# ---------------------------------------------------------------------------
# Random ground constraints (objects) over x,y,z with domain [0,4]

SMALL_VARS = ("x", "y", "z")
SMALL_BOUNDS = (0, 4)
_RELATIONS = list(Relation)


def small_builder() -> SpaceBuilder:
    return SpaceBuilder(list(SMALL_VARS), SMALL_BOUNDS)


def random_constraint(rng: random.Random) -> ArithConstraint:
    v = VarRef(rng.choice(SMALL_VARS))
    rel = rng.choice(_RELATIONS)
    kind = rng.random()
    if kind < 0.45:
        lhs, rhs = v, Const(rng.randint(-1, 5))
    elif kind < 0.65:
        w = VarRef(rng.choice(SMALL_VARS))
        lhs = BinOp(rng.choice("+-"), v, w)
        rhs = Const(rng.randint(-2, 9))
    elif kind < 0.80:
        lhs, rhs = v, VarRef(rng.choice(SMALL_VARS))
    else:
        lhs, rhs = BinOp("*", v, v), Const(rng.randint(-1, 17))
    return ArithConstraint(lhs, rel, rhs)


def random_inconsistent_list(rng: random.Random, max_len: int = 8) -> list:
    """A random constraint list whose conjunction fails propagation."""
    while True:
        if rng.random() < 0.5:
            # grow until the space fails: every proper prefix is consistent
            space = small_builder().fresh()
            items = []
            for _ in range(max_len):
                c = random_constraint(rng)
                items.append(c)
                if not space.post(c):
                    return items
        else:
            # independent batch: inconsistency may hide anywhere
            items = [random_constraint(rng) for _ in range(rng.randint(2, max_len))]
            if not ConsistencyOracle(small_builder()).test(items):
                return items


def is_consistent(items) -> bool:
    return ConsistencyOracle(small_builder()).test(items)


def check_irreducible_inconsistent(items) -> bool:
    """All-sublists check: the list fails, every one-shorter sublist holds."""
    oracle = ConsistencyOracle(small_builder())
    if oracle.test(items):
        return False
    return all(
        oracle.test(items[:i] + items[i + 1:]) for i in range(len(items))
    )


# ---------------------------------------------------------------------------
# Random tight ground programs (text) for oracle-equivalence suites

_ATOMS = ("a", "b", "c", "d", "e")


def random_tight_program(rng: random.Random) -> str:
    """A small random program: at most 10 atoms in total, at most 3
    constraint variables, all domains inside [0,4].  Positive dependencies
    respect a fixed atom order, so every generated program is tight."""
    nv = rng.randint(1, 3)
    variables = SMALL_VARS[:nv]
    lo = rng.randint(0, 2)
    hi = rng.randint(lo, 4)
    na = rng.randint(1, 5)
    atoms = _ATOMS[:na]
    pool: list[str] = []
    max_catoms = 10 - na

    def catom() -> str:
        if pool and (len(pool) >= max_catoms or rng.random() < 0.5):
            return rng.choice(pool)
        v = rng.choice(variables)
        rel = rng.choice(["$==", "$!=", "$<", "$<=", "$>", "$>="])
        kind = rng.random()
        if kind < 0.45:
            lhs, rhs = v, str(rng.randint(lo - 1, hi + 1))
        elif kind < 0.65 and nv >= 2:
            w = rng.choice([u for u in variables if u != v])
            lhs = f"{v} ${rng.choice('+-')} {w}"
            rhs = str(rng.randint(-1, 2 * hi + 1))
        elif kind < 0.80 and nv >= 2:
            lhs, rhs = v, rng.choice([u for u in variables if u != v])
        else:
            lhs, rhs = f"{v} $* {v}", str(rng.randint(-1, hi * hi + 1))
        s = f"{lhs} {rel} {rhs}"
        pool.append(s)
        return s

    def body(head_index: int) -> str:
        lits = []
        for _ in range(rng.randint(1, 3)):
            r = rng.random()
            if r < 0.35 and head_index > 0:
                lits.append(atoms[rng.randrange(head_index)])
            elif r < 0.55:
                lits.append("not " + atoms[rng.randrange(na)])
            elif r < 0.80:
                lits.append(catom())
            else:
                lits.append("not " + catom())
        return ", ".join(lits)

    stmts = []
    for _ in range(rng.randint(0, 2)):
        elems = rng.sample(atoms, rng.randint(1, min(3, na)))
        if rng.random() < 0.3:
            lb = rng.randint(0, len(elems))
            ub = rng.randint(lb, len(elems))
            stmts.append(f"{lb}{{{';'.join(elems)}}}{ub}.")
        else:
            stmts.append("{" + ";".join(elems) + "}.")
    for _ in range(rng.randint(0, 3)):
        i = rng.randrange(na)
        if rng.random() < 0.25:
            stmts.append(f"{atoms[i]}.")
        else:
            stmts.append(f"{atoms[i]} :- {body(i)}.")
    for _ in range(rng.randint(0, 2)):
        stmts.append(f":- {body(na)}.")
    for _ in range(rng.randint(0, 2)):
        if rng.random() < 0.5:
            stmts.append(f"{catom()} :- {body(na)}.")
        else:
            stmts.append(f"{catom()}.")
    rng.shuffle(stmts)
    return "\n".join([f"$domain({lo}..{hi})."] + stmts) + "\n"


# ---------------------------------------------------------------------------
# Curated small-program suite (diverse shapes, all tight)

CURATED_SUITE = [
    "{a}.\n",
    "{a}. {b}. :- a, b.\n",
    "a. b :- a. c :- b, not d.\n",
    "1{a;b;c}2.\n:- a, not b.\n",
    "$domain(0..2).\n{a}.\n:- a, not x $== 1.\n",
    "$domain(0..3).\na :- x $< 2.\nb :- not a.\n:- b, x $== 3.\n",
    "$domain(0..2).\n{a}. {b}.\nx $> 0 :- a.\nx $< 2 :- b.\n",
    "$domain(0..4).\nx $+ y $== 4.\n{a}.\na :- x $== y.\n",
    "$domain(0..2).\n$distinct{x;y}.\n{a}.\n:- a, x $> y.\n",
    "$domain(0..2).\n$count[x $== 0; y $== 0] $<= 1.\n{a}.\na :- x $== 0.\n",
    "$domain(1..4).\n{a;b}.\nx $* x $<= 4 :- a.\nx $> 1 :- b.\n",
    "$domain(0..1).\n{a}. {b}. {c}.\n:- a, b.\n:- b, c.\nx $== 1 :- a, c.\n",
    "a :- not b. b :- not a.\n",
    "$domain(0..2).\nx $== y. y $== z.\n{a}.\n:- a, not x $== z.\n",
    "$domain(0..4).\n2{a;b;c}2.\nx $>= 2 :- a.\nx $<= 2 :- b.\nx $!= 2 :- c.\n",
]
CURATED_SUITE += [random_tight_program(random.Random(900 + k)) for k in range(10)]


# ---------------------------------------------------------------------------
# Environment hygiene

@pytest.fixture(autouse=True)
def _no_ambient_seed(monkeypatch):
    monkeypatch.delenv("CASP_SEED", raising=False)
