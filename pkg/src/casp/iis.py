"""Filters that shrink an inconsistent, ordered list of theory constraints.

Every filter takes a constraint list whose conjunction is inconsistent (as
judged by propagation) and returns an inconsistent sublist, in the order the
algorithm picked its members.  `deletion`, `forward`, `backward` and `cc`
return irreducible lists (removing any single member restores consistency);
`range` and `cc_range` only guarantee inconsistency.  Consistency checks go
through a shared oracle that counts checks and from-scratch space rebuilds.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

from .core import ArithConstraint, GammaMap, Lit, constraint_variables
from .csp import Space, SpaceBuilder

ConstraintList = list  # of ArithConstraint, order matters


class FilterError(Exception):
    """The input list turned out to be consistent: caller broke the contract."""


class _Session:
    """An incremental consistency check: one space, extended constraint by
    constraint."""

    def __init__(self, oracle: "ConsistencyOracle", space: Space) -> None:
        self._oracle = oracle
        self.space = space
        self.ok = not space.failed

    def extend(self, c: ArithConstraint) -> bool:
        self._oracle.checks += 1
        self.ok = self.space.post(c)
        return self.ok


class ConsistencyOracle:
    """Answers "is this constraint list consistent?" for the filters.

    A from-scratch `test` and a non-empty `session` seed both count as one
    rebuild (the initial pristine space is free).
    """

    def __init__(self, builder: SpaceBuilder) -> None:
        self.builder = builder
        self.checks = 0
        self.rebuilds = 0

    def test(self, constraints: Sequence[ArithConstraint]) -> bool:
        self.checks += 1
        if constraints:
            self.rebuilds += 1
            space = self.builder.rebuild(constraints)
        else:
            space = self.builder.fresh()
        return not space.failed

    def session(self, base: Sequence[ArithConstraint] = ()) -> _Session:
        if base:
            self.rebuilds += 1
            space = self.builder.rebuild(base)
        else:
            space = self.builder.fresh()
        return _Session(self, space)


# ---------------------------------------------------------------------------
# Filtering algorithms


def simple_filtering(constraints: Sequence[ArithConstraint],
                     oracle: ConsistencyOracle) -> ConstraintList:
    """Identity filter: return the list unchanged."""
    return list(constraints)


def deletion_filtering(constraints: Sequence[ArithConstraint],
                       oracle: ConsistencyOracle) -> ConstraintList:
    """Drop one constraint at a time, keeping the list inconsistent.

    Each candidate removal is checked from scratch; after a successful
    removal scanning continues at the same position.
    """
    work = list(constraints)
    i = 0
    while i < len(work):
        candidate = work[:i] + work[i + 1:]
        if candidate and not oracle.test(candidate):
            work = candidate
        else:
            i += 1
    return work


def forward_filtering(constraints: Sequence[ArithConstraint],
                      oracle: ConsistencyOracle) -> ConstraintList:
    """Grow a test list from the front until it turns inconsistent; the
    constraint that broke it belongs to the result.  Restart with the result
    as the seed until the result itself is inconsistent.  Constraints past
    the previous culprit never need another look."""
    items = list(constraints)
    result_idx: list[int] = []
    limit = len(items)
    while True:
        session = oracle.session([items[i] for i in result_idx])
        if not session.ok:
            return [items[i] for i in result_idx]
        culprit: Optional[int] = None
        added_before_culprit = False
        for i in range(limit):
            if not session.extend(items[i]):
                culprit = i
                break
            added_before_culprit = True
        if culprit is None:
            raise FilterError("input constraint list is consistent")
        result_idx.append(culprit)
        limit = culprit
        if not added_before_culprit:
            # the test list equals the result: known inconsistent, done
            return [items[i] for i in result_idx]


def backward_filtering(constraints: Sequence[ArithConstraint],
                       oracle: ConsistencyOracle) -> ConstraintList:
    """Forward filtering over the reversed list, so recently added
    constraints are tried first."""
    return forward_filtering(list(reversed(constraints)), oracle)


def range_filtering(constraints: Sequence[ArithConstraint],
                    oracle: ConsistencyOracle) -> ConstraintList:
    """Take constraints from the back until the list turns inconsistent.

    One incremental pass, no restarts; the output is a contiguous tail of the
    input but generally not irreducible.
    """
    session = oracle.session()
    picked: ConstraintList = []
    for c in reversed(constraints):
        picked.append(c)
        if not session.extend(c):
            return picked
    raise FilterError("input constraint list is consistent")


def _vars(c: ArithConstraint) -> frozenset:
    return constraint_variables(c)


def _base_groups(oracle: ConsistencyOracle) -> list:
    """Variable groups induced by the ambient base constraints.

    Base constraints (globals, optimization bounds) sit in every test space
    but never appear in filter lists, so two variables they connect must be
    treated as connected when scanning for related constraints."""
    groups = []
    for c in oracle.builder.base:
        cvars = frozenset(c.variables())
        if len(cvars) > 1:
            groups.append(cvars)
    return groups


def _close_over(omega: set, groups: list) -> set:
    """Extend a variable set with every base group it touches, to fixpoint."""
    changed = True
    while changed:
        changed = False
        for g in groups:
            if not g.isdisjoint(omega) and not g <= omega:
                omega |= g
                changed = True
    return omega


def cc_filtering(constraints: Sequence[ArithConstraint],
                 oracle: ConsistencyOracle) -> ConstraintList:
    """Connected-components filtering.

    Scan from the back, but only admit constraints sharing a variable with
    the seen set, seeded from the last constraint (variable-free constraints
    are always admitted).  When the test list turns inconsistent the breaking
    constraint joins the result, the next pass runs over the previous test
    list minus that constraint, and the seen set restarts from the result's
    variables.  If a pass adds nothing, the seen set widens to all variables
    of the remaining pool.  Variables linked only through ambient base
    constraints count as connected (see `_base_groups`).
    """
    items = list(constraints)
    n = len(items)
    if n == 0:
        return []
    result: list[int] = []
    pool: list[int] = list(range(n))
    groups = _base_groups(oracle)
    omega = _close_over(set(_vars(items[-1])), groups)
    session = oracle.session()
    in_test: set[int] = set()
    accepted: list[int] = []  # scan-admitted since the last reset, in order
    while True:
        count0 = len(omega)
        culprit: Optional[int] = None
        progressed = False
        for idx in reversed(pool):
            if idx in in_test:
                continue
            cvars = _vars(items[idx])
            if cvars and not (omega & cvars):
                continue
            in_test.add(idx)
            accepted.append(idx)
            if not cvars <= omega:
                omega = _close_over(omega | cvars, groups)
            progressed = True
            if not session.extend(items[idx]):
                culprit = idx
                break
        if culprit is not None:
            result.append(culprit)
            omega = set()
            for i in result:
                omega |= _vars(items[i])
            omega = _close_over(omega, groups)
            pool = result[:-1] + [i for i in accepted if i != culprit]
            if in_test == set(result):
                return [items[i] for i in result]
            session = oracle.session([items[i] for i in result])
            if not session.ok:
                return [items[i] for i in result]
            in_test = set(result)
            accepted = []
        elif not progressed:
            widened = set()
            for i in pool:
                widened |= _vars(items[i])
            if len(omega) == count0 and widened <= omega:
                raise FilterError("input constraint list is consistent")
            omega |= widened
            continue
        if len(omega) == count0:
            for i in pool:
                omega |= _vars(items[i])


def cc_range_filtering(constraints: Sequence[ArithConstraint],
                       oracle: ConsistencyOracle) -> ConstraintList:
    """Connected-components scan that stops at the first inconsistency and
    returns the whole test list (inconsistent, not necessarily irreducible)."""
    items = list(constraints)
    n = len(items)
    if n == 0:
        return []
    groups = _base_groups(oracle)
    omega = _close_over(set(_vars(items[-1])), groups)
    session = oracle.session()
    in_test: set[int] = set()
    picked: ConstraintList = []
    while True:
        count0 = len(omega)
        progressed = False
        for idx in reversed(range(n)):
            if idx in in_test:
                continue
            cvars = _vars(items[idx])
            if cvars and not (omega & cvars):
                continue
            in_test.add(idx)
            picked.append(items[idx])
            if not cvars <= omega:
                omega = _close_over(omega | cvars, groups)
            progressed = True
            if not session.extend(items[idx]):
                return picked
        if len(in_test) == n:
            raise FilterError("input constraint list is consistent")
        if len(omega) == count0:
            # Nothing else is variable-connected: widen to every variable of
            # the input so disconnected constraints still get tested.  The
            # next pass then admits all remaining items, so the loop ends.
            for c in items:
                omega |= _vars(c)


FILTERS: dict[str, Callable[[Sequence[ArithConstraint], ConsistencyOracle], ConstraintList]] = {
    "simple": simple_filtering,
    "deletion": deletion_filtering,
    "forward": forward_filtering,
    "backward": backward_filtering,
    "range": range_filtering,
    "cc": cc_filtering,
    "ccrange": cc_range_filtering,
}

# single-letter labels used in benchmark matrices
FILTER_LETTERS = {
    "simple": "s",
    "deletion": "d",
    "forward": "f",
    "backward": "b",
    "range": "r",
    "cc": "c",
    "ccrange": "o",
}


# ---------------------------------------------------------------------------
# Nogood construction


def conflict_nogood(filtered: Sequence[ArithConstraint], gamma: GammaMap) -> frozenset:
    """Map a filtered inconsistent list back to a nogood over constraint atoms."""
    return frozenset(gamma.gamma_inverse(c) for c in filtered)


def reason_nogood(
    prefix: Sequence[ArithConstraint],
    propagated: Lit,
    gamma: GammaMap,
    oracle: ConsistencyOracle,
    filter_fn: Callable[[Sequence[ArithConstraint], ConsistencyOracle], ConstraintList],
) -> frozenset:
    """Reason for a theory-propagated literal.

    `prefix` is the consistent list of constraints posted so far; it must
    imply the constraint of `propagated`.  The complement of that constraint
    is appended to form an inconsistent list, which is filtered and mapped
    back through the constraint-atom mapping; the complement of `propagated`
    always survives as a member of the result.
    """
    tail = gamma.gamma(propagated.neg())
    filtered = filter_fn(list(prefix) + [tail], oracle)
    return frozenset(gamma.gamma_inverse(c) for c in filtered)
