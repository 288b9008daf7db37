"""Finite-domain constraint engine.

Domains are ordered sets of disjoint integer intervals.  A space holds one
domain per variable plus a list of posted constraints; posting only ever
narrows domains (monotone).  Propagation runs bounds (interval) consistency
via forward evaluation / backward projection over expression trees, with
hole-aware handling for equality and disequality on plain variables, plus
dedicated propagators for the count and distinct global constraints.
"""

from __future__ import annotations

import math
import time
from typing import Iterator, Optional, Sequence, Union

from .core import (
    AbsOp,
    ArithConstraint,
    BinOp,
    Const,
    CountConstraint,
    DistinctConstraint,
    Expr,
    GlobalConstraint,
    IntegerOverflowError,
    Relation,
    VarRef,
    checked_add,
    checked_mul,
    checked_sub,
)

Constraint = Union[ArithConstraint, CountConstraint, DistinctConstraint]

# Optional bound: None stands for "unbounded" in projection targets.
OptInt = Optional[int]


class Domain:
    """Immutable set of integers stored as sorted, disjoint, non-adjacent
    closed intervals."""

    __slots__ = ("ivs",)

    def __init__(self, ivs: tuple) -> None:
        self.ivs = ivs

    @classmethod
    def interval(cls, lo: int, hi: int) -> "Domain":
        return cls(((lo, hi),)) if lo <= hi else EMPTY_DOMAIN

    @classmethod
    def of(cls, values) -> "Domain":
        vals = sorted(set(values))
        if not vals:
            return EMPTY_DOMAIN
        ivs = []
        start = prev = vals[0]
        for v in vals[1:]:
            if v == prev + 1:
                prev = v
                continue
            ivs.append((start, prev))
            start = prev = v
        ivs.append((start, prev))
        return cls(tuple(ivs))

    # -- queries ------------------------------------------------------------

    def is_empty(self) -> bool:
        return not self.ivs

    def lb(self) -> int:
        return self.ivs[0][0]

    def ub(self) -> int:
        return self.ivs[-1][1]

    def hull(self) -> tuple[int, int]:
        return (self.ivs[0][0], self.ivs[-1][1])

    def size(self) -> int:
        return sum(hi - lo + 1 for lo, hi in self.ivs)

    def is_singleton(self) -> bool:
        return len(self.ivs) == 1 and self.ivs[0][0] == self.ivs[0][1]

    def __contains__(self, v: int) -> bool:
        for lo, hi in self.ivs:
            if lo <= v <= hi:
                return True
            if v < lo:
                return False
        return False

    def values(self) -> Iterator[int]:
        for lo, hi in self.ivs:
            yield from range(lo, hi + 1)

    # -- narrowing operations (all return a new Domain) ---------------------

    def clamp(self, lo: OptInt, hi: OptInt) -> "Domain":
        """Intersect with the interval [lo, hi]; None means unbounded."""
        out = []
        for a, b in self.ivs:
            na = a if lo is None else max(a, lo)
            nb = b if hi is None else min(b, hi)
            if na <= nb:
                out.append((na, nb))
        return Domain(tuple(out))

    def intersect(self, other: "Domain") -> "Domain":
        out = []
        i = j = 0
        a, b = self.ivs, other.ivs
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return Domain(tuple(out))

    def intersect_intervals(self, targets: Sequence[tuple[OptInt, OptInt]]) -> "Domain":
        """Intersect with a union of intervals (used by abs/square projection)."""
        pieces: list[tuple[int, int]] = []
        for lo, hi in targets:
            pieces.extend(self.clamp(lo, hi).ivs)
        pieces.sort()
        out: list[tuple[int, int]] = []
        for lo, hi in pieces:
            if out and lo <= out[-1][1] + 1:
                out[-1] = (out[-1][0], max(out[-1][1], hi))
            else:
                out.append((lo, hi))
        return Domain(tuple(out))

    def remove(self, v: int) -> "Domain":
        if v not in self:
            return self
        out = []
        for lo, hi in self.ivs:
            if lo <= v <= hi:
                if lo <= v - 1:
                    out.append((lo, v - 1))
                if v + 1 <= hi:
                    out.append((v + 1, hi))
            else:
                out.append((lo, hi))
        return Domain(tuple(out))

    def __eq__(self, other) -> bool:
        return isinstance(other, Domain) and self.ivs == other.ivs

    def __hash__(self) -> int:
        return hash(self.ivs)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return "Domain(" + ",".join(f"[{a},{b}]" for a, b in self.ivs) + ")"


EMPTY_DOMAIN = Domain(())


# ---------------------------------------------------------------------------
# Interval helpers


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _ceil_sqrt(n: int) -> int:
    if n <= 0:
        return 0
    r = math.isqrt(n)
    return r if r * r == n else r + 1


def _mul_hull(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    products = [
        checked_mul(a[0], b[0]),
        checked_mul(a[0], b[1]),
        checked_mul(a[1], b[0]),
        checked_mul(a[1], b[1]),
    ]
    return (min(products), max(products))


def _square_hull(h: tuple[int, int]) -> tuple[int, int]:
    lo, hi = h
    if lo >= 0:
        return (checked_mul(lo, lo), checked_mul(hi, hi))
    if hi <= 0:
        return (checked_mul(hi, hi), checked_mul(lo, lo))
    return (0, max(checked_mul(lo, lo), checked_mul(hi, hi)))


def _div_project(tlo: OptInt, thi: OptInt, b: tuple[int, int]) -> Optional[tuple[OptInt, OptInt]]:
    """Hull of { a : exists v in [b], a*v in [tlo, thi] }.

    Sound over-approximation; returns None when the set is empty.
    """
    blo, bhi = b
    if blo <= 0 <= bhi and (tlo is None or tlo <= 0) and (thi is None or thi >= 0):
        return (None, None)  # v = 0 satisfies the target for any a

    los: list[OptInt] = []
    his: list[OptInt] = []

    def positive_part(lo: int, hi: int, tl: OptInt, th: OptInt) -> Optional[tuple[OptInt, OptInt]]:
        # v in [lo, hi], lo >= 1: a in [ceil(tl/v), floor(th/v)] for some v
        if tl is None:
            alo: OptInt = None
        else:
            alo = _ceil_div(tl, hi if tl >= 0 else lo)
        if th is None:
            ahi: OptInt = None
        else:
            ahi = (th // lo) if th >= 0 else (th // hi)
        if alo is not None and ahi is not None and alo > ahi:
            return None
        return (alo, ahi)

    if bhi >= 1:
        part = positive_part(max(blo, 1), bhi, tlo, thi)
        if part:
            los.append(part[0])
            his.append(part[1])
    if blo <= -1:
        # mirror: a*v in T with v negative  <=>  (-a)*(-v) in T with -v positive
        part = positive_part(max(-bhi, 1), -blo, tlo, thi)
        if part:
            alo, ahi = part
            los.append(None if ahi is None else -ahi)
            his.append(None if alo is None else -alo)
    if not los:
        return None
    lo = None if any(x is None for x in los) else min(los)  # type: ignore[type-var]
    hi = None if any(x is None for x in his) else max(his)  # type: ignore[type-var]
    return (lo, hi)


def _opt_add(a: OptInt, b: int) -> OptInt:
    return None if a is None else checked_add(a, b)


# ---------------------------------------------------------------------------
# Space


class InconsistentSpace(Exception):
    """Internal signal that propagation emptied a domain."""


class Space:
    """A working constraint store: variable domains plus posted constraints.

    Posting and propagating only narrow domains; a space that has failed once
    stays failed.  `touched` accumulates the names of variables whose domain
    changed since it was last cleared (the theory propagator uses this to
    scope its entailment scans).
    """

    def __init__(self, domains: dict, var_index: dict) -> None:
        self.domains: dict[str, Domain] = domains
        self.var_index = var_index  # name -> creation order, shared
        self.constraints: list[Constraint] = []
        self.failed = False
        self.touched: set = set()
        self.deadline: Optional[float] = None  # monotonic time budget for search
        self._deps: dict[str, list[int]] = {}  # var name -> constraint indices
        self._dirty: set = set()  # vars narrowed since the last drain
        self._shared = False  # constraints/_deps shared with a copy

    def copy(self) -> "Space":
        s = Space(dict(self.domains), self.var_index)
        # Constraint list and dependency index are append-only; share them and
        # copy lazily on the next post.
        s.constraints = self.constraints
        s._deps = self._deps
        s._shared = True
        self._shared = True
        s.failed = self.failed
        s.touched = set(self.touched)
        s._dirty = set(self._dirty)
        s.deadline = self.deadline
        return s

    # -- posting and propagation -------------------------------------------

    def post(self, c: Constraint) -> bool:
        """Record a constraint and propagate to fixpoint.

        Returns True while the space is still consistent.
        """
        if self.failed:
            return False
        if isinstance(c, DistinctConstraint) and len(set(c.elements)) != len(c.elements):
            # structurally identical elements can never take distinct values
            self.failed = True
            return False
        try:
            self._post_inline(c)
        except InconsistentSpace:
            self.failed = True
            return False
        return self._drain()

    def _post_inline(self, c: Constraint) -> None:
        """Record a constraint and revise it once; narrowings land in _dirty."""
        if self._shared:
            self.constraints = list(self.constraints)
            self._deps = {name: idxs[:] for name, idxs in self._deps.items()}
            self._shared = False
        idx = len(self.constraints)
        self.constraints.append(c)
        for name in c.variables():
            self._deps.setdefault(name, []).append(idx)
        self._revise(c)

    def _drain(self) -> bool:
        """Revise constraints over narrowed variables until nothing changes."""
        try:
            while self._dirty:
                dirty, self._dirty = self._dirty, set()
                pending: set[int] = set()
                for name in dirty:
                    pending.update(self._deps.get(name, ()))
                for i in sorted(pending):
                    self._revise(self.constraints[i])
        except InconsistentSpace:
            self.failed = True
        return not self.failed

    def propagate(self) -> bool:
        """Full fixpoint: revise every posted constraint, then drain."""
        if self.failed:
            return False
        try:
            for c in list(self.constraints):
                self._revise(c)
        except InconsistentSpace:
            self.failed = True
            return False
        return self._drain()

    def _set(self, name: str, dom: Domain) -> bool:
        old = self.domains[name]
        if dom.ivs == old.ivs:
            return False
        if dom.is_empty():
            self.failed = True
            raise InconsistentSpace(name)
        self.domains[name] = dom
        self.touched.add(name)
        self._dirty.add(name)
        return True

    # -- forward interval evaluation ----------------------------------------

    def _hull(self, e: Expr) -> tuple[int, int]:
        if isinstance(e, Const):
            return (e.value, e.value)
        if isinstance(e, VarRef):
            d = self.domains[e.name]
            return d.hull()
        if isinstance(e, BinOp):
            a = self._hull(e.left)
            if e.op == "*" and e.left == e.right:
                return _square_hull(a)
            b = self._hull(e.right)
            if e.op == "+":
                return (checked_add(a[0], b[0]), checked_add(a[1], b[1]))
            if e.op == "-":
                return (checked_sub(a[0], b[1]), checked_sub(a[1], b[0]))
            return _mul_hull(a, b)
        if isinstance(e, AbsOp):
            a = self._hull(e.arg)
            if a[0] >= 0:
                return a
            if a[1] <= 0:
                return (-a[1], -a[0])
            return (0, max(-a[0], a[1]))
        raise TypeError(f"unknown expression {e!r}")

    # -- backward projection -------------------------------------------------

    def _tighten(self, e: Expr, tlo: OptInt, thi: OptInt) -> bool:
        """Narrow the sub-expression e to the target interval [tlo, thi]."""
        if isinstance(e, Const):
            if (tlo is not None and e.value < tlo) or (thi is not None and e.value > thi):
                self.failed = True
                raise InconsistentSpace(e.render())
            return False
        if isinstance(e, VarRef):
            return self._set(e.name, self.domains[e.name].clamp(tlo, thi))
        if isinstance(e, BinOp):
            return self._tighten_binop(e, tlo, thi)
        if isinstance(e, AbsOp):
            return self._tighten_union(e.arg, self._abs_targets(tlo, thi))
        raise TypeError(f"unknown expression {e!r}")

    def _tighten_binop(self, e: BinOp, tlo: OptInt, thi: OptInt) -> bool:
        if e.op == "*" and e.left == e.right:
            # square: |operand| in [ceil(sqrt(max(tlo,0))), floor(sqrt(thi))]
            if thi is not None and thi < 0:
                self.failed = True
                raise InconsistentSpace(e.render())
            hi_abs = None if thi is None else math.isqrt(thi)
            lo_abs = 0 if tlo is None or tlo <= 0 else _ceil_sqrt(tlo)
            if lo_abs == 0:
                targets = [(None if hi_abs is None else -hi_abs, hi_abs)]
            else:
                targets = [
                    (None if hi_abs is None else -hi_abs, -lo_abs),
                    (lo_abs, hi_abs),
                ]
            return self._tighten_union(e.left, targets)
        la = self._hull(e.left)
        rb = self._hull(e.right)
        changed = False
        if e.op == "+":
            changed |= self._tighten(e.left, _opt_add(tlo, -rb[1]), _opt_add(thi, -rb[0]))
            changed |= self._tighten(e.right, _opt_add(tlo, -la[1]), _opt_add(thi, -la[0]))
        elif e.op == "-":
            changed |= self._tighten(e.left, _opt_add(tlo, rb[0]), _opt_add(thi, rb[1]))
            # right = left - target
            new_lo = None if thi is None else checked_sub(la[0], thi)
            new_hi = None if tlo is None else checked_sub(la[1], tlo)
            changed |= self._tighten(e.right, new_lo, new_hi)
        else:
            lt = _div_project(tlo, thi, rb)
            if lt is None:
                self.failed = True
                raise InconsistentSpace(e.render())
            changed |= self._tighten(e.left, lt[0], lt[1])
            rt = _div_project(tlo, thi, self._hull(e.left))
            if rt is None:
                self.failed = True
                raise InconsistentSpace(e.render())
            changed |= self._tighten(e.right, rt[0], rt[1])
        return changed

    def _abs_targets(self, tlo: OptInt, thi: OptInt) -> list[tuple[OptInt, OptInt]]:
        if thi is not None and thi < 0:
            self.failed = True
            raise InconsistentSpace("abs")
        lo_abs = 0 if tlo is None or tlo <= 0 else tlo
        if lo_abs == 0:
            return [(None if thi is None else -thi, thi)]
        return [(None if thi is None else -thi, -lo_abs), (lo_abs, thi)]

    def _tighten_union(self, e: Expr, targets: list[tuple[OptInt, OptInt]]) -> bool:
        if isinstance(e, VarRef):
            nd = self.domains[e.name].intersect_intervals(targets)
            return self._set(e.name, nd)
        # non-variable child: fall back to the hull of the target union
        los = [t[0] for t in targets]
        his = [t[1] for t in targets]
        lo = None if any(x is None for x in los) else min(los)  # type: ignore[type-var]
        hi = None if any(x is None for x in his) else max(his)  # type: ignore[type-var]
        return self._tighten(e, lo, hi)

    # -- constraint revision --------------------------------------------------

    def _revise(self, c: Constraint) -> bool:
        if isinstance(c, ArithConstraint):
            return self._revise_arith(c)
        if isinstance(c, CountConstraint):
            return self._revise_count(c)
        return self._revise_distinct(c)

    def _revise_arith(self, c: ArithConstraint) -> bool:
        lhs, rel, rhs = c.lhs, c.rel, c.rhs
        a = self._hull(lhs)
        b = self._hull(rhs)
        changed = False
        if rel is Relation.EQ:
            if isinstance(lhs, VarRef) and isinstance(rhs, VarRef):
                meet = self.domains[lhs.name].intersect(self.domains[rhs.name])
                changed |= self._set(lhs.name, meet)
                changed |= self._set(rhs.name, self.domains[rhs.name].intersect(meet))
                return changed
            lo, hi = max(a[0], b[0]), min(a[1], b[1])
            if lo > hi:
                self.failed = True
                raise InconsistentSpace(c.render())
            changed |= self._tighten(lhs, lo, hi)
            changed |= self._tighten(rhs, lo, hi)
        elif rel is Relation.NE:
            changed |= self._revise_ne(lhs, rhs, a, b)
        elif rel is Relation.LE:
            changed |= self._tighten(lhs, None, b[1])
            changed |= self._tighten(rhs, a[0], None)
        elif rel is Relation.LT:
            changed |= self._tighten(lhs, None, checked_sub(b[1], 1))
            changed |= self._tighten(rhs, checked_add(a[0], 1), None)
        elif rel is Relation.GE:
            changed |= self._tighten(lhs, b[0], None)
            changed |= self._tighten(rhs, None, a[1])
        else:  # GT
            changed |= self._tighten(lhs, checked_add(b[0], 1), None)
            changed |= self._tighten(rhs, None, checked_sub(a[1], 1))
        return changed

    def _revise_ne(self, lhs: Expr, rhs: Expr, a, b) -> bool:
        if a[0] == a[1] == b[0] == b[1]:
            self.failed = True
            raise InconsistentSpace("disequality")
        changed = False
        if a[0] == a[1] and isinstance(rhs, VarRef):
            changed |= self._set(rhs.name, self.domains[rhs.name].remove(a[0]))
        if b[0] == b[1] and isinstance(lhs, VarRef):
            changed |= self._set(lhs.name, self.domains[lhs.name].remove(b[0]))
        return changed

    def _revise_count(self, c: CountConstraint) -> bool:
        statuses = [self.entail(e) for e in c.elements]
        t = sum(1 for s in statuses if s is True)
        p = sum(1 for s in statuses if s is not False)
        changed = False
        blo, bhi = self._hull(c.bound)
        need_lo, need_hi = t, p
        rel = c.rel
        if rel is Relation.EQ:
            changed |= self._tighten(c.bound, t, p)
            need_lo, need_hi = max(t, blo), min(p, bhi)
        elif rel is Relation.LE:
            changed |= self._tighten(c.bound, t, None)
            need_hi = bhi
        elif rel is Relation.LT:
            changed |= self._tighten(c.bound, checked_add(t, 1), None)
            need_hi = checked_sub(bhi, 1)
        elif rel is Relation.GE:
            changed |= self._tighten(c.bound, None, p)
            need_lo = blo
        elif rel is Relation.GT:
            changed |= self._tighten(c.bound, None, checked_sub(p, 1))
            need_lo = checked_add(blo, 1)
        else:  # NE
            if t == p:
                if blo == bhi and blo == t:
                    self.failed = True
                    raise InconsistentSpace(c.render())
                if isinstance(c.bound, VarRef):
                    changed |= self._set(c.bound.name, self.domains[c.bound.name].remove(t))
            return changed
        need_lo = max(need_lo, t)
        need_hi = min(need_hi, p)
        if need_lo > need_hi:
            self.failed = True
            raise InconsistentSpace(c.render())
        if need_lo == p:
            # every not-yet-false element must hold
            for e, s in zip(c.elements, statuses):
                if s is None:
                    self._post_inline(e)
                    changed = True
        if need_hi == t:
            # every not-yet-true element must fail
            for e, s in zip(c.elements, statuses):
                if s is None:
                    self._post_inline(e.complement())
                    changed = True
        return changed

    def _revise_distinct(self, c: DistinctConstraint) -> bool:
        # (structurally duplicate elements are rejected at post time)
        doms = self.domains
        hulls = []
        for e in c.elements:
            if type(e) is VarRef:
                ivs = doms[e.name].ivs
                hulls.append((ivs[0][0], ivs[-1][1]))
            else:
                hulls.append(self._hull(e))
        changed = False
        n = len(c.elements)
        fixed: list[tuple[int, int]] = [
            (i, h[0]) for i, h in enumerate(hulls) if h[0] == h[1]
        ]
        seen: dict[int, int] = {}
        for i, v in fixed:
            if v in seen:
                self.failed = True
                raise InconsistentSpace(c.render())
            seen[v] = i
        for i, e in enumerate(c.elements):
            if not isinstance(e, VarRef) or hulls[i][0] == hulls[i][1]:
                continue
            dom = self.domains[e.name]
            for j, v in fixed:
                if j != i:
                    dom = dom.remove(v)
            changed |= self._set(e.name, dom)
        # pigeonhole: merged intervals over-approximate the union of element
        # values; fewer than n reachable values cannot be pairwise distinct
        spans: list[tuple[int, int]] = []
        for i, e in enumerate(c.elements):
            if isinstance(e, VarRef):
                spans.extend(self.domains[e.name].ivs)
            else:
                spans.append(hulls[i])
        if not spans:
            return changed
        spans.sort()
        total = 0
        cur_lo, cur_hi = spans[0]
        for lo, hi in spans[1:]:
            if lo > cur_hi + 1:
                total += cur_hi - cur_lo + 1
                cur_lo, cur_hi = lo, hi
            elif hi > cur_hi:
                cur_hi = hi
        total += cur_hi - cur_lo + 1
        if total < n:
            self.failed = True
            raise InconsistentSpace(c.render())
        return changed

    # -- entailment -----------------------------------------------------------

    def entail(self, c: ArithConstraint) -> Optional[bool]:
        """Sound but incomplete entailment test via interval hulls.

        Returns True when every assignment in the current store satisfies c,
        False when none does, None when undecided.
        """
        a = self._hull(c.lhs)
        b = self._hull(c.rhs)
        rel = c.rel
        if rel is Relation.LE:
            if a[1] <= b[0]:
                return True
            if a[0] > b[1]:
                return False
        elif rel is Relation.LT:
            if a[1] < b[0]:
                return True
            if a[0] >= b[1]:
                return False
        elif rel is Relation.GE:
            if a[0] >= b[1]:
                return True
            if a[1] < b[0]:
                return False
        elif rel is Relation.GT:
            if a[0] > b[1]:
                return True
            if a[1] <= b[0]:
                return False
        elif rel is Relation.EQ:
            if a[0] == a[1] == b[0] == b[1]:
                return True
            if a[1] < b[0] or a[0] > b[1]:
                return False
            got = self._entail_eq_holes(c.lhs, c.rhs, a, b)
            if got is not None:
                return got
        else:  # NE
            inv = self.entail(ArithConstraint(c.lhs, Relation.EQ, c.rhs))
            if inv is not None:
                return not inv
        return None

    def _entail_eq_holes(self, lhs: Expr, rhs: Expr, a, b) -> Optional[bool]:
        # hole-aware refinements for plain variables
        if isinstance(lhs, VarRef) and isinstance(rhs, VarRef):
            if self.domains[lhs.name].intersect(self.domains[rhs.name]).is_empty():
                return False
        if isinstance(lhs, VarRef) and b[0] == b[1] and b[0] not in self.domains[lhs.name]:
            return False
        if isinstance(rhs, VarRef) and a[0] == a[1] and a[0] not in self.domains[rhs.name]:
            return False
        return None

    # -- search ----------------------------------------------------------------

    def _pick_branch_var(self) -> Optional[str]:
        best = None
        best_key = None
        for name, dom in self.domains.items():
            size = dom.size()
            if size <= 1:
                continue
            key = (size, self.var_index[name])
            if best_key is None or key < best_key:
                best, best_key = name, key
        return best

    def solutions(self) -> Iterator[dict]:
        """Depth-first search: first-fail variable order, ascending values."""
        if self.failed:
            return
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise TimeoutError("search budget exhausted")
        var = self._pick_branch_var()
        if var is None:
            yield {name: dom.lb() for name, dom in self.domains.items()}
            return
        for val in list(self.domains[var].values()):
            child = self.copy()
            try:
                child._set(var, Domain.interval(val, val))
            except InconsistentSpace:
                continue
            # the parent is at fixpoint, so draining the one narrowed
            # variable re-establishes it
            if child._drain():
                yield from child.solutions()

    def solve(self) -> Optional[dict]:
        for sol in self.solutions():
            return sol
        return None

    def branch_and_bound(
        self, objectives: Sequence[tuple[str, Expr]]
    ) -> Optional[tuple[dict, list[int]]]:
        """Lexicographic optimization by iterated bound tightening.

        Each objective is ('minimize'|'maximize', expr).  Earlier objectives
        are more significant; each is optimized by repeatedly re-searching
        with a strictly better bound, then fixed before the next one.
        """
        work = self.copy()
        sol = work.solve()
        if sol is None:
            return None
        if not objectives:
            return sol, []
        values: list[int] = []
        for sense, expr in objectives:
            cur = expr.evaluate(sol)
            while True:
                trial = work.copy()
                if sense == "minimize":
                    bound = ArithConstraint(expr, Relation.LT, Const(cur))
                else:
                    bound = ArithConstraint(expr, Relation.GT, Const(cur))
                if not trial.post(bound):
                    break
                better = trial.solve()
                if better is None:
                    break
                work, sol, cur = trial, better, expr.evaluate(better)
            values.append(cur)
            work.post(ArithConstraint(expr, Relation.EQ, Const(cur)))
        return sol, values


# ---------------------------------------------------------------------------
# Space construction


class SpaceBuilder:
    """Creates fresh spaces over a fixed variable universe.

    `base` constraints (global constraints, optimization bounds) are posted
    into every space.  `rebuild` additionally posts a working list and bumps
    the reset counter that the filtering benchmarks measure.
    """

    def __init__(self, variables: Sequence[str], bounds: tuple[int, int],
                 base: Optional[Sequence[Constraint]] = None) -> None:
        lo, hi = bounds
        self._domains = {name: Domain.interval(lo, hi) for name in variables}
        self.var_index = {name: i for i, name in enumerate(variables)}
        self.base: list[Constraint] = list(base) if base else []
        self.resets = 0
        self._pristine: Optional[Space] = None
        self._pristine_nbase = -1

    @property
    def variables(self) -> list[str]:
        return list(self._domains)

    def invalidate(self) -> None:
        """Forget the cached base space; call after editing `base`."""
        self._pristine = None

    def fresh(self) -> Space:
        # The base-only space is cached; a change to `base` (e.g. a new
        # optimization bound) invalidates it via `invalidate` or, as a
        # safety net, the length check.
        if self._pristine is None or self._pristine_nbase != len(self.base):
            space = Space(dict(self._domains), self.var_index)
            for c in self.base:
                if not space.post(c):
                    break
            self._pristine = space
            self._pristine_nbase = len(self.base)
        return self._pristine.copy()

    def rebuild(self, constraints: Sequence[Constraint]) -> Space:
        self.resets += 1
        space = self.fresh()
        for c in constraints:
            if not space.post(c):
                break
        return space
