"""Instantiate a parsed program into a variable-free ground program.

Bottom-up grounding: regular predicates are instantiated to a fixpoint of
possible atoms, conditions are expanded over certainly-true atoms, builtins
are evaluated away, and theory constraints are registered as constraint
atoms.  The result can be printed back in the input grammar (`to_text`).
"""

from __future__ import annotations

import graphlib
import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from . import parser as ast
from .core import (
    AbsOp,
    ArithConstraint,
    AtomTable,
    BinOp,
    Const,
    CountConstraint,
    DistinctConstraint,
    Expr,
    GammaMap,
    Relation,
    VarRef,
)

log = logging.getLogger(__name__)

DEFAULT_DOMAIN = (-(2**20), 2**20)


class GroundingError(Exception):
    pass


# ---------------------------------------------------------------------------
# Ground program representation


@dataclass(frozen=True)
class GroundRule:
    """A ground rule; at most one of `head` (regular) / `chead` (theory) is set.

    `choice: True` marks heads that may be freely left false even when the
    body holds.  `card` links element rules to their cardinality rule.
    """

    head: Optional[str] = None
    chead: Optional[ArithConstraint] = None
    choice: bool = False
    pos: tuple = ()
    neg: tuple = ()
    cpos: tuple = ()
    cneg: tuple = ()
    card: Optional[int] = None

    def body_parts(self) -> list[str]:
        parts: list[str] = []
        parts.extend(self.pos)
        parts.extend(f"not {a}" for a in self.neg)
        parts.extend(c.render() for c in self.cpos)
        parts.extend(f"not {c.render()}" for c in self.cneg)
        return parts

    def render(self) -> str:
        head = self.head if self.head is not None else ""
        if self.chead is not None:
            head = self.chead.render()
        if self.choice:
            head = "{" + head + "}"
        body = self.body_parts()
        if not head and not body:
            # an unconditionally violated constraint; grounds back to itself
            return ":- 1 == 1."
        if not body:
            return f"{head}."
        if not head:
            return ":- " + ", ".join(body) + "."
        return f"{head} :- " + ", ".join(body) + "."


@dataclass(frozen=True)
class CardinalityRule:
    """Bounds on the number of true element atoms whenever the body holds."""

    lower: Optional[int]
    upper: Optional[int]
    atoms: tuple
    pos: tuple = ()
    neg: tuple = ()
    cpos: tuple = ()
    cneg: tuple = ()

    def body_parts(self) -> list[str]:
        return GroundRule(pos=self.pos, neg=self.neg, cpos=self.cpos, cneg=self.cneg).body_parts()

    def render(self) -> str:
        lower = "" if self.lower is None else f"{self.lower} "
        upper = "" if self.upper is None else f" {self.upper}"
        head = lower + "{" + ";".join(self.atoms) + "}" + upper
        body = self.body_parts()
        if not body:
            return f"{head}."
        return f"{head} :- " + ", ".join(body) + "."


@dataclass
class GroundProgram:
    rules: list = field(default_factory=list)
    cardinality_rules: list = field(default_factory=list)
    choice_atoms: set = field(default_factory=set)
    global_constraints: list = field(default_factory=list)
    optimize_statements: list = field(default_factory=list)  # (sense, [Expr, ...])
    domain: tuple = DEFAULT_DOMAIN
    atoms: AtomTable = field(default_factory=AtomTable)
    gamma: GammaMap = field(init=False)
    variables: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def __post_init__(self) -> None:
        self.gamma = GammaMap(self.atoms)

    def regular_atoms(self) -> list[int]:
        return [a.index for a in self.atoms if not a.is_constraint]

    def same_program(self, other: "GroundProgram") -> bool:
        return (
            self.rules == other.rules
            and self.cardinality_rules == other.cardinality_rules
            and self.global_constraints == other.global_constraints
            and self.optimize_statements == other.optimize_statements
            and self.domain == other.domain
        )

    def to_text(self) -> str:
        lines = [f"$domain({self.domain[0]}..{self.domain[1]})."]
        printed_cards: set = set()
        for rule in self.rules:
            if rule.card is not None:
                if rule.card not in printed_cards:
                    printed_cards.add(rule.card)
                    lines.append(self.cardinality_rules[rule.card].render())
                continue
            lines.append(rule.render())
        for idx, card in enumerate(self.cardinality_rules):
            if idx not in printed_cards:
                lines.append(card.render())
        for g in self.global_constraints:
            lines.append(g.render() + ".")
        for sense, exprs in self.optimize_statements:
            lines.append(f"${sense}" + "{" + ";".join(e.render() for e in exprs) + "}.")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Term helpers


def _subst(term: ast.Term, theta: dict) -> ast.Term:
    if isinstance(term, ast.Var):
        try:
            return theta[term.name]
        except KeyError:
            raise GroundingError(f"unsafe variable {term.name}") from None
    if isinstance(term, ast.Sym) and term.args:
        return ast.Sym(term.name, tuple(_subst(a, theta) for a in term.args))
    return term


def _term_vars(term: ast.Term, out: set) -> None:
    if isinstance(term, ast.Var):
        out.add(term.name)
    elif isinstance(term, ast.Sym):
        for a in term.args:
            _term_vars(a, out)
    elif isinstance(term, (ast.RangeT, ast.PoolT)):
        for sub in getattr(term, "options", (term.lo, term.hi) if isinstance(term, ast.RangeT) else ()):
            _term_vars(sub, out)


def _cexpr_vars(ce: ast.CExpr, out: set) -> None:
    if isinstance(ce, ast.CTerm):
        _term_vars(ce.term, out)
    elif isinstance(ce, ast.CBin):
        _cexpr_vars(ce.left, out)
        _cexpr_vars(ce.right, out)
    else:
        _cexpr_vars(ce.arg, out)


def _match(pattern: ast.Term, ground: ast.Term, theta: dict) -> Optional[dict]:
    """Unify a pattern term against a ground term, extending theta."""
    if isinstance(pattern, ast.Var):
        bound = theta.get(pattern.name)
        if bound is None:
            out = dict(theta)
            out[pattern.name] = ground
            return out
        return theta if bound == ground else None
    if isinstance(pattern, ast.Num):
        return theta if pattern == ground else None
    if isinstance(pattern, ast.Sym):
        if not isinstance(ground, ast.Sym) or pattern.name != ground.name:
            return None
        if len(pattern.args) != len(ground.args):
            return None
        for p, g in zip(pattern.args, ground.args):
            theta = _match(p, g, theta)
            if theta is None:
                return None
        return theta
    return None


def _expand_term(term: ast.Term) -> list[ast.Term]:
    """Expand ranges and pools into the list of alternative terms."""
    if isinstance(term, ast.RangeT):
        lo, hi = term.lo, term.hi
        if not isinstance(lo, ast.Num) or not isinstance(hi, ast.Num):
            raise GroundingError(f"range {term.render()} has non-numeric endpoints")
        if hi.value - lo.value > 10**6:
            raise GroundingError(f"range {term.render()} is too large")
        return [ast.Num(v) for v in range(lo.value, hi.value + 1)]
    if isinstance(term, ast.PoolT):
        out: list[ast.Term] = []
        for option in term.options:
            out.extend(_expand_term(option))
        return out
    if isinstance(term, ast.Sym) and term.args:
        choices = [_expand_term(a) for a in term.args]
        return [ast.Sym(term.name, combo) for combo in itertools.product(*choices)]
    return [term]


def _expand_many(terms: Iterable[ast.Term]) -> list[tuple]:
    return [c for c in itertools.product(*(_expand_term(t) for t in terms))]


# ---------------------------------------------------------------------------
# Grounder


class _Grounder:
    def __init__(self, statements: list) -> None:
        self.statements = statements
        self.program = GroundProgram()
        self.possible: dict[tuple, list] = {}  # (name, arity) -> [ground Sym]
        self.possible_set: set = set()
        self.certain: set = set()
        self.var_order: dict = {}

    # -- driver --------------------------------------------------------------

    def run(self) -> GroundProgram:
        domains = [s for s in self.statements if isinstance(s, ast.DomainStmt)]
        if len(domains) > 1:
            raise GroundingError("multiple $domain declarations")
        rules = [s for s in self.statements if isinstance(s, ast.RuleStmt)]
        rules = [r for rule in rules for r in self._expand_rule(rule)]
        for rule in rules:
            self._check_safety(rule)
        self._fixpoint(rules)
        for rule in rules:
            self._ground_rule(rule)
        for stmt in self.statements:
            if isinstance(stmt, ast.CountStmt):
                self._ground_count(stmt)
            elif isinstance(stmt, ast.DistinctStmt):
                self._ground_distinct(stmt)
            elif isinstance(stmt, ast.OptimizeStmt):
                self._ground_optimize(stmt)
        self.program.variables = list(self.var_order)
        if domains:
            self.program.domain = (domains[0].lo, domains[0].hi)
        elif self.program.variables:
            self.program.domain = DEFAULT_DOMAIN
            msg = (
                "no $domain declaration; defaulting all theory variables "
                f"to [{DEFAULT_DOMAIN[0]}, {DEFAULT_DOMAIN[1]}]"
            )
            self.program.warnings.append(msg)
            log.warning(msg)
        return self.program

    # -- range / pool expansion ----------------------------------------------

    def _expand_rule(self, rule: ast.RuleStmt) -> list:
        heads: list = [rule.head]
        if isinstance(rule.head, ast.Sym):
            heads = _expand_term(rule.head)
        elif isinstance(rule.head, ast.ChoiceHead):
            elements = []
            for elem in rule.head.elements:
                for term in _expand_term(elem.term):
                    elements.append(ast.ChoiceElem(term, elem.conds))
            heads = [ast.ChoiceHead(rule.head.lower, rule.head.upper, tuple(elements))]
        out = []
        body_choices = [self._expand_literal(lit) for lit in rule.body]
        for head in heads:
            for body in itertools.product(*body_choices):
                out.append(ast.RuleStmt(head, tuple(body), rule.line))
        return out

    def _expand_literal(self, lit: ast.BodyLit) -> list:
        if isinstance(lit, ast.AtomLit):
            return [ast.AtomLit(t, lit.neg) for t in _expand_term(lit.term)]
        return [lit]

    # -- safety ---------------------------------------------------------------

    def _check_safety(self, rule: ast.RuleStmt) -> None:
        bound: set = set()
        for lit in rule.body:
            if isinstance(lit, ast.AtomLit) and not lit.neg:
                _term_vars(lit.term, bound)
        used: set = set()
        for lit in rule.body:
            if isinstance(lit, ast.AtomLit):
                _term_vars(lit.term, used)
            elif isinstance(lit, ast.BuiltinLit):
                _term_vars(lit.left, used)
                _term_vars(lit.right, used)
            else:
                _cexpr_vars(lit.catom.lhs, used)
                _cexpr_vars(lit.catom.rhs, used)
        head = rule.head
        if isinstance(head, ast.Sym):
            _term_vars(head, used)
        elif isinstance(head, ast.CAtom):
            _cexpr_vars(head.lhs, used)
            _cexpr_vars(head.rhs, used)
        elif isinstance(head, ast.ChoiceHead):
            for term in (head.lower, head.upper):
                if term is not None:
                    _term_vars(term, used)
            for elem in head.elements:
                elem_bound = set(bound)
                elem_used: set = set()
                _term_vars(elem.term, elem_used)
                for cond in elem.conds:
                    if isinstance(cond, ast.AtomLit):
                        _term_vars(cond.term, elem_used)
                        if not cond.neg:
                            _term_vars(cond.term, elem_bound)
                    else:
                        _term_vars(cond.left, elem_used)
                        _term_vars(cond.right, elem_used)
                if not elem_used <= elem_bound:
                    missing = ", ".join(sorted(elem_used - elem_bound))
                    raise GroundingError(f"line {rule.line}: unsafe variables {missing}")
        if not used <= bound:
            missing = ", ".join(sorted(used - bound))
            raise GroundingError(f"line {rule.line}: unsafe variables {missing}")

    # -- possible / certain fixpoint ------------------------------------------

    def _add_possible(self, atom: ast.Sym) -> bool:
        if atom in self.possible_set:
            return False
        self.possible_set.add(atom)
        self.possible.setdefault((atom.name, len(atom.args)), []).append(atom)
        return True

    def _fixpoint(self, rules: list) -> None:
        # Possible and certain sets grow together: choice-element conditions
        # range over certain atoms, while certain derivations match bodies
        # against possible atoms, so both passes iterate to a joint fixpoint.
        changed = True
        while changed:
            changed = False
            # Certain atoms: definite rules only (non-choice head, no negative
            # literal, no theory literal), with every body atom already certain.
            for rule in rules:
                head = rule.head
                if not isinstance(head, ast.Sym):
                    continue
                if any(isinstance(l, ast.CLit) for l in rule.body):
                    continue
                if any(isinstance(l, ast.AtomLit) and l.neg for l in rule.body):
                    continue
                for theta in self._bindings(rule.body, {}):
                    if not self._builtins_hold(rule.body, theta):
                        continue
                    if all(
                        _subst(l.term, theta) in self.certain
                        for l in rule.body
                        if isinstance(l, ast.AtomLit)
                    ):
                        atom = _subst(head, theta)
                        if atom not in self.certain:
                            self.certain.add(atom)
                            self._add_possible(atom)
                            changed = True
            for rule in rules:
                for theta in self._bindings(rule.body, {}):
                    if not self._builtins_hold(rule.body, theta):
                        continue
                    head = rule.head
                    if isinstance(head, ast.Sym):
                        changed |= self._add_possible(_subst(head, theta))
                    elif isinstance(head, ast.ChoiceHead):
                        for elem in head.elements:
                            for theta2 in self._cond_bindings(elem.conds, theta):
                                changed |= self._add_possible(_subst(elem.term, theta2))

    def _bindings(self, body: Iterable, theta: dict):
        """Enumerate substitutions matching positive regular literals against
        the possible atoms, in insertion order."""
        patterns = [l.term for l in body if isinstance(l, ast.AtomLit) and not l.neg]

        def recurse(i: int, theta: dict):
            if i == len(patterns):
                yield theta
                return
            pattern = patterns[i]
            pvars: set = set()
            _term_vars(pattern, pvars)
            if pvars <= theta.keys():
                # fully bound pattern: a membership test beats scanning
                if _subst(pattern, theta) in self.possible_set:
                    yield from recurse(i + 1, theta)
                return
            key = (pattern.name, len(pattern.args))
            for ground in self.possible.get(key, []):
                theta2 = _match(pattern, ground, theta)
                if theta2 is not None:
                    yield from recurse(i + 1, theta2)

        yield from recurse(0, dict(theta))

    def _cond_bindings(self, conds: Iterable, theta: dict):
        """Ground condition literals over certainly-true atoms."""
        conds = sorted(
            conds, key=lambda c: 0 if isinstance(c, ast.AtomLit) and not c.neg else 1
        )

        def recurse(i: int, theta: dict):
            if i == len(conds):
                yield theta
                return
            cond = conds[i]
            if isinstance(cond, ast.AtomLit) and not cond.neg:
                key = (cond.term.name, len(cond.term.args))
                for ground in self.possible.get(key, []):
                    if ground not in self.certain:
                        continue
                    theta2 = _match(cond.term, ground, theta)
                    if theta2 is not None:
                        yield from recurse(i + 1, theta2)
            elif isinstance(cond, ast.AtomLit):
                if _subst(cond.term, theta) not in self.certain:
                    yield from recurse(i + 1, theta)
            else:
                if self._builtin_holds(cond, theta):
                    yield from recurse(i + 1, theta)

        yield from recurse(0, dict(theta))

    def _builtin_holds(self, lit: ast.BuiltinLit, theta: dict) -> bool:
        left = _subst(lit.left, theta)
        right = _subst(lit.right, theta)
        return (left == right) if lit.op == "==" else (left != right)

    def _builtins_hold(self, body: Iterable, theta: dict) -> bool:
        return all(
            self._builtin_holds(l, theta) for l in body if isinstance(l, ast.BuiltinLit)
        )

    # -- rule instantiation ----------------------------------------------------

    def _ground_rule(self, rule: ast.RuleStmt) -> None:
        for theta in self._bindings(rule.body, {}):
            if not self._builtins_hold(rule.body, theta):
                continue
            body = self._ground_body(rule.body, theta)
            if body is None:
                continue
            pos, neg, cpos, cneg = body
            head = rule.head
            if head is None:
                self._emit(GroundRule(pos=pos, neg=neg, cpos=cpos, cneg=cneg))
            elif isinstance(head, ast.Sym):
                name = _subst(head, theta).render()
                self.program.atoms.intern(name)
                self._emit(GroundRule(head=name, pos=pos, neg=neg, cpos=cpos, cneg=cneg))
            elif isinstance(head, ast.CAtom):
                constraint = self._ground_catom(head, theta)
                self.program.gamma.register(constraint)
                self._note_vars(constraint.variables())
                self._emit(
                    GroundRule(chead=constraint, pos=pos, neg=neg, cpos=cpos, cneg=cneg)
                )
            else:
                self._ground_choice(head, theta, pos, neg, cpos, cneg)

    def _ground_choice(self, head: ast.ChoiceHead, theta, pos, neg, cpos, cneg) -> None:
        elements: list = []
        seen: set = set()
        for elem in head.elements:
            for theta2 in self._cond_bindings(elem.conds, theta):
                name = _subst(elem.term, theta2).render()
                if name not in seen:
                    seen.add(name)
                    elements.append(name)
        lower = self._ground_bound(head.lower, theta)
        upper = self._ground_bound(head.upper, theta)
        card = None
        if lower is not None or upper is not None:
            card = len(self.program.cardinality_rules)
            self.program.cardinality_rules.append(
                CardinalityRule(lower, upper, tuple(elements), pos, neg, cpos, cneg)
            )
        for name in elements:
            self.program.atoms.intern(name)
            self.program.choice_atoms.add(name)
            self._emit(
                GroundRule(
                    head=name, choice=True, pos=pos, neg=neg, cpos=cpos, cneg=cneg, card=card
                )
            )

    def _ground_bound(self, term: Optional[ast.Term], theta: dict) -> Optional[int]:
        if term is None:
            return None
        ground = _subst(term, theta)
        if not isinstance(ground, ast.Num):
            raise GroundingError(f"cardinality bound {ground.render()} is not an integer")
        return ground.value

    def _ground_body(self, body: Iterable, theta: dict):
        """Ground and simplify one body; returns None when certainly false."""
        pos: list = []
        neg: list = []
        cpos: list = []
        cneg: list = []
        for lit in body:
            if isinstance(lit, ast.BuiltinLit):
                continue  # already checked
            if isinstance(lit, ast.AtomLit):
                atom = _subst(lit.term, theta)
                if lit.neg:
                    if atom in self.certain:
                        return None
                    if atom in self.possible_set:
                        name = atom.render()
                        self.program.atoms.intern(name)
                        neg.append(name)
                else:
                    if atom not in self.certain:
                        name = atom.render()
                        self.program.atoms.intern(name)
                        pos.append(name)
            else:
                constraint = self._ground_catom(lit.catom, theta)
                self.program.gamma.register(constraint)
                self._note_vars(constraint.variables())
                (cneg if lit.neg else cpos).append(constraint)
        return tuple(pos), tuple(neg), tuple(cpos), tuple(cneg)

    def _emit(self, rule: GroundRule) -> None:
        self.program.rules.append(rule)

    # -- theory terms -----------------------------------------------------------

    def _ground_catom(self, catom: ast.CAtom, theta: dict) -> ArithConstraint:
        return ArithConstraint(
            self._ground_cexpr(catom.lhs, theta), catom.rel, self._ground_cexpr(catom.rhs, theta)
        )

    def _ground_cexpr(self, ce: ast.CExpr, theta: dict) -> Expr:
        if isinstance(ce, ast.CTerm):
            term = _subst(ce.term, theta)
            if isinstance(term, ast.Num):
                return Const(term.value)
            return VarRef(term.render())
        if isinstance(ce, ast.CBin):
            return BinOp(ce.op, self._ground_cexpr(ce.left, theta), self._ground_cexpr(ce.right, theta))
        return AbsOp(self._ground_cexpr(ce.arg, theta))

    def _note_vars(self, names: Iterable[str]) -> None:
        for name in names:
            self.var_order.setdefault(name)

    # -- global constraints and optimization -------------------------------------

    def _ground_statement_body(self, body: tuple, line: int, what: str) -> bool:
        """Globals must reduce to facts; returns False when certainly false."""
        for theta in self._bindings(body, {}):
            if not self._builtins_hold(body, theta):
                continue
            ground = self._ground_body(body, theta)
            if ground is None:
                continue
            if any(ground):
                raise GroundingError(
                    f"line {line}: {what} has a non-empty body after grounding"
                )
            return True
        return not any(
            True for l in body if isinstance(l, (ast.AtomLit, ast.BuiltinLit, ast.CLit))
        )

    def _ground_count(self, stmt: ast.CountStmt) -> None:
        if not self._ground_statement_body(stmt.body, stmt.line, "$count"):
            return
        elements: list = []
        for catom, conds in stmt.elements:
            for theta in self._cond_bindings(conds, {}):
                c = self._ground_catom(catom, theta)
                self._note_vars(c.variables())
                elements.append(c)
        bound = self._ground_cexpr(stmt.bound, {})
        self._note_vars(bound.variables())
        self.program.global_constraints.append(
            CountConstraint(tuple(elements), stmt.rel, bound)
        )

    def _ground_distinct(self, stmt: ast.DistinctStmt) -> None:
        if not self._ground_statement_body(stmt.body, stmt.line, "$distinct"):
            return
        elements: list = []
        for cexpr, conds in stmt.elements:
            for theta in self._cond_bindings(conds, {}):
                e = self._ground_cexpr(cexpr, theta)
                self._note_vars(e.variables())
                elements.append(e)
        if len(elements) < 2:
            return  # a tautology
        self.program.global_constraints.append(DistinctConstraint(tuple(elements)))

    def _ground_optimize(self, stmt: ast.OptimizeStmt) -> None:
        exprs: list = []
        for cexpr, conds in stmt.elements:
            for theta in self._cond_bindings(conds, {}):
                e = self._ground_cexpr(cexpr, theta)
                self._note_vars(e.variables())
                exprs.append(e)
        if exprs:
            self.program.optimize_statements.append((stmt.sense, exprs))


def ground_program(statements: list) -> GroundProgram:
    """Ground a parsed statement list."""
    return _Grounder(statements).run()


def ground_text(text: str) -> GroundProgram:
    return ground_program(ast.parse_program(text))


# ---------------------------------------------------------------------------
# Tightness


def tightness_check(program: GroundProgram) -> None:
    """Reject programs whose positive dependency graph has a cycle."""
    sorter: graphlib.TopologicalSorter = graphlib.TopologicalSorter()
    for rule in program.rules:
        if rule.head is not None:
            sorter.add(rule.head, *rule.pos)
    try:
        sorter.prepare()
    except graphlib.CycleError as err:
        cycle = err.args[1]
        names = ", ".join(dict.fromkeys(cycle))
        raise GroundingError(f"program is not tight: positive cycle through {names}") from None
