"""Tokenizer and recursive-descent parser for the input language.

Supported statements: normal rules and integrity constraints, choice and
cardinality rules with old-style conditions (`lit : cond : cond`), pooling
`p(a;b)` and ranges `l..u` inside terms, symbolic builtins `==` / `!=`,
theory constraints built from `$+ $- $* $abs` and the relations
`$== $!= $< $<= $> $>=`, the `$domain`, `$count`, `$distinct`, `$minimize`
and `$maximize` statements, and `%` line comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .core import Relation


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Tokens

_TOKEN_RE = re.compile(
    r"""
      (?P<WS>\s+)
    | (?P<COMMENT>%[^\n]*)
    | (?P<NUMBER>\d+)
    | (?P<DOLLARREL>\$==|\$!=|\$<=|\$>=|\$<|\$>)
    | (?P<DOLLAROP>\$\+|\$-|\$\*)
    | (?P<DOLLARWORD>\$[a-z_]+)
    | (?P<IF>:-)
    | (?P<DOTS>\.\.)
    | (?P<EQ>==)
    | (?P<NE>!=)
    | (?P<IDENT>[a-z][A-Za-z0-9_]*)
    | (?P<VAR>[A-Z_][A-Za-z0-9_]*)
    | (?P<PUNCT>[.,;:{}\[\]()\-])
    """,
    re.VERBOSE,
)

_DOLLAR_WORDS = {"$domain", "$count", "$distinct", "$minimize", "$maximize", "$abs"}

_RELATIONS = {r.value: r for r in Relation}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup or ""
        value = m.group()
        col = pos - line_start + 1
        if kind in ("WS", "COMMENT"):
            nl = value.count("\n")
            if nl:
                line += nl
                line_start = pos + value.rindex("\n") + 1
        else:
            if kind == "DOLLARWORD" and value not in _DOLLAR_WORDS:
                raise ParseError(f"unknown operator {value!r}", line, col)
            if kind == "PUNCT":
                kind = value
            if kind == "IDENT" and value == "not":
                kind = "NOT"
            tokens.append(Token(kind, value, line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: int

    def render(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Sym:
    name: str
    args: tuple = ()

    def render(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({','.join(a.render() for a in self.args)})"


@dataclass(frozen=True)
class Var:
    name: str

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class RangeT:
    lo: "Term"
    hi: "Term"

    def render(self) -> str:
        return f"{self.lo.render()}..{self.hi.render()}"


@dataclass(frozen=True)
class PoolT:
    options: tuple

    def render(self) -> str:
        return ";".join(o.render() for o in self.options)


Term = Union[Num, Sym, Var, RangeT, PoolT]


@dataclass(frozen=True)
class CTerm:
    term: Term


@dataclass(frozen=True)
class CBin:
    op: str
    left: "CExpr"
    right: "CExpr"


@dataclass(frozen=True)
class CAbs:
    arg: "CExpr"


CExpr = Union[CTerm, CBin, CAbs]


@dataclass(frozen=True)
class CAtom:
    lhs: CExpr
    rel: Relation
    rhs: CExpr


@dataclass(frozen=True)
class AtomLit:
    term: Sym
    neg: bool = False


@dataclass(frozen=True)
class BuiltinLit:
    op: str  # "==" or "!="
    left: Term
    right: Term


@dataclass(frozen=True)
class CLit:
    catom: CAtom
    neg: bool = False


BodyLit = Union[AtomLit, BuiltinLit, CLit]


@dataclass(frozen=True)
class ChoiceElem:
    term: Sym
    conds: tuple = ()


@dataclass(frozen=True)
class ChoiceHead:
    lower: Optional[Term]
    upper: Optional[Term]
    elements: tuple


Head = Union[Sym, CAtom, ChoiceHead, None]


@dataclass
class RuleStmt:
    head: Head
    body: tuple
    line: int = 0


@dataclass
class DomainStmt:
    lo: int
    hi: int
    line: int = 0


@dataclass
class CountStmt:
    elements: tuple  # of (CAtom, conds)
    rel: Relation = Relation.EQ
    bound: CExpr = CTerm(Num(0))
    body: tuple = ()
    line: int = 0


@dataclass
class DistinctStmt:
    elements: tuple  # of (CExpr, conds)
    body: tuple = ()
    line: int = 0


@dataclass
class OptimizeStmt:
    sense: str  # "minimize" | "maximize"
    elements: tuple  # of (CExpr, conds)
    line: int = 0


Statement = Union[RuleStmt, DomainStmt, CountStmt, DistinctStmt, OptimizeStmt]


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, ahead: int = 1) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tok
        self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            self.fail(f"expected {kind!r}, found {self.tok.text!r}")
        return self.advance()

    def fail(self, message: str):
        raise ParseError(message, self.tok.line, self.tok.col)

    def at(self, *kinds: str) -> bool:
        return self.tok.kind in kinds

    # -- statements ---------------------------------------------------------

    def parse_program(self) -> list[Statement]:
        statements = []
        while not self.at("EOF"):
            statements.append(self.parse_statement())
        return statements

    def parse_statement(self) -> Statement:
        line = self.tok.line
        if self.at("DOLLARWORD"):
            word = self.tok.text
            if word == "$domain":
                return self.parse_domain()
            if word == "$count":
                return self.parse_count()
            if word == "$distinct":
                return self.parse_distinct()
            if word in ("$minimize", "$maximize"):
                return self.parse_optimize()
            # $abs can begin a constraint-atom head
        if self.at("IF"):
            self.advance()
            body = self.parse_body()
            self.expect(".")
            return RuleStmt(None, tuple(body), line)
        head = self.parse_head()
        body: list = []
        if self.at("IF"):
            self.advance()
            body = self.parse_body()
        self.expect(".")
        return RuleStmt(head, tuple(body), line)

    def parse_domain(self) -> DomainStmt:
        line = self.tok.line
        self.advance()
        self.expect("(")
        lo = self.parse_signed_number()
        self.expect("DOTS")
        hi = self.parse_signed_number()
        self.expect(")")
        self.expect(".")
        return DomainStmt(lo, hi, line)

    def parse_signed_number(self) -> int:
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        value = int(self.expect("NUMBER").text)
        return -value if neg else value

    def parse_count(self) -> CountStmt:
        line = self.tok.line
        self.advance()
        self.expect("[")
        elements = []
        if not self.at("]"):
            while True:
                catom = self.parse_constraint_atom()
                conds = self.parse_conditions()
                elements.append((catom, tuple(conds)))
                if self.at(",", ";"):
                    self.advance()
                    continue
                break
        self.expect("]")
        if not self.at("DOLLARREL"):
            self.fail("expected a theory relation after $count[...]")
        rel = _RELATIONS[self.advance().text]
        bound = self.parse_cexpr()
        body: list = []
        if self.at("IF"):
            self.advance()
            body = self.parse_body()
        self.expect(".")
        return CountStmt(tuple(elements), rel, bound, tuple(body), line)

    def parse_distinct(self) -> DistinctStmt:
        line = self.tok.line
        self.advance()
        self.expect("{")
        elements = []
        if not self.at("}"):
            while True:
                expr = self.parse_cexpr()
                conds = self.parse_conditions()
                elements.append((expr, tuple(conds)))
                if self.at(",", ";"):
                    self.advance()
                    continue
                break
        self.expect("}")
        body: list = []
        if self.at("IF"):
            self.advance()
            body = self.parse_body()
        self.expect(".")
        return DistinctStmt(tuple(elements), tuple(body), line)

    def parse_optimize(self) -> OptimizeStmt:
        line = self.tok.line
        sense = self.advance().text.lstrip("$")
        self.expect("{")
        elements = []
        if not self.at("}"):
            while True:
                expr = self.parse_cexpr()
                conds = self.parse_conditions()
                elements.append((expr, tuple(conds)))
                if self.at(",", ";"):
                    self.advance()
                    continue
                break
        self.expect("}")
        self.expect(".")
        return OptimizeStmt(sense, tuple(elements), line)

    def parse_conditions(self) -> list:
        conds = []
        while self.at(":"):
            self.advance()
            conds.append(self.parse_condition())
        return conds

    def parse_condition(self) -> BodyLit:
        neg = False
        if self.at("NOT"):
            self.advance()
            neg = True
        left = self.parse_term()
        if self.at("EQ", "NE"):
            op = self.advance().text
            right = self.parse_term()
            if neg:
                op = "!=" if op == "==" else "=="
            return BuiltinLit(op, left, right)
        if not isinstance(left, Sym):
            self.fail("condition must be an atom or a builtin comparison")
        return AtomLit(left, neg)

    # -- heads and bodies ----------------------------------------------------

    def parse_head(self) -> Head:
        if self.at("{"):
            return self.parse_choice(None)
        if self.at("NUMBER") and self.peek().kind == "{":
            lower = Num(int(self.advance().text))
            return self.parse_choice(lower)
        if self.at("VAR") and self.peek().kind == "{":
            lower = Var(self.advance().text)
            return self.parse_choice(lower)
        expr = self.parse_cexpr()
        if self.at("DOLLARREL"):
            rel = _RELATIONS[self.advance().text]
            rhs = self.parse_cexpr()
            return CAtom(expr, rel, rhs)
        term = self.plain_term(expr, "rule head")
        if not isinstance(term, Sym):
            self.fail("rule head must be an atom")
        return term

    def parse_choice(self, lower: Optional[Term]) -> ChoiceHead:
        self.expect("{")
        elements = []
        if not self.at("}"):
            while True:
                term = self.parse_term()
                if not isinstance(term, Sym):
                    self.fail("choice element must be an atom")
                conds = self.parse_conditions()
                elements.append(ChoiceElem(term, tuple(conds)))
                if self.at(",", ";"):
                    self.advance()
                    continue
                break
        self.expect("}")
        upper: Optional[Term] = None
        if self.at("NUMBER"):
            upper = Num(int(self.advance().text))
        elif self.at("VAR"):
            upper = Var(self.advance().text)
        return ChoiceHead(lower, upper, tuple(elements))

    def parse_body(self) -> list:
        lits = [self.parse_literal()]
        while self.at(","):
            self.advance()
            lits.append(self.parse_literal())
        return lits

    def parse_literal(self) -> BodyLit:
        neg = False
        if self.at("NOT"):
            self.advance()
            neg = True
        expr = self.parse_cexpr()
        if self.at("DOLLARREL"):
            rel = _RELATIONS[self.advance().text]
            rhs = self.parse_cexpr()
            return CLit(CAtom(expr, rel, rhs), neg)
        if self.at("EQ", "NE"):
            op = self.advance().text
            left = self.plain_term(expr, "builtin comparison")
            right = self.parse_term()
            if neg:
                op = "!=" if op == "==" else "=="
            return BuiltinLit(op, left, right)
        term = self.plain_term(expr, "body literal")
        if not isinstance(term, Sym):
            self.fail("body literal must be an atom")
        return AtomLit(term, neg)

    def plain_term(self, expr: CExpr, what: str) -> Term:
        if not isinstance(expr, CTerm):
            self.fail(f"{what} cannot contain theory operators")
        return expr.term

    # -- theory expressions ---------------------------------------------------

    def parse_constraint_atom(self) -> CAtom:
        lhs = self.parse_cexpr()
        if not self.at("DOLLARREL"):
            self.fail("expected a theory relation")
        rel = _RELATIONS[self.advance().text]
        rhs = self.parse_cexpr()
        return CAtom(lhs, rel, rhs)

    def parse_cexpr(self) -> CExpr:
        expr = self.parse_cterm()
        while self.at("DOLLAROP") and self.tok.text in ("$+", "$-"):
            op = self.advance().text[1]
            expr = CBin(op, expr, self.parse_cterm())
        return expr

    def parse_cterm(self) -> CExpr:
        expr = self.parse_cfactor()
        while self.at("DOLLAROP") and self.tok.text == "$*":
            self.advance()
            expr = CBin("*", expr, self.parse_cfactor())
        return expr

    def parse_cfactor(self) -> CExpr:
        if self.at("DOLLARWORD") and self.tok.text == "$abs":
            self.advance()
            self.expect("(")
            inner = self.parse_cexpr()
            self.expect(")")
            return CAbs(inner)
        if self.at("("):
            self.advance()
            inner = self.parse_cexpr()
            self.expect(")")
            return inner
        return CTerm(self.parse_term())

    # -- terms ----------------------------------------------------------------

    def parse_term(self) -> Term:
        if self.at("-"):
            self.advance()
            value = int(self.expect("NUMBER").text)
            return Num(-value)
        if self.at("NUMBER"):
            first: Term = Num(int(self.advance().text))
        elif self.at("VAR"):
            first = Var(self.advance().text)
        elif self.at("IDENT"):
            name = self.advance().text
            if self.at("("):
                self.advance()
                args = [self.parse_arg()]
                while self.at(","):
                    self.advance()
                    args.append(self.parse_arg())
                self.expect(")")
                first = Sym(name, tuple(args))
            else:
                first = Sym(name)
        else:
            self.fail(f"expected a term, found {self.tok.text!r}")
        if self.at("DOTS"):
            self.advance()
            hi = self.parse_term()
            return RangeT(first, hi)
        return first

    def parse_arg(self) -> Term:
        options = [self.parse_term()]
        while self.at(";"):
            self.advance()
            options.append(self.parse_term())
        if len(options) == 1:
            return options[0]
        return PoolT(tuple(options))


def parse_program(text: str) -> list[Statement]:
    """Parse program text into a list of statements."""
    return _Parser(tokenize(text)).parse_program()
