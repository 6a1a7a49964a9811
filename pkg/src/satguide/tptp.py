"""Parser and printer for the TPTP CNF subset.

Accepted input is a sequence of `cnf(<name>, <role>, <formula>).` statements
with `%` line comments. Formulas are disjunctions of literals joined by `|`,
`~` negates, uppercase-initial identifiers are variables. Roles axiom,
hypothesis (folded into axiom) and negated_conjecture are recognized.
"""

from __future__ import annotations

from dataclasses import dataclass

from .terms import (
    FUNCTION,
    PREDICATE,
    ROLE_AXIOM,
    ROLE_GOAL,
    App,
    Clause,
    Literal,
    Problem,
    Symbol,
    Term,
    Var,
)


class TptpError(Exception):
    """Base class for problems found while reading TPTP input."""


class TptpSyntaxError(TptpError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ArityConflictError(TptpError):
    def __init__(self, name: str, kind: str, old: int, new: int):
        super().__init__(
            f"symbol {name!r} ({kind}) used with arity {new} but previously {old}")
        self.symbol = name


_ROLES = {"axiom": ROLE_AXIOM, "hypothesis": ROLE_AXIOM,
          "negated_conjecture": ROLE_GOAL}


@dataclass
class _Token:
    kind: str  # ident | var | punct
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    toks: list[_Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "(),.|~":
            toks.append(_Token("punct", ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isalnum() or ch == "_":
            start = i
            startcol = col
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
                col += 1
            word = text[start:i]
            kind = "var" if word[0].isupper() or word[0] == "_" else "ident"
            toks.append(_Token(kind, word, line, startcol))
            continue
        raise TptpSyntaxError(f"unexpected character {ch!r}", line, col)
    return toks


class _Parser:
    def __init__(self, text: str,
                 signature: dict[tuple[str, str], Symbol] | None = None):
        self.toks = _tokenize(text)
        self.pos = 0
        self.signature = signature if signature is not None else {}

    def _peek(self) -> _Token | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def _next(self, kind: str | None = None, text: str | None = None) -> _Token:
        tok = self._peek()
        if tok is None:
            last = self.toks[-1] if self.toks else _Token("punct", "", 1, 1)
            raise TptpSyntaxError("unexpected end of input", last.line, last.column)
        if kind is not None and tok.kind != kind:
            raise TptpSyntaxError(f"expected {kind}, got {tok.text!r}",
                                  tok.line, tok.column)
        if text is not None and tok.text != text:
            raise TptpSyntaxError(f"expected {text!r}, got {tok.text!r}",
                                  tok.line, tok.column)
        self.pos += 1
        return tok

    def _symbol(self, name: str, kind: str, arity: int, tok: _Token) -> Symbol:
        key = (name, kind)
        known = self.signature.get(key)
        if known is None:
            sym = Symbol(name, kind, arity)
            self.signature[key] = sym
            return sym
        if known.arity != arity:
            raise ArityConflictError(name, kind, known.arity, arity)
        return known

    def _term(self) -> Term:
        tok = self._next()
        if tok.kind == "var":
            return Var(tok.text)
        if tok.kind != "ident":
            raise TptpSyntaxError(f"expected term, got {tok.text!r}",
                                  tok.line, tok.column)
        args = self._args()
        head = self._symbol(tok.text, FUNCTION, len(args), tok)
        return App(head, args)

    def _args(self) -> tuple:
        nxt = self._peek()
        if nxt is None or not (nxt.kind == "punct" and nxt.text == "("):
            return ()
        self._next()
        args = [self._term()]
        while self._peek() and self._peek().text == ",":
            self._next()
            args.append(self._term())
        self._next("punct", ")")
        return tuple(args)

    def _literal(self) -> Literal:
        positive = True
        while self._peek() and self._peek().text == "~":
            self._next()
            positive = not positive
        tok = self._next("ident")
        args = self._args()
        head = self._symbol(tok.text, PREDICATE, len(args), tok)
        return Literal(positive, App(head, args))

    def _formula(self) -> tuple[Literal, ...]:
        # A parenthesized disjunction is allowed around the whole formula.
        if self._peek() and self._peek().text == "(":
            save = self.pos
            self._next()
            try:
                lits = self._disjunction()
                self._next("punct", ")")
                return lits
            except TptpError:
                self.pos = save
        return self._disjunction()

    def _disjunction(self) -> tuple[Literal, ...]:
        lits = [self._literal()]
        while self._peek() and self._peek().text == "|":
            self._next()
            lits.append(self._literal())
        return tuple(lits)

    def parse(self, name: str) -> Problem:
        clauses: list[Clause] = []
        while self._peek() is not None:
            kw = self._next("ident")
            if kw.text != "cnf":
                raise TptpSyntaxError(f"expected 'cnf', got {kw.text!r}",
                                      kw.line, kw.column)
            self._next("punct", "(")
            self._next()  # clause name, kept only for position
            self._next("punct", ",")
            role_tok = self._next("ident")
            role = _ROLES.get(role_tok.text)
            if role is None:
                raise TptpSyntaxError(f"unknown role {role_tok.text!r}",
                                      role_tok.line, role_tok.column)
            self._next("punct", ",")
            lits = self._formula()
            self._next("punct", ")")
            self._next("punct", ".")
            clauses.append(Clause(len(clauses) + 1, lits, role))
        return Problem(name, clauses, self.signature)


def parse_problem(text: str, name: str = "problem") -> Problem:
    """Parse TPTP CNF text into a Problem with clause ids in source order."""
    return _Parser(text).parse(name)


# ---------------------------------------------------------------------------
# Printing


def format_term(term: Term) -> str:
    if isinstance(term, Var):
        return term.name
    if not term.args:
        return term.head.name
    return f"{term.head.name}({','.join(format_term(a) for a in term.args)})"


def format_literal(lit: Literal) -> str:
    sign = "" if lit.positive else "~"
    return sign + format_term(lit.atom)


def format_clause_body(clause: Clause) -> str:
    if clause.is_empty():
        return "$false"
    return "|".join(format_literal(l) for l in clause.literals)


def format_clause(clause: Clause, name: str | None = None) -> str:
    role = clause.role if clause.role != "derived" else "axiom"
    return f"cnf({name or f'c{clause.id}'},{role},{format_clause_body(clause)})."


def format_problem(problem: Problem) -> str:
    return "\n".join(format_clause(c) for c in problem.clauses) + "\n"


def parse_clause_body(text: str,
                      signature: dict[tuple[str, str], Symbol] | None = None,
                      clause_id: int = 0, role: str = ROLE_AXIOM) -> Clause:
    """Parse a bare disjunction like `p(X)|~q(f(X))` into a clause.

    Pass the same signature dict across calls to enforce rigid arities over
    a whole clause collection (e.g. one training-sample record).
    """
    p = _Parser(text, signature)
    lits = p._formula()
    if p._peek() is not None:
        tok = p._peek()
        raise TptpSyntaxError(f"trailing input {tok.text!r}", tok.line, tok.column)
    return Clause(clause_id, lits, role)
