"""Parsing for the clause strings found in training-sample files.

The wire syntax is the prover's TPTP literal subset: a disjunction of
literals joined by `|`, `~` for negation, uppercase-initial identifiers are
variables, and `f(a,g(X))` style applications. Arities must be used
consistently within one record.
"""

from __future__ import annotations

from dataclasses import dataclass


class ClauseSyntaxError(Exception):
    pass


@dataclass(frozen=True)
class Sym:
    name: str
    kind: str  # "function" | "predicate"
    arity: int


@dataclass(frozen=True)
class Term:
    """head is None for variables (then name is the variable name)."""

    head: Sym | None
    name: str = ""
    args: tuple = ()

    @property
    def is_var(self) -> bool:
        return self.head is None


@dataclass(frozen=True)
class Literal:
    positive: bool
    head: Sym
    args: tuple


@dataclass
class Clause:
    id: int
    literals: tuple[Literal, ...]
    role: str = "axiom"


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip_ws(self) -> None:
        while self.peek() and self.peek() in " \t":
            self.pos += 1

    def word(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.peek().isalnum() or self.peek() == "_":
            self.pos += 1
        if start == self.pos:
            raise ClauseSyntaxError(
                f"expected identifier at {self.pos} in {self.text!r}")
        return self.text[start:self.pos]

    def eat(self, ch: str) -> bool:
        self.skip_ws()
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str) -> None:
        if not self.eat(ch):
            raise ClauseSyntaxError(
                f"expected {ch!r} at {self.pos} in {self.text!r}")


class Signature:
    """Interns symbols and enforces rigid arities."""

    def __init__(self):
        self._symbols: dict[tuple[str, str], Sym] = {}

    def get(self, name: str, kind: str, arity: int) -> Sym:
        key = (name, kind)
        known = self._symbols.get(key)
        if known is None:
            sym = Sym(name, kind, arity)
            self._symbols[key] = sym
            return sym
        if known.arity != arity:
            raise ClauseSyntaxError(
                f"symbol {name} used with arities {known.arity} and {arity}")
        return known


def _parse_term(sc: _Scanner, sig: Signature) -> Term:
    name = sc.word()
    if name[0].isupper() or name[0] == "_":
        return Term(None, name)
    args = _parse_args(sc, sig)
    return Term(sig.get(name, "function", len(args)), "", args)


def _parse_args(sc: _Scanner, sig: Signature) -> tuple:
    if not sc.eat("("):
        return ()
    args = [_parse_term(sc, sig)]
    while sc.eat(","):
        args.append(_parse_term(sc, sig))
    sc.expect(")")
    return tuple(args)


def parse_clause(text: str, sig: Signature, clause_id: int = 0,
                 role: str = "axiom") -> Clause:
    sc = _Scanner(text)
    literals = []
    while True:
        positive = True
        while sc.eat("~"):
            positive = not positive
        name = sc.word()
        args = _parse_args(sc, sig)
        literals.append(Literal(positive, sig.get(name, "predicate",
                                                  len(args)), args))
        if not sc.eat("|"):
            break
    sc.skip_ws()
    if sc.pos != len(sc.text):
        raise ClauseSyntaxError(f"trailing input in {text!r}")
    return Clause(clause_id, tuple(literals), role)


def format_term(t: Term) -> str:
    if t.is_var:
        return t.name
    if not t.args:
        return t.head.name
    return f"{t.head.name}({','.join(format_term(a) for a in t.args)})"


def format_clause(clause: Clause) -> str:
    parts = []
    for lit in clause.literals:
        args = f"({','.join(format_term(a) for a in lit.args)})" \
            if lit.args else ""
        parts.append(("" if lit.positive else "~") + lit.head.name + args)
    return "|".join(parts)
