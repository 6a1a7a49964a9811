"""First-order CNF data model: symbols, terms, literals, clauses, problems."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

FUNCTION = "function"
PREDICATE = "predicate"

ROLE_AXIOM = "axiom"
ROLE_GOAL = "negated_conjecture"
ROLE_DERIVED = "derived"

RULE_INPUT = "input"
RULE_RESOLUTION = "resolution"
RULE_FACTORING = "factoring"


@dataclass(frozen=True)
class Symbol:
    """A function or predicate symbol with a fixed arity."""

    name: str
    kind: str
    arity: int

    def __post_init__(self):
        if self.kind not in (FUNCTION, PREDICATE):
            raise ValueError(f"bad symbol kind: {self.kind!r}")
        if self.arity < 0:
            raise ValueError("arity must be non-negative")


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class App:
    head: Symbol
    args: tuple = ()


# A term is either a Var or an App whose head has kind FUNCTION.
# Atoms are Apps whose head has kind PREDICATE.
Term = Var | App


@dataclass(frozen=True)
class Literal:
    positive: bool
    atom: App

    def complement(self) -> "Literal":
        return Literal(not self.positive, self.atom)


@dataclass
class Clause:
    id: int
    literals: tuple[Literal, ...]
    role: str = ROLE_DERIVED
    parents: tuple[int, ...] = ()
    rule: str = RULE_INPUT

    def is_empty(self) -> bool:
        return not self.literals

    def __len__(self) -> int:
        return len(self.literals)


@dataclass
class Problem:
    """A CNF problem: clauses plus the signature inferred from them."""

    name: str
    clauses: list[Clause] = field(default_factory=list)
    signature: dict[tuple[str, str], Symbol] = field(default_factory=dict)

    @property
    def goal(self) -> list[Clause]:
        return [c for c in self.clauses if c.role == ROLE_GOAL]

    def clause_by_id(self, cid: int) -> Clause:
        for c in self.clauses:
            if c.id == cid:
                return c
        raise KeyError(cid)


# ---------------------------------------------------------------------------
# Traversal helpers


def iter_subterms(term: Term):
    """Yield term and every subterm, depth-first, arguments left to right."""
    yield term
    if isinstance(term, App):
        for a in term.args:
            yield from iter_subterms(a)


def iter_clause_terms(clause: Clause):
    """All argument terms of all atoms in the clause (atoms excluded)."""
    for lit in clause.literals:
        for a in lit.atom.args:
            yield from iter_subterms(a)


def clause_vars(clause: Clause) -> list[str]:
    """Variable names in first-occurrence order."""
    seen: list[str] = []
    for t in iter_clause_terms(clause):
        if isinstance(t, Var) and t.name not in seen:
            seen.append(t.name)
    return seen


def symbol_count(clause: Clause) -> int:
    """Total symbol and variable occurrences, the base weight function."""
    n = 0
    for lit in clause.literals:
        n += 1  # the predicate
        for t in iter_clause_terms_of_literal(lit):
            n += 1
    return n


def iter_clause_terms_of_literal(lit: Literal):
    for a in lit.atom.args:
        yield from iter_subterms(a)


def term_depth(term: Term) -> int:
    if isinstance(term, Var) or not term.args:
        return 1
    return 1 + max(term_depth(a) for a in term.args)


# ---------------------------------------------------------------------------
# Substitution

Substitution = dict[str, Term]


def apply_to_term(subst: Substitution, term: Term) -> Term:
    if isinstance(term, Var):
        bound = subst.get(term.name)
        return term if bound is None else bound
    if not term.args:
        return term
    return App(term.head, tuple(apply_to_term(subst, a) for a in term.args))


def apply_to_literal(subst: Substitution, lit: Literal) -> Literal:
    return Literal(lit.positive, apply_to_term(subst, lit.atom))


def apply_substitution(subst: Substitution, clause: Clause,
                       new_id: int | None = None) -> Clause:
    """Apply subst to every literal; all of dom(subst) replaced at once."""
    lits = tuple(apply_to_literal(subst, l) for l in clause.literals)
    if new_id is None:
        return Clause(clause.id, lits, clause.role, clause.parents, clause.rule)
    return Clause(new_id, lits, ROLE_DERIVED, clause.parents, clause.rule)


def rename_vars(clause_lits: tuple[Literal, ...], suffix: str) -> tuple[Literal, ...]:
    """Rename every variable by appending suffix (used to rename apart)."""

    def ren(t: Term) -> Term:
        if isinstance(t, Var):
            return Var(t.name + suffix)
        if not t.args:
            return t
        return App(t.head, tuple(ren(a) for a in t.args))

    return tuple(Literal(l.positive, ren(l.atom)) for l in clause_lits)


def normalize_literals(lits: tuple[Literal, ...]) -> tuple[Literal, ...]:
    """Rename variables to X0, X1, ... in first-occurrence order."""
    mapping: dict[str, Var] = {}

    def ren(t: Term) -> Term:
        if isinstance(t, Var):
            v = mapping.get(t.name)
            if v is None:
                v = Var(f"X{len(mapping)}")
                mapping[t.name] = v
            return v
        if not t.args:
            return t
        return App(t.head, tuple(ren(a) for a in t.args))

    return tuple(Literal(l.positive, ren(l.atom)) for l in lits)


def clause_key(clause: Clause) -> tuple:
    """Structural key after variable normalization; literal order kept."""
    idx: dict[str, int] = {}

    def key(t: Term):
        if isinstance(t, Var):
            if t.name not in idx:
                idx[t.name] = len(idx)
            return ("v", idx[t.name])
        return ("a", t.head.name, t.head.kind, tuple(key(a) for a in t.args))

    return tuple((l.positive, key(l.atom)) for l in clause.literals)


def collect_signature(clauses: list[Clause]) -> dict[tuple[str, str], Symbol]:
    """Signature inferred from symbol use in the given clauses."""
    signature: dict[tuple[str, str], Symbol] = {}
    for c in clauses:
        for lit in c.literals:
            signature[(lit.atom.head.name, lit.atom.head.kind)] = lit.atom.head
            for t in iter_clause_terms_of_literal(lit):
                if isinstance(t, App):
                    signature[(t.head.name, t.head.kind)] = t.head
    return signature


# ---------------------------------------------------------------------------
# Consistent symbol renaming

RenamingMap = dict[tuple[str, str], str]


def apply_renaming(problem: Problem, mapping: RenamingMap) -> Problem:
    """Rename every symbol through mapping; structure is untouched."""

    def sym(s: Symbol) -> Symbol:
        return Symbol(mapping[(s.name, s.kind)], s.kind, s.arity)

    def term(t: Term) -> Term:
        if isinstance(t, Var):
            return t
        return App(sym(t.head), tuple(term(a) for a in t.args))

    clauses = [
        Clause(c.id,
               tuple(Literal(l.positive, term(l.atom)) for l in c.literals),
               c.role, c.parents, c.rule)
        for c in problem.clauses
    ]
    signature = {}
    for (name, kind), s in problem.signature.items():
        signature[(mapping[(name, kind)], kind)] = sym(s)
    return Problem(problem.name, clauses, signature)


def rename_problem(problem: Problem, seed: int) -> tuple[Problem, RenamingMap]:
    """Arity-and-kind-preserving bijective renaming derived from seed.

    Fresh names are rn0, rn1, ... assigned by a seeded shuffle, so the same
    seed always yields the same renamed problem.
    """
    keys = sorted(problem.signature)
    order = list(range(len(keys)))
    random.Random(seed).shuffle(order)
    mapping: RenamingMap = {k: f"rn{order[i]}" for i, k in enumerate(keys)}
    return apply_renaming(problem, mapping), mapping


def invert_renaming(mapping: RenamingMap) -> RenamingMap:
    return {(new, kind): name for (name, kind), new in mapping.items()}
