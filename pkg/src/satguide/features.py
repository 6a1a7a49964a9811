"""Symbol-independent clause featurization.

Clauses become hashed sparse vectors built from vertical and horizontal
cuts of the literal syntax trees, augmented with variable/symbol statistics
and problem-level counts. With anonymization on, symbol names are replaced
by arity markers (f<n> for functions, p<m> for predicates), so the vectors
are invariant under consistent symbol renaming.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .terms import (
    FUNCTION,
    App,
    Clause,
    Problem,
    Symbol,
    Term,
    Var,
    iter_clause_terms,
    iter_clause_terms_of_literal,
    term_depth,
)

DEFAULT_BASE = 2 ** 15
N_STATS = 20
N_PROBLEM_FEATURES = 22

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 2 ** 64


def fnv1a64(data: str) -> int:
    """64-bit FNV-1a over the UTF-8 bytes of data."""
    h = _FNV_OFFSET
    for byte in data.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) % _U64
    return h


def hash_feature(feature: str, base: int) -> int:
    """Stable hash index in [0, base); base must be a power of two."""
    if base <= 0 or base & (base - 1):
        raise ValueError("hash base must be a power of two")
    return fnv1a64(feature) % base


def anonymize_symbol(sym: Symbol) -> str:
    """Arity marker replacing the symbol name: f<n> or p<m>."""
    prefix = "f" if sym.kind == FUNCTION else "p"
    return f"{prefix}{sym.arity}"


def _name(sym: Symbol, anonymize: bool) -> str:
    return anonymize_symbol(sym) if anonymize else sym.name


def cut_features(clause: Clause, anonymize: bool = True) -> Counter:
    """Multiset of vertical and horizontal cut features of the clause.

    Vertical cuts: for every node of every literal tree, the top-down path
    of up to 3 symbol names ending at that node, joined by '.', prefixed by
    the literal's sign. Horizontal cuts: for every application node with
    arguments, head(top-of-arg,...). Variables appear as '*'.
    """
    feats: Counter = Counter()

    def top(t: Term) -> str:
        return "*" if isinstance(t, Var) else _name(t.head, anonymize)

    def visit(t: Term, path: tuple[str, ...], sign: str):
        label = top(t)
        path = (path + (label,))[-3:]
        feats["".join((sign, ".".join(path)))] += 1
        if isinstance(t, App):
            if t.args:
                feats[f"{label}({','.join(top(a) for a in t.args)})"] += 1
            for a in t.args:
                visit(a, path, sign)

    for lit in clause.literals:
        visit(lit.atom, (), "+" if lit.positive else "-")
    return feats


def _rank_stats(counts: list[int]) -> list[float]:
    """The 10-number profile shared by variable and symbol statistics."""
    if not counts:
        return [0.0] * 10
    desc = sorted(counts, reverse=True)
    asc = sorted(counts)
    pick = lambda xs, i: float(xs[i]) if i < len(xs) else 0.0
    return [
        float(len(counts)),
        float(sum(counts)),
        float(sum(1 for c in counts if c == 1)),
        float(sum(1 for c in counts if c > 1)),
        pick(desc, 0), pick(desc, 1), pick(desc, 2),
        pick(asc, 0), pick(asc, 1), pick(asc, 2),
    ]


def clause_statistics(clause: Clause) -> list[float]:
    """20 numbers: the rank profile of variable then symbol occurrences.

    Counted by symbol identity, not anonymized name, so the statistics
    distinguish e.g. a term using two different unary functions from one
    using the same function twice, while staying renaming-invariant.
    """
    var_occ: Counter = Counter()
    sym_occ: Counter = Counter()
    for lit in clause.literals:
        sym_occ[(lit.atom.head.name, lit.atom.head.kind)] += 1
        for t in iter_clause_terms_of_literal(lit):
            if isinstance(t, Var):
                var_occ[t.name] += 1
            else:
                sym_occ[(t.head.name, t.head.kind)] += 1
    return _rank_stats(list(var_occ.values())) + _rank_stats(list(sym_occ.values()))


def _joint_statistics(clauses: list[Clause]) -> list[float]:
    """Statistics over several clauses; variables stay clause-local."""
    var_occ: Counter = Counter()
    sym_occ: Counter = Counter()
    for i, clause in enumerate(clauses):
        for lit in clause.literals:
            sym_occ[(lit.atom.head.name, lit.atom.head.kind)] += 1
            for t in iter_clause_terms_of_literal(lit):
                if isinstance(t, Var):
                    var_occ[(i, t.name)] += 1
                else:
                    sym_occ[(t.head.name, t.head.kind)] += 1
    return _rank_stats(list(var_occ.values())) + _rank_stats(list(sym_occ.values()))


def problem_features(problem: Problem) -> list[float]:
    """The 22 problem-level counts, in the documented order."""
    clauses = problem.clauses
    goals = [c for c in clauses if c.role == "negated_conjecture"]
    axioms = [c for c in clauses if c.role != "negated_conjecture"]
    preds: set[tuple[str, int]] = set()
    funcs: set[tuple[str, int]] = set()
    n_pos = n_neg = var_total = 0
    distinct_vars = 0
    max_depth = 0
    for c in clauses:
        seen_vars: set[str] = set()
        for lit in c.literals:
            preds.add((lit.atom.head.name, lit.atom.head.arity))
            if lit.positive:
                n_pos += 1
            else:
                n_neg += 1
            for a in lit.atom.args:
                max_depth = max(max_depth, term_depth(a))
            for t in iter_clause_terms_of_literal(lit):
                if isinstance(t, Var):
                    var_total += 1
                    seen_vars.add(t.name)
                else:
                    funcs.add((t.head.name, t.head.arity))
        distinct_vars += len(seen_vars)
    lengths = [len(c.literals) for c in clauses]
    ground = sum(1 for c in clauses if not clause_has_var(c))
    horn = sum(1 for c in clauses
               if sum(1 for l in c.literals if l.positive) <= 1)
    return [
        float(len(goals)),
        float(len(axioms)),
        float(sum(1 for c in goals if len(c.literals) == 1)),
        float(sum(1 for c in axioms if len(c.literals) == 1)),
        float(horn),
        float(ground),
        float(len(clauses)),
        float(len(preds)),
        float(len(funcs)),
        float(max((a for _, a in funcs), default=0)),
        float(max((a for _, a in preds), default=0)),
        float(max(lengths, default=0)),
        float(sum(lengths) // len(clauses)) if clauses else 0.0,
        float(max_depth),
        float(n_pos),
        float(n_neg),
        float(sum(1 for c in clauses if c.literals
                  and all(l.positive for l in c.literals))),
        float(sum(1 for c in clauses if c.literals
                  and not any(l.positive for l in c.literals))),
        float(distinct_vars),
        float(var_total),
        float(sum(1 for _, a in funcs if a == 0)),
        float(sum(1 for _, a in funcs if a > 0)),
    ]


def clause_has_var(clause: Clause) -> bool:
    return any(isinstance(t, Var) for t in iter_clause_terms(clause))


# ---------------------------------------------------------------------------
# Vector assembly


@dataclass
class SparseVector:
    """Map from index in [0, base) to a non-negative value."""

    base: int
    entries: dict[int, float]

    def total(self) -> float:
        return sum(self.entries.values())


@dataclass
class FeatureTriple:
    """Clause, goal and problem vectors over disjoint flattened ranges.

    Flattened layout: clause vector at [0, base), goal vector at
    [base, 2*base), problem features at [2*base, 2*base + 22). The top 20
    indices of each hashed segment hold the statistics, so hashed cut
    features are mapped into [0, base - 20) and never collide with them.
    """

    base: int
    clause_vec: SparseVector
    goal_vec: SparseVector
    problem_vec: list[float]
    _arrays: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def dimension(self) -> int:
        return 2 * self.base + N_PROBLEM_FEATURES

    def flat_items(self):
        for i in sorted(self.clause_vec.entries):
            yield i, self.clause_vec.entries[i]
        for i in sorted(self.goal_vec.entries):
            yield self.base + i, self.goal_vec.entries[i]
        for k, v in enumerate(self.problem_vec):
            if v != 0.0:
                yield 2 * self.base + k, v

    def sorted_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(indices, values) ascending, cached; zeros omitted."""
        if self._arrays is None:
            items = list(self.flat_items())
            idx = np.fromiter((i for i, _ in items), dtype=np.int64,
                              count=len(items))
            val = np.fromiter((v for _, v in items), dtype=np.float64,
                              count=len(items))
            self._arrays = (idx, val)
        return self._arrays


def _hashed_segment(feats: Counter, stats: list[float], base: int) -> SparseVector:
    entries: dict[int, float] = {}
    span = base - N_STATS
    for feat, count in feats.items():
        i = fnv1a64(feat) % span
        entries[i] = entries.get(i, 0.0) + float(count)
    for k, v in enumerate(stats):
        if v != 0.0:
            entries[span + k] = v
    return SparseVector(base, entries)


def clause_vector(clause: Clause, anonymize: bool = True,
                  base: int = DEFAULT_BASE) -> SparseVector:
    return _hashed_segment(cut_features(clause, anonymize),
                           clause_statistics(clause), base)


def goal_vector(problem: Problem, anonymize: bool = True,
                base: int = DEFAULT_BASE) -> SparseVector:
    goals = problem.goal
    feats: Counter = Counter()
    for g in goals:
        feats.update(cut_features(g, anonymize))
    return _hashed_segment(feats, _joint_statistics(goals), base)


def feature_triple(clause: Clause, problem: Problem, anonymize: bool = True,
                   base: int = DEFAULT_BASE,
                   goal_vec: SparseVector | None = None,
                   problem_vec: list[float] | None = None) -> FeatureTriple:
    """Full (clause, goal, problem) representation of one clause.

    goal_vec and problem_vec can be precomputed once per problem and passed
    in; they only depend on the problem.
    """
    if goal_vec is None:
        goal_vec = goal_vector(problem, anonymize, base)
    if problem_vec is None:
        problem_vec = problem_features(problem)
    return FeatureTriple(base, clause_vector(clause, anonymize, base),
                         goal_vec, problem_vec)


def dump_line(problem_name: str, clause_id: int, label: int,
              triple: FeatureTriple) -> str:
    """One debug-dump line: `<problem> <clause-id> <label> idx:val ...`."""
    parts = [problem_name, str(clause_id), str(label)]
    parts += [f"{i}:{v:g}" for i, v in triple.flat_items()]
    return " ".join(parts)
