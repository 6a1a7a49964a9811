"""The given-clause saturation loop.

Calculus: binary resolution plus positive factoring, with tautology and
duplicate elimination. Clause selection alternates priority queues per the
strategy; solo and cooperative modes plug in a learned evaluator. Every run
is deterministic for fixed inputs, strategy and model.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

from .terms import (
    ROLE_DERIVED,
    RULE_FACTORING,
    RULE_RESOLUTION,
    Clause,
    Problem,
    apply_to_literal,
    clause_key,
    normalize_literals,
    rename_vars,
    symbol_count,
)
from .tptp import format_clause_body
from .unify import unify

PROVED = "proved"
SATURATED = "saturated"
RESOURCE_OUT = "resource_out"

MODE_BASE = "base"
MODE_SOLO = "solo"
MODE_COOP = "coop"

EVAL_QUEUE = "eval"

WEIGHT_FUNCTIONS = {
    "symcount": symbol_count,
    "fifo": lambda clause: clause.id,
}


@dataclass
class Limits:
    max_generated: int | None = None
    wall_time: float | None = None


@dataclass
class Strategy:
    """Clause-selection configuration; see WEIGHT_FUNCTIONS for queue names."""

    mode: str = MODE_BASE
    queues: tuple = (("symcount", 5), ("fifo", 1))
    evaluator: "ClauseEvaluator | None" = None
    id: str = "base"

    def validate(self) -> None:
        if self.mode not in (MODE_BASE, MODE_SOLO, MODE_COOP):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.queues:
            raise ValueError("strategy needs at least one queue")
        for name, ratio in self.queues:
            if name not in WEIGHT_FUNCTIONS:
                raise ValueError(f"unknown weight function {name!r}")
            if ratio < 1:
                raise ValueError("queue ratios must be >= 1")
        if self.mode in (MODE_SOLO, MODE_COOP) and self.evaluator is None:
            raise ValueError(f"mode {self.mode!r} requires an evaluator")


class ClauseEvaluator:
    """Interface for learned clause scoring.

    Eager evaluators return a weight per clause immediately; lazy ones
    accumulate clauses and score them in batches (see gnn.evaluator).
    Smaller weight means selected earlier.
    """

    eager = True

    def weight(self, clause: Clause) -> float:
        raise NotImplementedError

    def enqueue(self, clause: Clause) -> float | None:
        """Defer the clause for batch scoring, or return an immediate
        weight for clauses that never enter a batch (e.g. goal inputs)."""
        raise NotImplementedError

    def ready_batches(self):
        return []

    def force_batch(self):
        return []

    def notify_given(self, clause: Clause) -> None:
        pass


@dataclass
class TraceEntry:
    iteration: int
    clause_id: int
    queue: str


@dataclass
class ProofResult:
    status: str
    trace: list[TraceEntry]
    processed: list[Clause]
    generated: int
    seconds: float
    proof: dict[int, Clause] | None = None
    empty_clause: Clause | None = None

    @property
    def processed_count(self) -> int:
        return len(self.processed)


@dataclass
class TrainingSample:
    """Proof-useful and useless processed clauses of one successful run."""

    positives: list[Clause]
    negatives: list[Clause]
    problem: str
    goal: list[Clause]


class _Queue:
    """Priority queue with lazy deletion; key is (weight, clause id)."""

    def __init__(self, name: str):
        self.name = name
        self.heap: list[tuple[float, int]] = []

    def push(self, weight: float, cid: int) -> None:
        heapq.heappush(self.heap, (weight, cid))

    def pop_live(self, live: dict) -> int | None:
        while self.heap:
            _, cid = heapq.heappop(self.heap)
            if cid in live:
                return cid
        return None


class _Scheduler:
    """Queue alternation: base ratios, solo, or strict 1:1 cooperative."""

    def __init__(self, strategy: Strategy):
        self.mode = strategy.mode
        self.base_cycle = [name for name, ratio in strategy.queues
                           for _ in range(ratio)]
        self.base_pos = 0
        self.turn = 0

    def next_queue(self) -> str:
        if self.mode == MODE_SOLO:
            return EVAL_QUEUE
        if self.mode == MODE_COOP:
            turn = self.turn
            self.turn += 1
            if turn % 2 == 0:
                return EVAL_QUEUE
            return self._next_base()
        return self._next_base()

    def _next_base(self) -> str:
        name = self.base_cycle[self.base_pos % len(self.base_cycle)]
        self.base_pos += 1
        return name


def _merge_duplicate_literals(lits) -> tuple:
    """Drop exact repeats of a literal, keeping first-occurrence order.

    Sound (a disjunction is a set), and necessary: without it ground
    saturation never terminates because resolvents keep growing by
    duplicated literals.
    """
    out: list = []
    for lit in lits:
        if lit not in out:
            out.append(lit)
    return tuple(out)


def _is_tautology(lits) -> bool:
    for i, li in enumerate(lits):
        for lj in lits[i + 1:]:
            if li.positive != lj.positive and li.atom == lj.atom:
                return True
    return False


def _literals_key(lits) -> tuple:
    return clause_key(Clause(0, lits))


def _raw_inferences(given: Clause, processed: list[Clause],
                    index: "_LiteralIndex | None" = None):
    """All binary resolvents of given with processed (given included) plus
    positive factors of given, unfiltered.

    With an index, partner literals are looked up by complementary
    predicate occurrence instead of scanning every processed clause; the
    set of inferences is identical, only the emission order changes.
    """
    g_lits = rename_vars(given.literals, "~1")
    if index is None:
        index = _LiteralIndex()
        for partner in processed:
            index.add(partner)
    renamed: dict[int, tuple] = {}
    for i, li in enumerate(g_lits):
        for partner, j in index.complements(li):
            p_lits = renamed.get(partner.id)
            if p_lits is None:
                p_lits = rename_vars(partner.literals, "~2")
                renamed[partner.id] = p_lits
            lj = p_lits[j]
            sigma = unify(li.atom, lj.atom)
            if sigma is None:
                continue
            lits = tuple(apply_to_literal(sigma, l)
                         for k, l in enumerate(g_lits) if k != i)
            lits += tuple(apply_to_literal(sigma, l)
                          for k, l in enumerate(p_lits) if k != j)
            yield (_merge_duplicate_literals(lits), RULE_RESOLUTION,
                   (given.id, partner.id))
    for i, li in enumerate(given.literals):
        if not li.positive:
            continue
        for j in range(i + 1, len(given.literals)):
            lj = given.literals[j]
            if not lj.positive:
                continue
            sigma = unify(li.atom, lj.atom) if li.atom.head == lj.atom.head else None
            if sigma is None:
                continue
            lits = tuple(apply_to_literal(sigma, l)
                         for k, l in enumerate(given.literals) if k != j)
            yield _merge_duplicate_literals(lits), RULE_FACTORING, (given.id,)


class _LiteralIndex:
    """Literal occurrences of processed clauses, keyed by predicate and
    polarity, in processed order."""

    def __init__(self):
        self._occ: dict[tuple, list[tuple[Clause, int]]] = {}

    def add(self, clause: Clause) -> None:
        for j, lit in enumerate(clause.literals):
            key = (lit.atom.head, lit.positive)
            self._occ.setdefault(key, []).append((clause, j))

    def complements(self, lit) -> list[tuple[Clause, int]]:
        return self._occ.get((lit.atom.head, not lit.positive), ())


def generate_inferences(given: Clause, processed: list[Clause],
                        existing_keys: set | None = None,
                        next_id: int = 1) -> list[Clause]:
    """Filtered inferences from given against processed.

    Tautologies and duplicates (of existing_keys and of each other) are
    discarded; kept clauses receive consecutive ids from next_id with
    variables normalized.
    """
    keys = set(existing_keys or ())
    out: list[Clause] = []
    for lits, rule, parents in _raw_inferences(given, processed):
        if _is_tautology(lits):
            continue
        key = _literals_key(lits)
        if key in keys:
            continue
        keys.add(key)
        out.append(Clause(next_id, normalize_literals(lits), ROLE_DERIVED,
                          parents, rule))
        next_id += 1
    return out


def _walk_proof(empty: Clause, by_id: dict[int, Clause]) -> dict[int, Clause]:
    dag: dict[int, Clause] = {}
    stack = [empty]
    while stack:
        c = stack.pop()
        if c.id in dag:
            continue
        dag[c.id] = c
        for pid in c.parents:
            stack.append(by_id[pid])
    return dag


def given_clause_loop(problem: Problem, strategy: Strategy,
                      limits: Limits | None = None) -> ProofResult:
    """Saturate until refutation, empty unprocessed set, or resource limit.

    The generated counter (and max_generated cap) counts clauses that
    survive tautology and duplicate deletion; discarded inferences are not
    work the rest of the loop ever sees.
    """
    strategy.validate()
    limits = limits or Limits()
    start = time.monotonic()
    evaluator = strategy.evaluator
    base_queues = {name: _Queue(name) for name, _ in strategy.queues}
    eval_queue = _Queue(EVAL_QUEUE) if evaluator is not None else None
    sched = _Scheduler(strategy)

    by_id: dict[int, Clause] = {}
    live: dict[int, Clause] = {}  # unprocessed
    keys: set = set()
    processed: list[Clause] = []
    index = _LiteralIndex()
    trace: list[TraceEntry] = []
    generated = 0

    def register(clause: Clause) -> None:
        by_id[clause.id] = clause
        live[clause.id] = clause
        keys.add(clause_key(clause))
        for name, queue in base_queues.items():
            queue.push(WEIGHT_FUNCTIONS[name](clause), clause.id)
        if evaluator is not None:
            if evaluator.eager:
                eval_queue.push(evaluator.weight(clause), clause.id)
            else:
                immediate = evaluator.enqueue(clause)
                if immediate is not None:
                    eval_queue.push(immediate, clause.id)

    def drain_ready() -> None:
        if evaluator is not None and not evaluator.eager:
            for batch in evaluator.ready_batches():
                for cid, weight in batch:
                    eval_queue.push(weight, cid)

    def finish(status, proof=None, empty=None):
        return ProofResult(status, trace, processed, generated,
                           time.monotonic() - start, proof, empty)

    for clause in problem.clauses:
        if clause.is_empty():
            return finish(PROVED, {clause.id: clause}, clause)
        register(clause)
    drain_ready()
    next_id = max(by_id, default=0) + 1

    while live:
        if limits.wall_time is not None and \
                time.monotonic() - start > limits.wall_time:
            return finish(RESOURCE_OUT)
        qname = sched.next_queue()
        if qname == EVAL_QUEUE:
            cid = eval_queue.pop_live(live)
            if cid is None and not evaluator.eager:
                for bcid, weight in evaluator.force_batch():
                    eval_queue.push(weight, bcid)
                cid = eval_queue.pop_live(live)
        else:
            cid = base_queues[qname].pop_live(live)
        if cid is None:
            raise RuntimeError("selection queues out of sync with live set")
        given = live.pop(cid)
        processed.append(given)
        index.add(given)
        trace.append(TraceEntry(len(trace) + 1, cid, qname))
        if evaluator is not None:
            evaluator.notify_given(given)

        for lits, rule, parents in _raw_inferences(given, processed, index):
            if _is_tautology(lits):
                continue
            key = _literals_key(lits)
            if key in keys:
                continue
            generated += 1
            if not lits:
                empty = Clause(next_id, (), ROLE_DERIVED, parents, rule)
                by_id[empty.id] = empty
                return finish(PROVED, _walk_proof(empty, by_id), empty)
            register(Clause(next_id, normalize_literals(lits), ROLE_DERIVED,
                            parents, rule))
            next_id += 1
            if limits.max_generated is not None and \
                    generated >= limits.max_generated:
                return finish(RESOURCE_OUT)
        drain_ready()

    return finish(SATURATED)


def extract_training_sample(result: ProofResult,
                            problem: Problem) -> TrainingSample:
    """Split the processed set into proof-DAG members and the rest."""
    if result.status != PROVED:
        raise ValueError(f"no proof to extract from (status {result.status})")
    dag_ids = set(result.proof)
    positives = [c for c in result.processed if c.id in dag_ids]
    negatives = [c for c in result.processed if c.id not in dag_ids]
    return TrainingSample(positives, negatives, problem.name,
                          list(problem.goal))


# ---------------------------------------------------------------------------
# Text output


def format_trace(result: ProofResult) -> str:
    return "\n".join(f"iter {t.iteration} given {t.clause_id} by {t.queue}"
                     for t in result.trace)


def format_proof(result: ProofResult) -> str:
    if result.proof is None:
        return ""
    lines = []
    for cid in sorted(result.proof):
        c = result.proof[cid]
        parents = " ".join(str(p) for p in c.parents)
        lines.append(f"{c.id}, {c.rule}, [{parents}], {format_clause_body(c)}")
    return "\n".join(lines)
