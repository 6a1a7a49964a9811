"""Batched clause evaluation plugged into the saturation loop.

Generated clauses accumulate unscored; once at least query_size are
pending, each full batch is scored by one forward call over the batch, the
most recent context_size given clauses, and the goal clauses. A smaller
forced batch is evaluated only when selection would otherwise starve.
Clause weight is the negated score, so higher predicted usefulness is
selected earlier.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from ..saturation import ClauseEvaluator
from ..terms import Clause, Problem
from .graph import build_hypergraph, tensorize
from .model import GnnWeights, forward


@dataclass
class BatchRecord:
    size: int
    forced: bool
    context_size: int


class BatchedGnnEvaluator(ClauseEvaluator):
    eager = False

    def __init__(self, weights: GnnWeights, problem: Problem,
                 query_size: int = 128, context_size: int = 512):
        if query_size < 1:
            raise ValueError("query_size must be >= 1")
        if context_size < 0:
            raise ValueError("context_size must be >= 0")
        self.weights = weights
        self.query_size = query_size
        self.goal = list(problem.goal)
        self._goal_ids = {c.id for c in self.goal}
        self.context: deque[Clause] = deque(maxlen=context_size)
        self.pending: list[Clause] = []
        self.scored_ids: set[int] = set()
        self.batch_log: list[BatchRecord] = []

    # Goal clauses are part of every evaluation graph as goals, so they are
    # never batch-scored; give them a weight that selects them first, the
    # usual conjecture-preference.
    GOAL_WEIGHT = -1e9

    def enqueue(self, clause: Clause) -> float | None:
        if clause.id in self._goal_ids:
            return self.GOAL_WEIGHT
        self.pending.append(clause)
        return None

    def notify_given(self, clause: Clause) -> None:
        # A clause picked by a base queue while still unscored must not be
        # evaluated later (it is no longer unprocessed).
        self.pending = [c for c in self.pending if c.id != clause.id]
        if clause.id not in self._goal_ids and self.context.maxlen:
            self.context.append(clause)

    def ready_batches(self):
        batches = []
        while len(self.pending) >= self.query_size:
            batch = self.pending[:self.query_size]
            del self.pending[:self.query_size]
            batches.append(self._evaluate(batch, forced=False))
        return batches

    def force_batch(self):
        if not self.pending:
            return []
        batch = self.pending
        self.pending = []
        return self._evaluate(batch, forced=True)

    def _evaluate(self, batch: list[Clause], forced: bool):
        for c in batch:
            if c.id in self.scored_ids:
                raise RuntimeError(f"clause {c.id} scored twice")
            self.scored_ids.add(c.id)
        context = list(self.context)
        tg = tensorize(build_hypergraph(batch, context, self.goal))
        scores = forward(self.weights, tg)
        qids = tg.clause_ids[tg.query_mask]
        self.batch_log.append(BatchRecord(len(batch), forced, len(context)))
        return [(int(cid), -float(s)) for cid, s in zip(qids, scores)]
