"""Bridges from trained models to the prover's clause-selection interface."""

from __future__ import annotations

from .features import (
    N_PROBLEM_FEATURES,
    feature_triple,
    goal_vector,
    problem_features,
)
from .gbdt import GbdtModel, classify_to_weight, predict
from .saturation import ClauseEvaluator
from .terms import Clause, Problem


def model_hash_base(model: GbdtModel) -> int:
    return (model.num_features - N_PROBLEM_FEATURES) // 2


class GbdtClauseEvaluator(ClauseEvaluator):
    """Eager evaluator: weight 1 for predicted-useful clauses, else 10."""

    eager = True

    def __init__(self, model: GbdtModel, problem: Problem,
                 anonymize: bool = True):
        self.model = model
        self.problem = problem
        self.anonymize = anonymize
        self.base = model_hash_base(model)
        self._goal_vec = goal_vector(problem, anonymize, self.base)
        self._problem_vec = problem_features(problem)

    def weight(self, clause: Clause) -> float:
        triple = feature_triple(clause, self.problem, self.anonymize,
                                self.base, goal_vec=self._goal_vec,
                                problem_vec=self._problem_vec)
        return classify_to_weight(predict(self.model, triple))
