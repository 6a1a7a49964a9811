"""Analytic-vs-numeric gradient verification on a toy graph.

Central finite differences with step 1e-4 against autograd, parameter by
parameter, in double precision. The toy graph stays under 30 nodes so the
full sweep finishes in seconds.
"""

from __future__ import annotations

import torch

from .clauses import Signature, parse_clause
from .graph import build_graph
from .model import ClauseScorer

TOY_CLAUSES = ["p(f(X),c)|~s(X)", "~p(f(c),c)", "s(g(c))"]
TOY_GOAL = ["~p(X,Y)|~s(Y)"]
TOY_LABELS = (1.0, 0.0, 1.0)


def toy_graph():
    sig = Signature()
    queries = [parse_clause(t, sig, i + 1) for i, t in enumerate(TOY_CLAUSES)]
    goal = [parse_clause(t, sig, 10 + i, "negated_conjecture")
            for i, t in enumerate(TOY_GOAL)]
    tg = build_graph(queries, [], goal)
    n_nodes = tg.n_clauses + tg.n_symbols + tg.n_terms
    assert n_nodes <= 30, n_nodes
    return tg, torch.tensor(TOY_LABELS, dtype=torch.float64)


def gradient_check(dim: int = 4, rounds: int = 2, seed: int = 0,
                   step: float = 1e-4, fit_labels: bool = False,
                   corrupt: str | None = None) -> float:
    """Max relative error over every parameter scalar.

    With fit_labels the targets are set to the model's own predictions, a
    stationary point where every gradient must vanish. corrupt names a
    tensor whose analytic gradient gets perturbed, as a sensitivity
    control: the check must then fail.
    """
    tg, labels = toy_graph()
    model = ClauseScorer(dim, rounds, seed=seed)
    if fit_labels:
        with torch.no_grad():
            labels = torch.sigmoid(model(tg))

    def loss_value() -> torch.Tensor:
        return torch.nn.functional.binary_cross_entropy_with_logits(
            model(tg), labels)

    loss = loss_value()
    # The last round's term/symbol updates feed nothing downstream, so
    # their parameters legitimately have zero (unused) gradients.
    grads = torch.autograd.grad(loss, list(model.parameters()),
                                allow_unused=True)
    named = {}
    for (name, param), grad in zip(model.params.items(), grads):
        named[name] = torch.zeros_like(param) if grad is None else grad
    if corrupt is not None:
        named[corrupt.replace(".", "__")] = \
            named[corrupt.replace(".", "__")] + 0.01

    worst = 0.0
    with torch.no_grad():
        for name, param in model.params.items():
            analytic = named[name]
            flat = param.view(-1)
            for i in range(flat.numel()):
                original = float(flat[i])
                flat[i] = original + step
                up = float(loss_value())
                flat[i] = original - step
                down = float(loss_value())
                flat[i] = original
                numeric = (up - down) / (2 * step)
                a = float(analytic.view(-1)[i])
                scale = max(abs(a), abs(numeric))
                err = abs(a - numeric) if scale < 1e-4 \
                    else abs(a - numeric) / scale
                worst = max(worst, err)
    return worst
