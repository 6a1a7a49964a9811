"""Training loop: adaptive-moment updates, one weight container per epoch.

Every epoch e writes `epoch-<e>.gnn` plus `epoch-<e>.gnn.probe.json`, a
small clause batch with the forward scores of the exported (float32
quantized) weights, so the consumer can verify compatibility bit for bit
against its own forward pass.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

import torch

from .clauses import format_clause
from .data import TrainGraph, load_training_graphs, read_samples
from .graph import build_graph
from .model import ClauseScorer, export_weights, quantized_copy


class DivergenceError(Exception):
    pass


@dataclass
class TrainConfig:
    epochs: int = 10
    learning_rate: float = 1e-3
    dim: int = 32
    rounds: int = 5
    batch_clauses: int = 256
    seed: int = 0

    def validate(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.dim < 1 or self.rounds < 1:
            raise ValueError("dim and rounds must be >= 1")
        if self.batch_clauses < 1:
            raise ValueError("batch_clauses must be >= 1")


def _probe_parts(records):
    """A small deterministic batch from the first record."""
    first = records[0]
    queries = (first.pos[:3] + first.neg[:2]) or first.goal[:1]
    rest = first.neg[2:4]
    return queries, rest, first.goal


def write_probe(path, model: ClauseScorer, queries, context, goal) -> None:
    tg = build_graph(queries, context, goal)
    with torch.no_grad():
        scores = model(tg)
    by_id = dict(zip([cid for cid, q in zip(tg.clause_ids,
                                            tg.query_mask.tolist()) if q],
                     scores.tolist()))
    doc = {
        "queries": [format_clause(c) for c in queries],
        "context": [format_clause(c) for c in context],
        "goal": [format_clause(c) for c in goal],
        "scores": [by_id[c.id] for c in queries],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def train_gnn(samples_path, out_dir, config: TrainConfig) -> list[float]:
    """Train on a sample file; returns the per-epoch mean loss curve."""
    config.validate()
    torch.set_num_threads(1)
    torch.manual_seed(config.seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    records = read_samples(samples_path)
    graphs = load_training_graphs(samples_path, config.batch_clauses)
    if not any(g.labels.sum() > 0 for g in graphs) or \
            not any((1 - g.labels).sum() > 0 for g in graphs):
        raise ValueError("training needs both positive and negative clauses")
    probe_parts = _probe_parts(records)

    model = ClauseScorer(config.dim, config.rounds, seed=config.seed)
    optimizer = torch.optim.Adam(model.parameters(),
                                 lr=config.learning_rate)
    order_rng = random.Random(config.seed)
    history: list[float] = []
    for epoch in range(1, config.epochs + 1):
        order = list(range(len(graphs)))
        order_rng.shuffle(order)
        total = 0.0
        for step, gi in enumerate(order):
            g: TrainGraph = graphs[gi]
            scores = model(g.tg)
            loss = torch.nn.functional.binary_cross_entropy_with_logits(
                scores, g.labels, pos_weight=g.pos_weight)
            if not torch.isfinite(loss):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch} batch {step} "
                    f"(problem {g.problem})")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += float(loss.detach())
        history.append(total / len(graphs))

        container = out_dir / f"epoch-{epoch}.gnn"
        export_weights(model, container)
        write_probe(Path(str(container) + ".probe.json"),
                    quantized_copy(model), *probe_parts)
    return history
