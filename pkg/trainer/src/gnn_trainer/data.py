"""Training-sample files: one JSON record per line with clause strings.

    {"problem": ..., "goal": [...], "pos": [...], "neg": [...]}

Each record becomes one or more training graphs: the labeled clauses are
chunked (at most batch_clauses per graph) and every chunk shares the
record's goal clauses, marked as goals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import torch

from .clauses import Clause, Signature, parse_clause
from .graph import TensorGraph, build_graph


@dataclass
class SampleRecord:
    problem: str
    goal: list[Clause]
    pos: list[Clause]
    neg: list[Clause]


@dataclass
class TrainGraph:
    tg: TensorGraph
    labels: torch.Tensor      # aligned with query clause-node order
    pos_weight: torch.Tensor  # scalar, |neg| / |pos| of the source record
    problem: str


def read_samples(path) -> list[SampleRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            sig = Signature()
            cid = 0

            def clause(text, role="axiom"):
                nonlocal cid
                cid += 1
                return parse_clause(text, sig, cid, role)

            records.append(SampleRecord(
                doc["problem"],
                [clause(t, "negated_conjecture") for t in doc["goal"]],
                [clause(t) for t in doc["pos"]],
                [clause(t) for t in doc["neg"]],
            ))
    return records


def record_graphs(record: SampleRecord, batch_clauses: int) -> list[TrainGraph]:
    labeled = [(c, 1.0) for c in record.pos] + [(c, 0.0) for c in record.neg]
    if not labeled:
        return []
    pos_weight = torch.tensor(
        max(1, len(record.neg)) / max(1, len(record.pos)),
        dtype=torch.float64)
    graphs = []
    for start in range(0, len(labeled), batch_clauses):
        chunk = labeled[start:start + batch_clauses]
        clauses = [c for c, _ in chunk]
        tg = build_graph(clauses, [], record.goal)
        # query nodes are ordered by id; labels must follow that order
        by_id = {c.id: label for c, label in chunk}
        qids = [cid for cid, is_q in
                zip(tg.clause_ids, tg.query_mask.tolist()) if is_q]
        labels = torch.tensor([by_id[cid] for cid in qids],
                              dtype=torch.float64)
        graphs.append(TrainGraph(tg, labels, pos_weight, record.problem))
    return graphs


def load_training_graphs(path, batch_clauses: int) -> list[TrainGraph]:
    graphs = []
    for record in read_samples(path):
        graphs.extend(record_graphs(record, batch_clauses))
    if not graphs:
        raise ValueError(f"no labeled clauses in {path}")
    return graphs
