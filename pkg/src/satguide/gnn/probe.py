"""Probe fixtures: a small clause batch plus expected forward scores.

A probe is a JSON document with clause bodies in TPTP literal syntax:

    {"queries": [...], "context": [...], "goal": [...], "scores": [...]}

Clause ids are assigned 1..n in listed order (queries, context, goal), so
scores align with the query list. Probes let a weight container be verified
against the inference engine that will consume it.
"""

from __future__ import annotations

import json

import numpy as np

from ..terms import ROLE_AXIOM, ROLE_GOAL, Clause
from ..tptp import format_clause_body, parse_clause_body
from .graph import build_hypergraph, tensorize
from .model import GnnWeights, forward


def write_probe(path, queries: list[Clause], context: list[Clause],
                goal: list[Clause], scores) -> None:
    doc = {
        "queries": [format_clause_body(c) for c in queries],
        "context": [format_clause_body(c) for c in context],
        "goal": [format_clause_body(c) for c in goal],
        "scores": [float(s) for s in scores],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def read_probe(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    signature: dict = {}
    cid = 0
    groups = []
    for field, role in (("queries", ROLE_AXIOM), ("context", ROLE_AXIOM),
                        ("goal", ROLE_GOAL)):
        clauses = []
        for text in doc[field]:
            cid += 1
            clauses.append(parse_clause_body(text, signature, cid, role))
        groups.append(clauses)
    return groups[0], groups[1], groups[2], np.array(doc["scores"])


def probe_scores(weights: GnnWeights, queries, context, goal) -> np.ndarray:
    """Forward scores in query-list order (ids must be ascending there)."""
    tg = tensorize(build_hypergraph(queries, context, goal))
    scores = forward(weights, tg)
    by_id = dict(zip(tg.clause_ids[tg.query_mask].tolist(), scores))
    return np.array([by_id[c.id] for c in queries])


def check_probe(weights: GnnWeights, path) -> float:
    """Max absolute difference between stored and recomputed scores."""
    queries, context, goal, stored = read_probe(path)
    got = probe_scores(weights, queries, context, goal)
    return float(np.max(np.abs(got - stored))) if stored.size else 0.0
