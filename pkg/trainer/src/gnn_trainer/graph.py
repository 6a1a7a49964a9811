"""Clause hypergraph construction matching the prover's documented scheme.

Node kinds: clauses, symbols, unique terms/literals. Clause nodes are
ordered queries, context, goal (each sorted by id); term and symbol nodes
are numbered by first occurrence with symbols re-sorted by (kind, arity,
first occurrence). Variables are normalized per clause before interning,
so structurally identical subterms share one node across the whole batch
and no symbol names enter the tensors.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

from .clauses import Clause, Term

ETYPE_TERM = 0
ETYPE_POS = 1
ETYPE_NEG = 2


@dataclass
class TensorGraph:
    n_clauses: int
    n_symbols: int
    n_terms: int
    clause_edge_c: torch.Tensor
    clause_edge_u: torch.Tensor
    app_result: torch.Tensor
    app_symbol: torch.Tensor
    app_etype: torch.Tensor
    app_nargs: torch.Tensor
    arg_edge: torch.Tensor
    arg_node: torch.Tensor
    arg_pos: torch.Tensor
    goal_mask: torch.Tensor
    query_mask: torch.Tensor
    clause_ids: list[int]


class _Builder:
    def __init__(self):
        self.sym_index: dict[tuple[str, str], int] = {}
        self.sym_meta: list[tuple[str, int, int]] = []
        self.term_index: dict[tuple, int] = {}
        self.app_edges: list[tuple[int, int, tuple, int]] = []
        self.clause_edges: list[tuple[int, int]] = []

    def symbol(self, name: str, kind: str, arity: int) -> int:
        key = (name, kind)
        idx = self.sym_index.get(key)
        if idx is None:
            idx = len(self.sym_meta)
            self.sym_index[key] = idx
            self.sym_meta.append((kind, arity, idx))
        return idx

    def term(self, t: Term, varmap: dict[str, int]) -> int:
        if t.is_var:
            if t.name not in varmap:
                varmap[t.name] = len(varmap)
            key = ("v", varmap[t.name])
            idx = self.term_index.get(key)
            if idx is None:
                idx = len(self.term_index)
                self.term_index[key] = idx
            return idx
        args = tuple(self.term(a, varmap) for a in t.args)
        key = ("t", t.head.name, t.head.kind, args)
        idx = self.term_index.get(key)
        if idx is None:
            idx = len(self.term_index)
            self.term_index[key] = idx
            sym = self.symbol(t.head.name, t.head.kind, t.head.arity)
            self.app_edges.append((idx, sym, args, ETYPE_TERM))
        return idx

    def literal(self, lit, varmap: dict[str, int]) -> int:
        args = tuple(self.term(a, varmap) for a in lit.args)
        key = ("l", lit.positive, lit.head.name, lit.head.kind, args)
        idx = self.term_index.get(key)
        if idx is None:
            idx = len(self.term_index)
            self.term_index[key] = idx
            sym = self.symbol(lit.head.name, "predicate", lit.head.arity)
            etype = ETYPE_POS if lit.positive else ETYPE_NEG
            self.app_edges.append((idx, sym, args, etype))
        return idx


def build_graph(queries: list[Clause], context: list[Clause],
                goal: list[Clause]) -> TensorGraph:
    qids = {c.id for c in queries}
    gids = {c.id for c in goal}
    ordered = (sorted(queries, key=lambda c: c.id)
               + sorted(context, key=lambda c: c.id)
               + sorted(goal, key=lambda c: c.id))
    b = _Builder()
    for ci, clause in enumerate(ordered):
        varmap: dict[str, int] = {}
        for lit in clause.literals:
            li = b.literal(lit, varmap)
            b.clause_edges.append((ci, li))

    perm = sorted(range(len(b.sym_meta)), key=lambda i: b.sym_meta[i])
    remap = {old: new for new, old in enumerate(perm)}

    arg_edge, arg_node, arg_pos = [], [], []
    for ei, (_, _, args, _) in enumerate(b.app_edges):
        for pos, a in enumerate(args, start=1):
            arg_edge.append(ei)
            arg_node.append(a)
            arg_pos.append(pos)

    def ints(xs):
        return torch.tensor(xs, dtype=torch.long)

    return TensorGraph(
        n_clauses=len(ordered),
        n_symbols=len(b.sym_meta),
        n_terms=len(b.term_index),
        clause_edge_c=ints([c for c, _ in b.clause_edges]),
        clause_edge_u=ints([u for _, u in b.clause_edges]),
        app_result=ints([r for r, _, _, _ in b.app_edges]),
        app_symbol=ints([remap[s] for _, s, _, _ in b.app_edges]),
        app_etype=ints([e for _, _, _, e in b.app_edges]),
        app_nargs=ints([len(a) for _, _, a, _ in b.app_edges]),
        arg_edge=ints(arg_edge),
        arg_node=ints(arg_node),
        arg_pos=ints(arg_pos),
        goal_mask=torch.tensor([c.id in gids for c in ordered]),
        query_mask=torch.tensor([c.id in qids for c in ordered]),
        clause_ids=[c.id for c in ordered],
    )
