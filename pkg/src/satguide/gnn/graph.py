"""Clause hypergraph construction and tensorization.

Nodes come in three kinds: clauses, symbols, and unique terms/literals.
Structurally identical subterms (after clause-local variable normalization)
share one term node across the whole batch. Two hyperedge kinds connect
them: clause-literal incidences, and application edges tying a result node
to its head symbol and ordered argument nodes, with polarity recorded on
literal-level edges. Symbol names never enter the tensor encoding; node
order depends only on kind, arity and first occurrence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..terms import PREDICATE, App, Clause, Term, Var

ETYPE_TERM = 0
ETYPE_POS = 1
ETYPE_NEG = 2


@dataclass
class AppEdge:
    result: int
    symbol: int
    args: tuple[int, ...]
    etype: int


@dataclass
class Hypergraph:
    clause_ids: list[int]
    goal_mask: list[bool]
    query_mask: list[bool]
    n_symbols: int
    n_terms: int
    clause_edges: list[tuple[int, int]]
    app_edges: list[AppEdge]

    @property
    def n_clauses(self) -> int:
        return len(self.clause_ids)


class _Builder:
    def __init__(self):
        self.sym_index: dict[tuple[str, str], int] = {}
        self.sym_meta: list[tuple[str, int, int]] = []  # kind, arity, first occ
        self.term_index: dict[tuple, int] = {}
        self.app_edges: list[AppEdge] = []
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
        if isinstance(t, Var):
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
            self.app_edges.append(AppEdge(idx, sym, args, ETYPE_TERM))
        return idx

    def literal(self, positive: bool, atom: App, varmap: dict[str, int]) -> int:
        args = tuple(self.term(a, varmap) for a in atom.args)
        key = ("l", positive, atom.head.name, atom.head.kind, args)
        idx = self.term_index.get(key)
        if idx is None:
            idx = len(self.term_index)
            self.term_index[key] = idx
            sym = self.symbol(atom.head.name, PREDICATE, atom.head.arity)
            etype = ETYPE_POS if positive else ETYPE_NEG
            self.app_edges.append(AppEdge(idx, sym, args, etype))
        return idx


def build_hypergraph(queries: list[Clause], context: list[Clause],
                     goal: list[Clause]) -> Hypergraph:
    """One shared graph over queries, context and goal clauses.

    The three sets must be disjoint by clause id. Clause nodes are ordered
    queries, context, goal, each sorted by id; within that order, term and
    symbol nodes are numbered by first occurrence.
    """
    qids = {c.id for c in queries}
    xids = {c.id for c in context}
    gids = {c.id for c in goal}
    if (qids & xids) or (qids & gids) or (xids & gids):
        raise ValueError("query/context/goal sets must be disjoint by id")

    ordered = (sorted(queries, key=lambda c: c.id)
               + sorted(context, key=lambda c: c.id)
               + sorted(goal, key=lambda c: c.id))
    b = _Builder()
    for ci, clause in enumerate(ordered):
        varmap: dict[str, int] = {}
        for lit in clause.literals:
            li = b.literal(lit.positive, lit.atom, varmap)
            b.clause_edges.append((ci, li))

    # Canonical symbol order: (kind, arity, first occurrence).
    perm = sorted(range(len(b.sym_meta)), key=lambda i: b.sym_meta[i])
    remap = {old: new for new, old in enumerate(perm)}
    for e in b.app_edges:
        e.symbol = remap[e.symbol]

    return Hypergraph(
        clause_ids=[c.id for c in ordered],
        goal_mask=[c.id in gids for c in ordered],
        query_mask=[c.id in qids for c in ordered],
        n_symbols=len(b.sym_meta),
        n_terms=len(b.term_index),
        clause_edges=b.clause_edges,
        app_edges=b.app_edges,
    )


@dataclass
class TensorGraph:
    """Index-array encoding of a Hypergraph, ready for the forward pass."""

    n_clauses: int
    n_symbols: int
    n_terms: int
    clause_edge_c: np.ndarray  # int32, one entry per clause-literal incidence
    clause_edge_u: np.ndarray  # int32
    app_result: np.ndarray    # int32, per application edge
    app_symbol: np.ndarray    # int32
    app_etype: np.ndarray     # int32 in {0,1,2}
    app_nargs: np.ndarray     # int32
    arg_edge: np.ndarray      # int32, per argument incidence
    arg_node: np.ndarray      # int32
    arg_pos: np.ndarray       # int32, 1-based
    goal_mask: np.ndarray     # bool over clause nodes
    query_mask: np.ndarray    # bool over clause nodes
    clause_ids: np.ndarray    # int64

    def validate(self) -> None:
        if self.clause_edge_c.size and (
                self.clause_edge_c.min() < 0
                or self.clause_edge_c.max() >= self.n_clauses):
            raise ValueError("clause edge index out of range")
        if self.clause_edge_u.size and self.clause_edge_u.max() >= self.n_terms:
            raise ValueError("literal node index out of range")
        if self.app_result.size:
            if self.app_result.max() >= self.n_terms:
                raise ValueError("result node index out of range")
            if self.app_symbol.max() >= self.n_symbols:
                raise ValueError("symbol node index out of range")
        if self.arg_node.size and self.arg_node.max() >= self.n_terms:
            raise ValueError("argument node index out of range")


def tensorize(hg: Hypergraph) -> TensorGraph:
    ce_c = np.array([c for c, _ in hg.clause_edges], dtype=np.int32)
    ce_u = np.array([u for _, u in hg.clause_edges], dtype=np.int32)
    res = np.array([e.result for e in hg.app_edges], dtype=np.int32)
    sym = np.array([e.symbol for e in hg.app_edges], dtype=np.int32)
    ety = np.array([e.etype for e in hg.app_edges], dtype=np.int32)
    nargs = np.array([len(e.args) for e in hg.app_edges], dtype=np.int32)
    arg_edge, arg_node, arg_pos = [], [], []
    for ei, e in enumerate(hg.app_edges):
        for pos, a in enumerate(e.args, start=1):
            arg_edge.append(ei)
            arg_node.append(a)
            arg_pos.append(pos)
    tg = TensorGraph(
        n_clauses=hg.n_clauses,
        n_symbols=hg.n_symbols,
        n_terms=hg.n_terms,
        clause_edge_c=ce_c,
        clause_edge_u=ce_u,
        app_result=res,
        app_symbol=sym,
        app_etype=ety,
        app_nargs=nargs,
        arg_edge=np.array(arg_edge, dtype=np.int32),
        arg_node=np.array(arg_node, dtype=np.int32),
        arg_pos=np.array(arg_pos, dtype=np.int32),
        goal_mask=np.array(hg.goal_mask, dtype=bool),
        query_mask=np.array(hg.query_mask, dtype=bool),
        clause_ids=np.array(hg.clause_ids, dtype=np.int64),
    )
    tg.validate()
    return tg
