"""Naive per-edge forward pass, kept as an independent check.

Same update equations as model.forward but written as explicit loops over
nodes and edges with no gather/scatter vectorization. Summation order
differs, so agreement is expected to about 1e-6, not bitwise.
"""

from __future__ import annotations

import numpy as np

from .graph import TensorGraph
from .model import GnnWeights


def _mean_lists(sums, counts):
    return [s / c if c else s for s, c in zip(sums, counts)]


def forward_reference(weights: GnnWeights, tg: TensorGraph) -> np.ndarray:
    d = weights.dim
    w = {k: v.astype(np.float64) for k, v in weights.tensors.items()}
    U = [w["init_term"].copy() for _ in range(tg.n_terms)]
    N = [w["init_symbol"].copy() for _ in range(tg.n_symbols)]
    C = [w["init_clause"].copy() for _ in range(tg.n_clauses)]

    edges = []
    for e in range(tg.app_result.shape[0]):
        args = [(int(tg.arg_node[i]), int(tg.arg_pos[i]))
                for i in range(tg.arg_edge.shape[0]) if tg.arg_edge[i] == e]
        edges.append((int(tg.app_result[e]), int(tg.app_symbol[e]),
                      args, int(tg.app_etype[e])))
    cedges = [(int(tg.clause_edge_c[i]), int(tg.clause_edge_u[i]))
              for i in range(tg.clause_edge_c.shape[0])]

    for r in range(weights.rounds):
        p = f"round{r}."
        w_args = {1: w[p + "u_from_arg1"], 2: w[p + "u_from_arg2"]}

        res_sum = [np.zeros(d) for _ in range(tg.n_terms)]
        res_cnt = [0] * tg.n_terms
        par_sum = [np.zeros(d) for _ in range(tg.n_terms)]
        par_cnt = [0] * tg.n_terms
        sym_sum = [np.zeros(d) for _ in range(tg.n_symbols)]
        sym_cnt = [0] * tg.n_symbols
        for res, sym, args, etype in edges:
            mix = np.zeros(d)
            for node, pos in args:
                mat = w_args.get(pos, w[p + "u_from_arg3"])
                mix += mat @ U[node]
            if args:
                mix /= len(args)
            msg = w[p + "u_from_sym"] @ N[sym] + mix \
                + w[p + "u_edge_bias"][etype]
            res_sum[res] += msg
            res_cnt[res] += 1
            for node, _ in args:
                par_sum[node] += w[p + "u_from_parent"] @ U[res]
                par_cnt[node] += 1
            sym_sum[sym] += w[p + "n_from_result"] @ U[res]
            sym_cnt[sym] += 1

        lit_sum = [np.zeros(d) for _ in range(tg.n_terms)]
        lit_cnt = [0] * tg.n_terms
        cl_sum = [np.zeros(d) for _ in range(tg.n_clauses)]
        cl_cnt = [0] * tg.n_clauses
        for ci, ui in cedges:
            lit_sum[ui] += w[p + "u_from_clause"] @ C[ci]
            lit_cnt[ui] += 1
            cl_sum[ci] += w[p + "c_from_lit"] @ U[ui]
            cl_cnt[ci] += 1

        in_res = _mean_lists(res_sum, res_cnt)
        in_par = _mean_lists(par_sum, par_cnt)
        in_lit = _mean_lists(lit_sum, lit_cnt)
        new_u = [np.maximum(w[p + "u_self"] @ U[v] + in_res[v] + in_par[v]
                            + in_lit[v] + w[p + "u_bias"], 0.0)
                 for v in range(tg.n_terms)]
        in_sym = _mean_lists(sym_sum, sym_cnt)
        new_n = [np.maximum(w[p + "n_self"] @ N[s] + in_sym[s]
                            + w[p + "n_bias"], 0.0)
                 for s in range(tg.n_symbols)]
        in_cl = _mean_lists(cl_sum, cl_cnt)
        new_c = [np.maximum(w[p + "c_self"] @ C[c] + in_cl[c]
                            + w[p + "c_bias"], 0.0)
                 for c in range(tg.n_clauses)]
        U, N, C = new_u, new_n, new_c

    goal_idx = [i for i in range(tg.n_clauses) if tg.goal_mask[i]]
    goal_agg = np.zeros(d)
    if goal_idx:
        for i in goal_idx:
            goal_agg += C[i]
        goal_agg /= len(goal_idx)

    scores = []
    for i in range(tg.n_clauses):
        if not tg.query_mask[i]:
            continue
        x = np.concatenate([C[i], goal_agg])
        hidden = np.maximum(w["head_hidden_w"] @ x + w["head_hidden_b"], 0.0)
        scores.append(float((w["head_out_w"] @ hidden)[0] + w["head_out_b"][0]))
    return np.array(scores)
