"""Pure-Python twins of the compiled boosting kernels.

Semantics must match _kernels_c exactly, including accumulation order, so
either backend yields bit-identical models and predictions. Keep the two
files in sync line for line when changing anything here.
"""

from __future__ import annotations


def scan_column_splits(col_rows, col_vals, node_of_row, grad, hess,
                       node_g, node_h, node_cnt, lam, min_child_weight,
                       best_gain, best_feat, best_thresh, feature):
    """Scan one sorted feature column and update per-node best splits.

    col_vals must be ascending and strictly positive; rows absent from the
    column implicitly hold value 0. Navigation is `value < threshold` goes
    left. best_* arrays are updated in place only on strictly greater gain,
    so callers scanning features in ascending order get the smallest
    feature index and smallest threshold on ties.
    """
    n = col_rows.shape[0]
    k_nodes = node_g.shape[0]

    exp_g = [0.0] * k_nodes
    exp_h = [0.0] * k_nodes
    exp_cnt = [0] * k_nodes
    for i in range(n):
        r = col_rows[i]
        k = node_of_row[r]
        if k < 0:
            continue
        exp_g[k] += grad[r]
        exp_h[k] += hess[r]
        exp_cnt[k] += 1

    run_g = [0.0] * k_nodes
    run_h = [0.0] * k_nodes
    run_cnt = [0] * k_nodes
    prev_val = [0.0] * k_nodes
    started = [False] * k_nodes
    for k in range(k_nodes):
        run_g[k] = node_g[k] - exp_g[k]
        run_h[k] = node_h[k] - exp_h[k]
        run_cnt[k] = node_cnt[k] - exp_cnt[k]

    for i in range(n):
        r = col_rows[i]
        k = node_of_row[r]
        if k < 0:
            continue
        v = col_vals[i]
        if not started[k]:
            if run_cnt[k] > 0:
                _consider(k, 0.5 * v, run_g, run_h, run_cnt, node_g, node_h,
                          node_cnt, lam, min_child_weight, best_gain,
                          best_feat, best_thresh, feature)
            started[k] = True
        elif v != prev_val[k]:
            _consider(k, 0.5 * (prev_val[k] + v), run_g, run_h, run_cnt,
                      node_g, node_h, node_cnt, lam, min_child_weight,
                      best_gain, best_feat, best_thresh, feature)
        run_g[k] += grad[r]
        run_h[k] += hess[r]
        run_cnt[k] += 1
        prev_val[k] = v


def _consider(k, thresh, run_g, run_h, run_cnt, node_g, node_h, node_cnt,
              lam, min_child_weight, best_gain, best_feat, best_thresh,
              feature):
    gl = run_g[k]
    hl = run_h[k]
    cl = run_cnt[k]
    gr = node_g[k] - gl
    hr = node_h[k] - hl
    cr = node_cnt[k] - cl
    if cl <= 0 or cr <= 0:
        return
    if hl < min_child_weight or hr < min_child_weight:
        return
    gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam)
                  - node_g[k] * node_g[k] / (node_h[k] + lam))
    if gain > best_gain[k]:
        best_gain[k] = gain
        best_feat[k] = feature
        best_thresh[k] = thresh


def traverse_margin(tree_feat, tree_thresh, tree_left, tree_right,
                    tree_value, tree_roots, row_idx, row_val, base_score):
    """Sum of reached leaf values over all trees, plus base_score.

    row_idx/row_val are the sparse vector of one example with ascending
    indices; features absent from it read as 0.
    """
    margin = base_score
    n_idx = row_idx.shape[0]
    for t in range(tree_roots.shape[0]):
        node = tree_roots[t]
        while tree_feat[node] >= 0:
            f = tree_feat[node]
            lo, hi = 0, n_idx
            val = 0.0
            while lo < hi:
                mid = (lo + hi) // 2
                if row_idx[mid] < f:
                    lo = mid + 1
                else:
                    hi = mid
            if lo < n_idx and row_idx[lo] == f:
                val = row_val[lo]
            node = tree_left[node] if val < tree_thresh[node] else tree_right[node]
        margin += tree_value[node]
    return margin
