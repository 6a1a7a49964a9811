# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled boosting kernels: split-gain scan and ensemble traversal.

Must stay semantically identical to _kernels_py (same accumulation order),
so the pure and compiled backends produce bit-identical models.
"""


def scan_column_splits(int[::1] col_rows, double[::1] col_vals,
                       int[::1] node_of_row, double[::1] grad,
                       double[::1] hess, double[::1] node_g,
                       double[::1] node_h, long long[::1] node_cnt,
                       double lam, double min_child_weight,
                       double[::1] best_gain, int[::1] best_feat,
                       double[::1] best_thresh, int feature):
    cdef Py_ssize_t n = col_rows.shape[0]
    cdef Py_ssize_t k_nodes = node_g.shape[0]
    cdef Py_ssize_t i
    cdef int r, k
    cdef double v, thresh, gl, hl, gr, hr, gain
    cdef long long cl, cr

    cdef double[::1] exp_g = node_g.copy()
    cdef double[::1] exp_h = node_h.copy()
    cdef long long[::1] exp_cnt = node_cnt.copy()
    for k in range(k_nodes):
        exp_g[k] = 0.0
        exp_h[k] = 0.0
        exp_cnt[k] = 0
    for i in range(n):
        r = col_rows[i]
        k = node_of_row[r]
        if k < 0:
            continue
        exp_g[k] += grad[r]
        exp_h[k] += hess[r]
        exp_cnt[k] += 1

    cdef double[::1] run_g = node_g.copy()
    cdef double[::1] run_h = node_h.copy()
    cdef long long[::1] run_cnt = node_cnt.copy()
    cdef double[::1] prev_val = node_g.copy()
    cdef char[::1] started = bytearray(k_nodes)
    for k in range(k_nodes):
        run_g[k] = node_g[k] - exp_g[k]
        run_h[k] = node_h[k] - exp_h[k]
        run_cnt[k] = node_cnt[k] - exp_cnt[k]
        prev_val[k] = 0.0
        started[k] = 0

    for i in range(n):
        r = col_rows[i]
        k = node_of_row[r]
        if k < 0:
            continue
        v = col_vals[i]
        if not started[k]:
            if run_cnt[k] > 0:
                thresh = 0.5 * v
                gl = run_g[k]
                hl = run_h[k]
                cl = run_cnt[k]
                gr = node_g[k] - gl
                hr = node_h[k] - hl
                cr = node_cnt[k] - cl
                if cl > 0 and cr > 0 and hl >= min_child_weight and hr >= min_child_weight:
                    gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam)
                                  - node_g[k] * node_g[k] / (node_h[k] + lam))
                    if gain > best_gain[k]:
                        best_gain[k] = gain
                        best_feat[k] = feature
                        best_thresh[k] = thresh
            started[k] = 1
        elif v != prev_val[k]:
            thresh = 0.5 * (prev_val[k] + v)
            gl = run_g[k]
            hl = run_h[k]
            cl = run_cnt[k]
            gr = node_g[k] - gl
            hr = node_h[k] - hl
            cr = node_cnt[k] - cl
            if cl > 0 and cr > 0 and hl >= min_child_weight and hr >= min_child_weight:
                gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam)
                              - node_g[k] * node_g[k] / (node_h[k] + lam))
                if gain > best_gain[k]:
                    best_gain[k] = gain
                    best_feat[k] = feature
                    best_thresh[k] = thresh
        run_g[k] += grad[r]
        run_h[k] += hess[r]
        run_cnt[k] += 1
        prev_val[k] = v


def traverse_margin(int[::1] tree_feat, double[::1] tree_thresh,
                    int[::1] tree_left, int[::1] tree_right,
                    double[::1] tree_value, int[::1] tree_roots,
                    long long[::1] row_idx, double[::1] row_val,
                    double base_score):
    cdef double margin = base_score
    cdef Py_ssize_t n_idx = row_idx.shape[0]
    cdef Py_ssize_t t, lo, hi, mid
    cdef int node, f
    cdef double val
    for t in range(tree_roots.shape[0]):
        node = tree_roots[t]
        while tree_feat[node] >= 0:
            f = tree_feat[node]
            lo = 0
            hi = n_idx
            val = 0.0
            while lo < hi:
                mid = (lo + hi) // 2
                if row_idx[mid] < f:
                    lo = mid + 1
                else:
                    hi = mid
            if lo < n_idx and row_idx[lo] == f:
                val = row_val[lo]
            if val < tree_thresh[node]:
                node = tree_left[node]
            else:
                node = tree_right[node]
        margin += tree_value[node]
    return margin
