"""Gradient-boosted decision trees over clause feature triples.

Binary-logistic boosting with exact greedy split search on sparse vectors
(missing entries read as 0). Trees grow level-wise (all frontier nodes per
depth) or leaf-wise (highest-gain frontier leaf first). The split scan and
ensemble traversal run on a compiled kernel when available; see backend.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..features import FeatureTriple
from . import backend

GROWTH_LEVEL = "level"
GROWTH_LEAF = "leaf"

MODEL_VERSION = 1


class GbdtError(Exception):
    pass


class ModelFormatError(GbdtError):
    """Raised when a model file is malformed or unsupported."""


@dataclass
class GbdtParams:
    growth: str = GROWTH_LEAF
    depth: int = 6
    leaves: int = 32
    eta: float = 0.2
    rounds: int = 20
    min_child_weight: float = 1.0
    lam: float = 1.0

    def validate(self) -> None:
        if self.growth not in (GROWTH_LEVEL, GROWTH_LEAF):
            raise GbdtError(f"unknown growth mode {self.growth!r}")
        if self.depth < 1:
            raise GbdtError("depth must be >= 1")
        if self.leaves < 2:
            raise GbdtError("leaves must be >= 2")
        if not 0.0 < self.eta <= 1.0:
            raise GbdtError("eta must be in (0, 1]")
        if self.rounds < 1:
            raise GbdtError("rounds must be >= 1")
        if self.min_child_weight < 0 or self.lam < 0:
            raise GbdtError("min_child_weight and lam must be >= 0")

    def to_dict(self) -> dict:
        return {"growth": self.growth, "depth": self.depth,
                "leaves": self.leaves, "eta": self.eta,
                "rounds": self.rounds,
                "min_child_weight": self.min_child_weight, "lam": self.lam}

    def sort_key(self) -> tuple:
        return tuple(sorted(self.to_dict().items()))


@dataclass
class GbdtModel:
    """An ordered forest; prediction is sigmoid(base_score + leaf sums)."""

    growth: str
    eta: float
    base_score: float
    num_features: int
    params: dict
    trees: list  # nested {"f","t","l","r"} / {"leaf"} dicts
    train_loss: list[float] = field(default_factory=list)
    _flat: tuple | None = None

    def flat(self) -> tuple:
        if self._flat is None:
            self._flat = _flatten_trees(self.trees)
        return self._flat


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def classify_to_weight(p: float) -> float:
    """Map a usefulness probability to a clause weight: 1 good, 10 bad."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    return 1.0 if p >= 0.5 else 10.0


# ---------------------------------------------------------------------------
# Training


class _Matrix:
    """Row-sparse training data with value-sorted column views."""

    def __init__(self, rows: list[tuple[np.ndarray, np.ndarray]]):
        self.rows = rows
        cols: dict[int, list[tuple[float, int]]] = {}
        for r, (idx, val) in enumerate(rows):
            for i, v in zip(idx.tolist(), val.tolist()):
                if v < 0:
                    raise GbdtError("feature values must be non-negative")
                if v == 0:
                    continue  # explicit zeros join the implicit zero group
                cols.setdefault(i, []).append((v, r))
        self.columns: list[tuple[int, np.ndarray, np.ndarray]] = []
        for f in sorted(cols):
            pairs = sorted(cols[f])
            vals = np.array([v for v, _ in pairs], dtype=np.float64)
            rids = np.array([r for _, r in pairs], dtype=np.int32)
            self.columns.append((f, rids, vals))

    def value(self, row: int, feature: int) -> float:
        idx, val = self.rows[row]
        j = int(np.searchsorted(idx, feature))
        if j < len(idx) and idx[j] == feature:
            return float(val[j])
        return 0.0


def _rows_from_samples(samples) -> tuple[list, np.ndarray, int]:
    rows = []
    labels = []
    dim = 0
    for triple, label in samples:
        if isinstance(triple, FeatureTriple):
            rows.append(triple.sorted_arrays())
            dim = max(dim, triple.dimension)
        else:
            idx, val = triple
            rows.append((np.asarray(idx, dtype=np.int64),
                         np.asarray(val, dtype=np.float64)))
            if len(idx):
                dim = max(dim, int(np.max(idx)) + 1)
        labels.append(int(label))
    return rows, np.array(labels, dtype=np.float64), dim


def train_gbdt(samples, params: GbdtParams | None = None) -> GbdtModel:
    """Fit a boosted forest to labeled feature triples.

    samples is an iterable of (FeatureTriple | (indices, values), label)
    with labels in {0, 1}. Requires at least one sample of each class.
    """
    params = params or GbdtParams()
    params.validate()
    rows, y, dim = _rows_from_samples(list(samples))
    n = len(rows)
    if n == 0:
        raise GbdtError("empty sample set")
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == n:
        raise GbdtError("training needs both positive and negative samples")

    # Canonical row order makes training exactly invariant under permuting
    # the input samples (accumulation order no longer depends on it).
    order = sorted(range(n), key=lambda r: (y[r], rows[r][0].tobytes(),
                                            rows[r][1].tobytes()))
    rows = [rows[r] for r in order]
    y = y[order]

    matrix = _Matrix(rows)
    base_score = math.log(n_pos / (n - n_pos))
    margins = np.full(n, base_score, dtype=np.float64)
    trees = []
    loss_history = [_logloss(margins, y)]

    for _ in range(params.rounds):
        p = 1.0 / (1.0 + np.exp(-np.clip(margins, -700, 700)))
        grad = p - y
        hess = p * (1.0 - p)
        tree, leaf_of_row = _grow_tree(matrix, grad, hess, params)
        trees.append(tree)
        margins += leaf_of_row
        loss_history.append(_logloss(margins, y))

    return GbdtModel(params.growth, params.eta, base_score, dim,
                     params.to_dict(), trees, loss_history)


def _logloss(margins: np.ndarray, y: np.ndarray) -> float:
    p = 1.0 / (1.0 + np.exp(-np.clip(margins, -700, 700)))
    eps = 1e-15
    p = np.clip(p, eps, 1.0 - eps)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


class _Node:
    __slots__ = ("rows", "depth", "g", "h", "gain", "feat", "thresh",
                 "left", "right", "value", "order")

    def __init__(self, rows: np.ndarray, depth: int, order: int):
        self.rows = rows
        self.depth = depth
        self.order = order
        self.gain = 0.0
        self.feat = -1
        self.thresh = 0.0
        self.left = None
        self.right = None
        self.value = 0.0


def _node_totals(nodes, grad, hess):
    k = len(nodes)
    node_g = np.zeros(k, dtype=np.float64)
    node_h = np.zeros(k, dtype=np.float64)
    node_cnt = np.zeros(k, dtype=np.int64)
    for i, nd in enumerate(nodes):
        node_g[i] = grad[nd.rows].sum()
        node_h[i] = hess[nd.rows].sum()
        node_cnt[i] = len(nd.rows)
        nd.g = float(node_g[i])
        nd.h = float(node_h[i])
    return node_g, node_h, node_cnt


def _search_splits(matrix, nodes, grad, hess, params, n_rows):
    """Best split per node via one pass over every column."""
    kern = backend.kernels()
    node_of_row = np.full(n_rows, -1, dtype=np.int32)
    for i, nd in enumerate(nodes):
        node_of_row[nd.rows] = i
    node_g, node_h, node_cnt = _node_totals(nodes, grad, hess)
    k = len(nodes)
    best_gain = np.zeros(k, dtype=np.float64)
    best_feat = np.full(k, -1, dtype=np.int32)
    best_thresh = np.zeros(k, dtype=np.float64)
    for f, rids, vals in matrix.columns:
        kern.scan_column_splits(rids, vals, node_of_row, grad, hess,
                                node_g, node_h, node_cnt, params.lam,
                                params.min_child_weight, best_gain,
                                best_feat, best_thresh, f)
    for i, nd in enumerate(nodes):
        nd.gain = float(best_gain[i])
        nd.feat = int(best_feat[i])
        nd.thresh = float(best_thresh[i])


def _split_rows(matrix, node):
    left, right = [], []
    for r in node.rows.tolist():
        if matrix.value(r, node.feat) < node.thresh:
            left.append(r)
        else:
            right.append(r)
    return (np.array(left, dtype=np.int64), np.array(right, dtype=np.int64))


def _leaf_value(node, params) -> float:
    return -params.eta * node.g / (node.h + params.lam)


def _grow_tree(matrix, grad, hess, params):
    n_rows = len(matrix.rows)
    all_rows = np.arange(n_rows, dtype=np.int64)
    counter = 0
    root = _Node(all_rows, 0, counter)
    if params.growth == GROWTH_LEVEL:
        frontier = [root]
        while frontier and frontier[0].depth < params.depth:
            _search_splits(matrix, frontier, grad, hess, params, n_rows)
            nxt = []
            for nd in frontier:
                if nd.gain > 0.0 and nd.feat >= 0:
                    lrows, rrows = _split_rows(matrix, nd)
                    counter += 1
                    nd.left = _Node(lrows, nd.depth + 1, counter)
                    counter += 1
                    nd.right = _Node(rrows, nd.depth + 1, counter)
                    nxt.extend((nd.left, nd.right))
                else:
                    nd.value = _leaf_value(nd, params)
            frontier = nxt
        for nd in frontier:
            _node_totals([nd], grad, hess)
            nd.value = _leaf_value(nd, params)
    else:
        _search_splits(matrix, [root], grad, hess, params, n_rows)
        heap = []
        if root.gain > 0.0 and root.depth < params.depth:
            heapq.heappush(heap, (-root.gain, root.order, root))
        n_leaves = 1
        while heap and n_leaves < params.leaves:
            _, _, nd = heapq.heappop(heap)
            lrows, rrows = _split_rows(matrix, nd)
            counter += 1
            nd.left = _Node(lrows, nd.depth + 1, counter)
            counter += 1
            nd.right = _Node(rrows, nd.depth + 1, counter)
            n_leaves += 1
            children = [nd.left, nd.right]
            _search_splits(matrix, children, grad, hess, params, n_rows)
            for child in children:
                child.value = _leaf_value(child, params)
                if child.gain > 0.0 and child.depth < params.depth:
                    heapq.heappush(heap, (-child.gain, child.order, child))
        if root.left is None:
            _node_totals([root], grad, hess)
            root.value = _leaf_value(root, params)

    leaf_of_row = np.zeros(n_rows, dtype=np.float64)
    tree = _to_dict(root, leaf_of_row)
    return tree, leaf_of_row


def _to_dict(node, leaf_of_row):
    if node.left is None:
        leaf_of_row[node.rows] = node.value
        return {"leaf": node.value}
    return {"f": node.feat, "t": node.thresh,
            "l": _to_dict(node.left, leaf_of_row),
            "r": _to_dict(node.right, leaf_of_row)}


# ---------------------------------------------------------------------------
# Prediction


def _flatten_trees(trees):
    feat, thresh, left, right, value, roots = [], [], [], [], [], []

    def add(node) -> int:
        i = len(feat)
        feat.append(-1)
        thresh.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        if "leaf" in node:
            value[i] = float(node["leaf"])
        else:
            feat[i] = int(node["f"])
            thresh[i] = float(node["t"])
            left[i] = add(node["l"])
            right[i] = add(node["r"])
        return i

    for tree in trees:
        roots.append(add(tree))
    return (np.array(feat, dtype=np.int32), np.array(thresh, dtype=np.float64),
            np.array(left, dtype=np.int32), np.array(right, dtype=np.int32),
            np.array(value, dtype=np.float64), np.array(roots, dtype=np.int32))


def predict_margin(model: GbdtModel, triple) -> float:
    if isinstance(triple, FeatureTriple):
        if model.num_features != triple.dimension:
            raise GbdtError(
                f"model expects {model.num_features} features but vector has "
                f"{triple.dimension}: hash base mismatch")
        idx, val = triple.sorted_arrays()
    else:
        idx, val = triple
        idx = np.asarray(idx, dtype=np.int64)
        val = np.asarray(val, dtype=np.float64)
    feat, thresh, left, right, value, roots = model.flat()
    return float(backend.kernels().traverse_margin(
        feat, thresh, left, right, value, roots, idx, val, model.base_score))


def predict(model: GbdtModel, triple) -> float:
    """Usefulness probability in (0, 1) for one feature triple."""
    return sigmoid(predict_margin(model, triple))


def classification_rates(model: GbdtModel, samples) -> tuple[float, float]:
    """True-positive and true-negative rates at the 0.5 threshold.

    samples as for train_gbdt; rates are 0.0 when a class is absent.
    """
    tp = fn = tn = fp = 0
    for triple, label in samples:
        positive = predict(model, triple) >= 0.5
        if label:
            tp, fn = tp + positive, fn + (not positive)
        else:
            tn, fp = tn + (not positive), fp + positive
    tpr = tp / (tp + fn) if tp + fn else 0.0
    tnr = tn / (tn + fp) if tn + fp else 0.0
    return tpr, tnr


# ---------------------------------------------------------------------------
# Serialization


def _check_finite(node) -> None:
    if "leaf" in node:
        if not math.isfinite(node["leaf"]):
            raise ModelFormatError("non-finite leaf value")
        return
    for key in ("f", "t", "l", "r"):
        if key not in node:
            raise ModelFormatError(f"split node missing {key!r}")
    if not math.isfinite(node["t"]):
        raise ModelFormatError("non-finite threshold")
    if node["f"] < 0:
        raise ModelFormatError("negative feature index")
    _check_finite(node["l"])
    _check_finite(node["r"])


def save_model(model: GbdtModel, path) -> None:
    doc = {
        "version": MODEL_VERSION,
        "growth": model.growth,
        "eta": model.eta,
        "base_score": model.base_score,
        "num_features": model.num_features,
        "params": model.params,
        "trees": model.trees,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def _reject_constant(token: str):
    raise ModelFormatError(f"non-finite number in model file: {token}")


def load_model(path) -> GbdtModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh, parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"not a model file: {exc}") from exc
    if not isinstance(doc, dict) or "version" not in doc:
        raise ModelFormatError("missing version field")
    if doc["version"] != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {doc['version']!r}")
    try:
        model = GbdtModel(doc["growth"], float(doc["eta"]),
                          float(doc["base_score"]), int(doc["num_features"]),
                          doc["params"], doc["trees"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from exc
    if not math.isfinite(model.base_score) or not math.isfinite(model.eta):
        raise ModelFormatError("non-finite scalar in model file")
    for tree in model.trees:
        _check_finite(tree)
    return model
