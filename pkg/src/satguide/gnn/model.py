"""Message-passing weights: portable container format and vectorized forward.

Container layout (byte-exact, shared with the external trainer):

    8 bytes  little-endian uint64, manifest byte length M
    M bytes  UTF-8 JSON manifest: {"version": 1, "dim": D, "rounds": L,
             "tensors": [{"name", "shape", "offset", "length"}, ...]}
             with offset/length counted in float32 elements
    payload  raw little-endian float32 values, tensors in manifest order

The forward pass computes, per round, simultaneous updates of term, symbol
and clause embeddings with mean aggregation over hyperedge neighbours,
position-specific argument matrices (1, 2, shared >=3), an additive
edge-type term distinguishing plain terms from positive/negative literals,
and a rectifier nonlinearity. Scores come from a 2-layer head applied to
each query clause embedding concatenated with the mean goal embedding.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .graph import TensorGraph

CONTAINER_VERSION = 1
DEFAULT_DIM = 32
DEFAULT_ROUNDS = 5


class WeightError(Exception):
    pass


class UnknownVersionError(WeightError):
    pass


class ShapeError(WeightError):
    pass


class SizeError(WeightError):
    pass


class NonFiniteError(WeightError):
    pass


_ROUND_TENSORS = (
    ("u_self", 2), ("u_from_sym", 2), ("u_from_arg1", 2), ("u_from_arg2", 2),
    ("u_from_arg3", 2), ("u_from_parent", 2), ("u_from_clause", 2),
    ("u_edge_bias", "3xd"), ("u_bias", 1),
    ("n_self", 2), ("n_from_result", 2), ("n_bias", 1),
    ("c_self", 2), ("c_from_lit", 2), ("c_bias", 1),
)


def tensor_spec(dim: int, rounds: int) -> list[tuple[str, tuple[int, ...]]]:
    """Ordered (name, shape) list defining the container contents."""
    spec = [("init_clause", (dim,)), ("init_symbol", (dim,)),
            ("init_term", (dim,))]
    for r in range(rounds):
        for name, kind in _ROUND_TENSORS:
            if kind == 2:
                shape: tuple[int, ...] = (dim, dim)
            elif kind == 1:
                shape = (dim,)
            else:
                shape = (3, dim)
            spec.append((f"round{r}.{name}", shape))
    spec += [("head_hidden_w", (dim, 2 * dim)), ("head_hidden_b", (dim,)),
             ("head_out_w", (1, dim)), ("head_out_b", (1,))]
    return spec


@dataclass
class GnnWeights:
    dim: int
    rounds: int
    tensors: dict[str, np.ndarray]  # float32, shapes per tensor_spec

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]


def init_weights(dim: int = DEFAULT_DIM, rounds: int = DEFAULT_ROUNDS,
                 seed: int = 0, scale: float = 0.2) -> GnnWeights:
    """Random weights, seeded; used for fixtures and untrained baselines."""
    rng = np.random.default_rng(seed)
    tensors = {name: rng.normal(0.0, scale, shape).astype(np.float32)
               for name, shape in tensor_spec(dim, rounds)}
    return GnnWeights(dim, rounds, tensors)


def save_weights(weights: GnnWeights, path) -> None:
    spec = tensor_spec(weights.dim, weights.rounds)
    entries = []
    offset = 0
    chunks = []
    for name, shape in spec:
        arr = weights.tensors[name]
        if tuple(arr.shape) != shape:
            raise ShapeError(f"tensor {name} has shape {arr.shape}, "
                             f"expected {shape}")
        if not np.isfinite(arr).all():
            raise NonFiniteError(f"tensor {name} contains non-finite values")
        length = int(arr.size)
        entries.append({"name": name, "shape": list(shape),
                        "offset": offset, "length": length})
        chunks.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
        offset += length
    manifest = json.dumps(
        {"version": CONTAINER_VERSION, "dim": weights.dim,
         "rounds": weights.rounds, "tensors": entries},
        sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(manifest)))
        fh.write(manifest)
        for chunk in chunks:
            fh.write(chunk)


def load_weights(path) -> GnnWeights:
    """Read and validate a weight container; see module docstring."""
    with open(path, "rb") as fh:
        header = fh.read(8)
        if len(header) != 8:
            raise SizeError("container truncated before manifest length")
        (mlen,) = struct.unpack("<Q", header)
        raw = fh.read(mlen)
        if len(raw) != mlen:
            raise SizeError("container truncated inside manifest")
        try:
            manifest = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise WeightError(f"bad manifest: {exc}") from exc
        payload = fh.read()

    if manifest.get("version") != CONTAINER_VERSION:
        raise UnknownVersionError(
            f"unsupported container version {manifest.get('version')!r}")
    dim = manifest.get("dim")
    rounds = manifest.get("rounds")
    if not isinstance(dim, int) or not isinstance(rounds, int):
        raise WeightError("manifest missing dim/rounds")
    spec = tensor_spec(dim, rounds)
    listed = manifest.get("tensors")
    if not isinstance(listed, list) or len(listed) != len(spec):
        raise ShapeError(f"expected {len(spec)} tensors for dim={dim} "
                         f"rounds={rounds}")
    floats = np.frombuffer(payload, dtype="<f4")
    tensors: dict[str, np.ndarray] = {}
    offset = 0
    for entry, (name, shape) in zip(listed, spec):
        if entry.get("name") != name:
            raise ShapeError(f"tensor {entry.get('name')!r} out of order, "
                             f"expected {name!r}")
        if tuple(entry.get("shape", ())) != shape:
            raise ShapeError(f"tensor {name} declared shape "
                             f"{entry.get('shape')}, expected {list(shape)}")
        length = int(np.prod(shape))
        if entry.get("offset") != offset or entry.get("length") != length:
            raise ShapeError(f"tensor {name} has inconsistent offset/length")
        offset += length
    if floats.size != offset:
        raise SizeError(f"payload holds {floats.size} floats, "
                        f"manifest requires {offset}")
    if not np.isfinite(floats).all():
        raise NonFiniteError("payload contains non-finite values")
    pos = 0
    for name, shape in spec:
        length = int(np.prod(shape))
        tensors[name] = floats[pos:pos + length].reshape(shape).copy()
        pos += length
    return GnnWeights(dim, rounds, tensors)


# ---------------------------------------------------------------------------
# Vectorized forward pass


def _segment_mean(values: np.ndarray, index: np.ndarray, n: int,
                  dim: int) -> np.ndarray:
    out = np.zeros((n, dim))
    if index.size == 0:
        return out
    np.add.at(out, index, values)
    counts = np.zeros(n)
    np.add.at(counts, index, 1.0)
    nz = counts > 0
    out[nz] /= counts[nz, None]
    return out


def forward(weights: GnnWeights, tg: TensorGraph) -> np.ndarray:
    """Scores for the query clauses, in clause-node order.

    Deterministic for a fixed tensor graph; raises NonFiniteError naming
    the round if an update diverges.
    """
    d = weights.dim
    w = {k: v.astype(np.float64) for k, v in weights.tensors.items()}
    U = np.tile(w["init_term"], (tg.n_terms, 1))
    N = np.tile(w["init_symbol"], (tg.n_symbols, 1))
    C = np.tile(w["init_clause"], (tg.n_clauses, 1))

    for r in range(weights.rounds):
        p = f"round{r}."
        # Messages into result nodes: head symbol + positional argument mix
        # + edge-type term.
        sym_part = N[tg.app_symbol] @ w[p + "u_from_sym"].T
        a1 = U @ w[p + "u_from_arg1"].T
        a2 = U @ w[p + "u_from_arg2"].T
        a3 = U @ w[p + "u_from_arg3"].T
        arg_msg = np.where(
            (tg.arg_pos == 1)[:, None], a1[tg.arg_node],
            np.where((tg.arg_pos == 2)[:, None], a2[tg.arg_node],
                     a3[tg.arg_node]))
        n_edges = tg.app_result.shape[0]
        arg_sum = np.zeros((n_edges, d))
        if tg.arg_edge.size:
            np.add.at(arg_sum, tg.arg_edge, arg_msg)
        denom = np.maximum(tg.app_nargs, 1).astype(np.float64)
        msg_res = sym_part + arg_sum / denom[:, None] \
            + w[p + "u_edge_bias"][tg.app_etype]

        in_res = _segment_mean(msg_res, tg.app_result, tg.n_terms, d)
        parent_msg = (U @ w[p + "u_from_parent"].T)[tg.app_result[tg.arg_edge]]
        in_parent = _segment_mean(parent_msg, tg.arg_node, tg.n_terms, d)
        clause_msg = (C @ w[p + "u_from_clause"].T)[tg.clause_edge_c]
        in_clause = _segment_mean(clause_msg, tg.clause_edge_u, tg.n_terms, d)
        new_u = _relu(U @ w[p + "u_self"].T + in_res + in_parent + in_clause
                      + w[p + "u_bias"])

        res_msg = (U @ w[p + "n_from_result"].T)[tg.app_result]
        in_sym = _segment_mean(res_msg, tg.app_symbol, tg.n_symbols, d)
        new_n = _relu(N @ w[p + "n_self"].T + in_sym + w[p + "n_bias"])

        lit_msg = (U @ w[p + "c_from_lit"].T)[tg.clause_edge_u]
        in_lit = _segment_mean(lit_msg, tg.clause_edge_c, tg.n_clauses, d)
        new_c = _relu(C @ w[p + "c_self"].T + in_lit + w[p + "c_bias"])

        U, N, C = new_u, new_n, new_c
        for arr in (U, N, C):
            if not np.isfinite(arr).all():
                raise NonFiniteError(f"non-finite embedding after round {r}")

    if tg.goal_mask.any():
        goal_agg = C[tg.goal_mask].mean(axis=0)
    else:
        goal_agg = np.zeros(d)
    cq = C[tg.query_mask]
    x = np.concatenate([cq, np.tile(goal_agg, (cq.shape[0], 1))], axis=1)
    hidden = _relu(x @ w["head_hidden_w"].T + w["head_hidden_b"])
    scores = hidden @ w["head_out_w"].T + w["head_out_b"]
    return scores[:, 0]


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)
