"""The clause-scoring network and its portable weight container.

Forward semantics (shared with the consuming prover): per round,
simultaneous updates of term, symbol and clause embeddings with mean
aggregation over hyperedge neighbours, argument-position matrices (1, 2,
shared >=3), an additive edge-type term for plain/positive/negative
application edges, rectifier nonlinearity; then a 2-layer head on each
query clause embedding concatenated with the mean goal embedding.

Container format (byte-exact):

    8 bytes  little-endian uint64 manifest length M
    M bytes  UTF-8 JSON {"version":1,"dim":D,"rounds":L,"tensors":[
             {"name","shape","offset","length"},...]} (sorted keys,
             compact separators; offset/length in float32 elements)
    payload  little-endian float32, tensors in manifest order
"""

from __future__ import annotations

import json
import struct

import numpy as np
import torch
from torch import nn

from .graph import TensorGraph

CONTAINER_VERSION = 1

_ROUND_MATS = ("u_self", "u_from_sym", "u_from_arg1", "u_from_arg2",
               "u_from_arg3", "u_from_parent", "u_from_clause",
               "n_self", "n_from_result", "c_self", "c_from_lit")
_ROUND_VECS = ("u_bias", "n_bias", "c_bias")


def tensor_spec(dim: int, rounds: int) -> list[tuple[str, tuple[int, ...]]]:
    spec = [("init_clause", (dim,)), ("init_symbol", (dim,)),
            ("init_term", (dim,))]
    for r in range(rounds):
        p = f"round{r}."
        spec += [(p + "u_self", (dim, dim)), (p + "u_from_sym", (dim, dim)),
                 (p + "u_from_arg1", (dim, dim)),
                 (p + "u_from_arg2", (dim, dim)),
                 (p + "u_from_arg3", (dim, dim)),
                 (p + "u_from_parent", (dim, dim)),
                 (p + "u_from_clause", (dim, dim)),
                 (p + "u_edge_bias", (3, dim)), (p + "u_bias", (dim,)),
                 (p + "n_self", (dim, dim)),
                 (p + "n_from_result", (dim, dim)), (p + "n_bias", (dim,)),
                 (p + "c_self", (dim, dim)), (p + "c_from_lit", (dim, dim)),
                 (p + "c_bias", (dim,))]
    spec += [("head_hidden_w", (dim, 2 * dim)), ("head_hidden_b", (dim,)),
             ("head_out_w", (1, dim)), ("head_out_b", (1,))]
    return spec


class ClauseScorer(nn.Module):
    """Message-passing scorer; parameters named per the container spec."""

    def __init__(self, dim: int = 32, rounds: int = 5, seed: int = 0,
                 init_scale: float = 0.2):
        super().__init__()
        self.dim = dim
        self.rounds = rounds
        gen = torch.Generator().manual_seed(seed)
        self.params = nn.ParameterDict()
        for name, shape in tensor_spec(dim, rounds):
            init = torch.randn(shape, generator=gen,
                               dtype=torch.float64) * init_scale
            # ParameterDict keys cannot contain '.', so flatten it.
            self.params[name.replace(".", "__")] = nn.Parameter(init)

    def tensor(self, name: str) -> torch.Tensor:
        return self.params[name.replace(".", "__")]

    def forward(self, tg: TensorGraph) -> torch.Tensor:
        """Scores for the query clauses, in clause-node order."""
        d = self.dim
        w = self.tensor
        U = w("init_term").unsqueeze(0).expand(tg.n_terms, d)
        N = w("init_symbol").unsqueeze(0).expand(tg.n_symbols, d)
        C = w("init_clause").unsqueeze(0).expand(tg.n_clauses, d)

        for r in range(self.rounds):
            p = f"round{r}."
            sym_part = N[tg.app_symbol] @ w(p + "u_from_sym").T
            a1 = U @ w(p + "u_from_arg1").T
            a2 = U @ w(p + "u_from_arg2").T
            a3 = U @ w(p + "u_from_arg3").T
            pos = tg.arg_pos.unsqueeze(1)
            arg_msg = torch.where(
                pos == 1, a1[tg.arg_node],
                torch.where(pos == 2, a2[tg.arg_node], a3[tg.arg_node]))
            n_edges = tg.app_result.shape[0]
            arg_sum = torch.zeros((n_edges, d), dtype=U.dtype)
            if tg.arg_edge.numel():
                arg_sum = arg_sum.index_add(0, tg.arg_edge, arg_msg)
            denom = tg.app_nargs.clamp(min=1).to(U.dtype).unsqueeze(1)
            msg_res = sym_part + arg_sum / denom \
                + w(p + "u_edge_bias")[tg.app_etype]

            in_res = _segment_mean(msg_res, tg.app_result, tg.n_terms, d)
            parent = (U @ w(p + "u_from_parent").T)[tg.app_result[tg.arg_edge]]
            in_parent = _segment_mean(parent, tg.arg_node, tg.n_terms, d)
            cl_msg = (C @ w(p + "u_from_clause").T)[tg.clause_edge_c]
            in_clause = _segment_mean(cl_msg, tg.clause_edge_u, tg.n_terms, d)
            new_u = torch.relu(U @ w(p + "u_self").T + in_res + in_parent
                               + in_clause + w(p + "u_bias"))

            res_msg = (U @ w(p + "n_from_result").T)[tg.app_result]
            in_sym = _segment_mean(res_msg, tg.app_symbol, tg.n_symbols, d)
            new_n = torch.relu(N @ w(p + "n_self").T + in_sym
                               + w(p + "n_bias"))

            lit_msg = (U @ w(p + "c_from_lit").T)[tg.clause_edge_u]
            in_lit = _segment_mean(lit_msg, tg.clause_edge_c, tg.n_clauses, d)
            new_c = torch.relu(C @ w(p + "c_self").T + in_lit
                               + w(p + "c_bias"))
            U, N, C = new_u, new_n, new_c

        if bool(tg.goal_mask.any()):
            goal_agg = C[tg.goal_mask].mean(dim=0)
        else:
            goal_agg = torch.zeros(d, dtype=C.dtype)
        cq = C[tg.query_mask]
        x = torch.cat([cq, goal_agg.unsqueeze(0).expand(cq.shape[0], d)],
                      dim=1)
        hidden = torch.relu(x @ w("head_hidden_w").T + w("head_hidden_b"))
        return (hidden @ w("head_out_w").T + w("head_out_b")).squeeze(1)


def _segment_mean(values: torch.Tensor, index: torch.Tensor, n: int,
                  dim: int) -> torch.Tensor:
    out = torch.zeros((n, dim), dtype=values.dtype)
    if index.numel() == 0:
        return out
    out = out.index_add(0, index, values)
    counts = torch.zeros(n, dtype=values.dtype).index_add(
        0, index, torch.ones(index.shape[0], dtype=values.dtype))
    return out / counts.clamp(min=1.0).unsqueeze(1)


class ExportError(Exception):
    pass


def export_weights(model: ClauseScorer, path) -> None:
    """Write the container; refuses non-finite or mis-shaped tensors."""
    entries = []
    chunks = []
    offset = 0
    for name, shape in tensor_spec(model.dim, model.rounds):
        arr = model.tensor(name).detach().cpu().numpy()
        if tuple(arr.shape) != shape:
            raise ExportError(f"tensor {name} has shape {arr.shape}, "
                              f"config expects {shape}")
        if not np.isfinite(arr).all():
            raise ExportError(f"tensor {name} is not finite")
        length = int(arr.size)
        entries.append({"name": name, "shape": list(shape),
                        "offset": offset, "length": length})
        chunks.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
        offset += length
    manifest = json.dumps(
        {"version": CONTAINER_VERSION, "dim": model.dim,
         "rounds": model.rounds, "tensors": entries},
        sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(manifest)))
        fh.write(manifest)
        for chunk in chunks:
            fh.write(chunk)


def load_into_model(path) -> ClauseScorer:
    """Rebuild a ClauseScorer from a container (float32 quantized)."""
    with open(path, "rb") as fh:
        (mlen,) = struct.unpack("<Q", fh.read(8))
        manifest = json.loads(fh.read(mlen).decode("utf-8"))
        payload = np.frombuffer(fh.read(), dtype="<f4")
    if manifest.get("version") != CONTAINER_VERSION:
        raise ExportError(f"unsupported version {manifest.get('version')!r}")
    model = ClauseScorer(manifest["dim"], manifest["rounds"], seed=0,
                         init_scale=0.0)
    pos = 0
    with torch.no_grad():
        for name, shape in tensor_spec(model.dim, model.rounds):
            length = int(np.prod(shape))
            block = payload[pos:pos + length].reshape(shape)
            model.tensor(name).copy_(
                torch.from_numpy(block.astype(np.float64)))
            pos += length
    if pos != payload.size:
        raise ExportError("payload size mismatch")
    return model


def quantized_copy(model: ClauseScorer) -> ClauseScorer:
    """The model as consumers will see it: float32 round-tripped."""
    clone = ClauseScorer(model.dim, model.rounds, seed=0, init_scale=0.0)
    with torch.no_grad():
        for name, _ in tensor_spec(model.dim, model.rounds):
            arr = model.tensor(name).detach().numpy().astype(np.float32)
            clone.tensor(name).copy_(
                torch.from_numpy(arr.astype(np.float64)))
    return clone
