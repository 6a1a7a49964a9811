"""Trainer for the prover's hypergraph clause-scoring networks.

Reads training-sample JSONL files, trains by automatic differentiation,
and exports per-epoch weight containers (plus probe fixtures) in the
byte-exact format the prover loads.
"""

from .gradcheck import gradient_check  # noqa: F401
from .model import ClauseScorer, export_weights, load_into_model  # noqa: F401
from .train import DivergenceError, TrainConfig, train_gnn  # noqa: F401
