"""Hypergraph neural clause scoring: graph building, inference, evaluation."""

from .evaluator import BatchedGnnEvaluator  # noqa: F401
from .graph import Hypergraph, TensorGraph, build_hypergraph, tensorize  # noqa: F401
from .model import (  # noqa: F401
    GnnWeights,
    NonFiniteError,
    ShapeError,
    SizeError,
    UnknownVersionError,
    WeightError,
    forward,
    init_weights,
    load_weights,
    save_weights,
    tensor_spec,
)
from .reference import forward_reference  # noqa: F401
