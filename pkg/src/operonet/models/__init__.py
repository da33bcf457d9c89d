"""Operator-learning architectures and their parameter bookkeeping."""

from .architectures import (
    KINDS,
    ChunkConfig,
    ConstructionError,
    OperatorModel,
    build_graph,
    embed_deeponet_as_hyper,
    init_params,
    make_chunked_hyper,
    make_deeponet,
    make_flex_deeponet,
    make_hyper_deeponet,
    make_nomad,
    make_shift_deeponet,
    model_forward,
    phi_map,
    predict,
    rows_per_chunk,
    value_and_grad,
)
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .mlp import MlpParams, MlpSpec, count_params, mlp_forward, mlp_tape

__all__ = [
    "KINDS",
    "ChunkConfig",
    "ConstructionError",
    "OperatorModel",
    "MlpSpec",
    "MlpParams",
    "count_params",
    "mlp_forward",
    "mlp_tape",
    "make_deeponet",
    "make_shift_deeponet",
    "make_flex_deeponet",
    "make_nomad",
    "make_hyper_deeponet",
    "make_chunked_hyper",
    "phi_map",
    "build_graph",
    "model_forward",
    "predict",
    "rows_per_chunk",
    "value_and_grad",
    "init_params",
    "embed_deeponet_as_hyper",
    "save_checkpoint",
    "load_checkpoint",
    "CheckpointError",
]
