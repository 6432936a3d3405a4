from .params import (
    ATTENTION_DIM,
    FEATURE_DIM,
    HIDDEN_DIM,
    ModelParams,
    PROJECTION_KINDS,
    TrainConfig,
)
from .network import (
    AssembledBatch,
    GraphTensors,
    assemble,
    backward,
    contrastive_loss,
    distance,
    embed_graphs,
    encode_batch,
    export_attention,
    forward,
    graph_tensors,
    pair_loss,
    pair_loss_and_grads,
    verdict,
)
from .gradcheck import GradMismatch, grad_check
from .train import DivergenceDetected, TrainResult, train
from .checkpoint import Checkpoint, checkpoint_hash, load_checkpoint, save_checkpoint

__all__ = [
    "ATTENTION_DIM",
    "FEATURE_DIM",
    "HIDDEN_DIM",
    "PROJECTION_KINDS",
    "ModelParams",
    "TrainConfig",
    "GraphTensors",
    "AssembledBatch",
    "graph_tensors",
    "assemble",
    "forward",
    "backward",
    "encode_batch",
    "embed_graphs",
    "distance",
    "verdict",
    "contrastive_loss",
    "pair_loss",
    "pair_loss_and_grads",
    "export_attention",
    "GradMismatch",
    "grad_check",
    "DivergenceDetected",
    "TrainResult",
    "train",
    "Checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    "checkpoint_hash",
]
