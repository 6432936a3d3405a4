"""Model hyperparameters and the shared parameter store.

The encoder is siamese: both branches read the same tensors, so there is a
single parameter store and "sharing" is structural rather than synchronized.

Dimensions: node feature rows are 50-wide, the per-node-type projection
maps them to a 50-dim hidden vector, each of the K=4 attention heads scores
pairs against a 100-dim vector (two concatenated hidden vectors), and the
concatenated per-node embedding is K*50 = 200-dim. The semantic- and
graph-level scorers work in a 128-dim space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FEATURE_DIM = 50
HIDDEN_DIM = 50
ATTENTION_DIM = 128
INIT_SCALE = 0.05

PROJECTION_KINDS = ("client", "server", "client_fp", "server_fp")
META_PATHS = ("FCF", "FSF", "SCS")


@dataclass
class TrainConfig:
    learning_rate: float = 0.005
    weight_decay: float = 0.001
    heads: int = 4
    margin: float = 20.0
    eta: float = 10.0
    leaky_relu_slope: float = 0.2
    patience: int = 100
    max_epochs: int = 300
    batch_size: int | None = None  # None: one full-batch step per epoch
    rng_seed: int = 0

    def __post_init__(self):
        if not self.margin > self.eta > 0:
            raise ValueError("margin must exceed eta and eta must be positive")
        if self.heads < 1:
            raise ValueError("heads must be >= 1")
        if self.learning_rate <= 0 or self.patience < 1 or self.max_epochs < 1:
            raise ValueError("learning_rate, patience, and max_epochs must be positive")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be positive when set")


def tensor_shapes(heads: int) -> dict[str, tuple[int, ...]]:
    """Shapes of all learnable tensors, in canonical (init) order."""
    embed = heads * HIDDEN_DIM
    shapes: dict[str, tuple[int, ...]] = {}
    for kind in PROJECTION_KINDS:
        shapes[f"proj_{kind}"] = (HIDDEN_DIM, FEATURE_DIM)
    for path in META_PATHS:
        shapes[f"attn_{path}"] = (heads, 2 * HIDDEN_DIM)
    shapes["semantic_w"] = (ATTENTION_DIM, embed)
    shapes["semantic_b"] = (ATTENTION_DIM,)
    shapes["semantic_p"] = (ATTENTION_DIM,)
    shapes["graph_w"] = (ATTENTION_DIM, embed)
    shapes["graph_b"] = (ATTENTION_DIM,)
    shapes["graph_q"] = (ATTENTION_DIM,)
    return shapes


@dataclass
class ModelParams:
    """All learnable tensors, keyed by name."""

    heads: int
    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def embedding_dim(self) -> int:
        return self.heads * HIDDEN_DIM

    @classmethod
    def init_random(cls, heads: int, rng: np.random.Generator) -> "ModelParams":
        """Seeded uniform(-0.05, 0.05) initialization in canonical tensor order."""
        tensors = {
            name: rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)
            for name, shape in tensor_shapes(heads).items()
        }
        return cls(heads=heads, tensors=tensors)

    @classmethod
    def from_tensors(cls, heads: int, tensors: dict[str, np.ndarray]) -> "ModelParams":
        expected = tensor_shapes(heads)
        if set(tensors) != set(expected):
            raise ValueError("tensor names do not match the model layout")
        for name, shape in expected.items():
            if tuple(tensors[name].shape) != shape:
                raise ValueError(f"tensor {name} has shape {tensors[name].shape}, "
                                 f"expected {shape}")
        ordered = {name: np.asarray(tensors[name], dtype=np.float64) for name in expected}
        return cls(heads=heads, tensors=ordered)

    def copy(self) -> "ModelParams":
        return ModelParams(
            heads=self.heads,
            tensors={name: t.copy() for name, t in self.tensors.items()},
        )

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def names(self) -> list[str]:
        return list(self.tensors)

    def all_finite(self) -> bool:
        return all(np.isfinite(t).all() for t in self.tensors.values())
