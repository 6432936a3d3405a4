"""Training loop: Adam, L2 weight decay, and early stopping on validation loss.

Gradients are exact backpropagation through the whole encoder; the batch
gradient is the mean over pair losses, so the learning rate is independent
of batch size. Each optimization step encodes every unique graph of its
batch once and scatters the pair-loss gradients into the shared embeddings,
which keeps the cost linear in graphs rather than pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .network import GraphTensors, assemble, backward, forward, pair_distance_grads
from .params import ModelParams, TrainConfig

Pair = tuple[str, str, int]

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class DivergenceDetected(RuntimeError):
    """Training produced a non-finite loss or parameter."""


class Adam:
    """Standard Adam with bias correction; decoupled from the model code."""

    def __init__(self, params: ModelParams):
        self.step_count = 0
        self.m = {name: np.zeros_like(t) for name, t in params.tensors.items()}
        self.v = {name: np.zeros_like(t) for name, t in params.tensors.items()}

    def step(self, params: ModelParams, grads: Mapping[str, np.ndarray],
             learning_rate: float, weight_decay: float) -> None:
        self.step_count += 1
        t = self.step_count
        for name, tensor in params.tensors.items():
            # L2 penalty weight_decay * ||theta||^2 contributes 2*wd*theta.
            g = grads[name] + 2.0 * weight_decay * tensor
            m = self.m[name]
            v = self.v[name]
            m *= ADAM_BETA1
            m += (1.0 - ADAM_BETA1) * g
            v *= ADAM_BETA2
            v += (1.0 - ADAM_BETA2) * g * g
            m_hat = m / (1.0 - ADAM_BETA1 ** t)
            v_hat = v / (1.0 - ADAM_BETA2 ** t)
            tensor -= learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)

    def state(self) -> dict:
        return {"step": self.step_count, "m": self.m, "v": self.v}

    def snapshot(self) -> dict:
        return {
            "step": self.step_count,
            "m": {k: a.copy() for k, a in self.m.items()},
            "v": {k: a.copy() for k, a in self.v.items()},
        }


@dataclass
class TrainResult:
    params: ModelParams
    history: list[dict] = field(default_factory=list)
    best_epoch: int = 0
    stopped_epoch: int = 0
    optimizer_state: dict | None = None


class _GraphBank:
    """All graphs assembled once; steps slice sub-batches by index."""

    def __init__(self, graphs: Mapping[str, GraphTensors]):
        self.addresses = sorted(graphs)
        self.index = {addr: i for i, addr in enumerate(self.addresses)}
        self.batch = assemble([graphs[a] for a in self.addresses])

    def subbatch(self, indices: np.ndarray):
        from .network import AssembledBatch

        b = self.batch
        return AssembledBatch(
            addresses=[self.addresses[i] for i in indices],
            x=b.x[indices],
            kind_masks=b.kind_masks[:, indices],
            nbr=b.nbr[:, indices],
            node_mask=b.node_mask[indices],
            n_real=b.n_real[indices],
        )


def _mean_pair_loss(bank: _GraphBank, pairs: Sequence[Pair], params: ModelParams,
                    config: TrainConfig) -> float:
    used = sorted({i for a, b, _ in pairs for i in (bank.index[a], bank.index[b])})
    pos_of = {g: k for k, g in enumerate(used)}
    Z, _ = forward(bank.subbatch(np.array(used)), params, config)
    idx_a = np.array([pos_of[bank.index[a]] for a, _, _ in pairs])
    idx_b = np.array([pos_of[bank.index[b]] for _, b, _ in pairs])
    labels = np.array([y for _, _, y in pairs])
    diff = Z[idx_a] - Z[idx_b]
    d = np.linalg.norm(diff, axis=1)
    losses = np.where(labels == 1, d ** 2, np.maximum(0.0, config.margin - d) ** 2)
    return float(losses.mean())


def train(pairs: Sequence[Pair] | None, graphs: Mapping[str, GraphTensors],
          config: TrainConfig, val_pairs: Sequence[Pair],
          sampler: Callable[[int, np.random.Generator], Sequence[Pair]] | None = None,
          ) -> TrainResult:
    """Fit the encoder on labeled pairs; returns the best-validation state.

    ``pairs`` is a static training pair list, or pass ``sampler`` to draw a
    fresh pair list each epoch (used for per-epoch negative resampling).
    ``graphs`` must contain every address referenced by any pair.
    """
    if pairs is None and sampler is None:
        raise ValueError("provide a static pair list or a sampler")
    if not val_pairs:
        raise ValueError("validation pairs are required for early stopping")

    rng = np.random.default_rng(config.rng_seed)
    params = ModelParams.init_random(config.heads, rng)
    optimizer = Adam(params)
    bank = _GraphBank(graphs)

    best_val = np.inf
    best_params = params.copy()
    best_optimizer = optimizer.snapshot()
    best_epoch = 0
    epochs_since_best = 0
    history: list[dict] = []
    epoch = 0

    for epoch in range(1, config.max_epochs + 1):
        epoch_pairs = list(sampler(epoch, rng)) if sampler is not None else list(pairs)
        if not epoch_pairs:
            raise ValueError(f"epoch {epoch} received no training pairs")
        if config.batch_size is not None:
            order = rng.permutation(len(epoch_pairs))
            epoch_pairs = [epoch_pairs[i] for i in order]
            chunks = [
                epoch_pairs[i : i + config.batch_size]
                for i in range(0, len(epoch_pairs), config.batch_size)
            ]
        else:
            chunks = [epoch_pairs]

        total = 0.0
        for chunk in chunks:
            used = sorted({i for a, b, _ in chunk
                           for i in (bank.index[a], bank.index[b])})
            pos_of = {g: k for k, g in enumerate(used)}
            sub = bank.subbatch(np.array(used))
            Z, cache = forward(sub, params, config)
            idx_a = np.array([pos_of[bank.index[a]] for a, _, _ in chunk])
            idx_b = np.array([pos_of[bank.index[b]] for _, b, _ in chunk])
            labels = np.array([y for _, _, y in chunk])
            losses, _, dZ = pair_distance_grads(Z, idx_a, idx_b, labels, config.margin)
            grads = backward(cache, dZ, params, config)
            optimizer.step(params, grads, config.learning_rate, config.weight_decay)
            total += float(losses.sum())

        train_loss = total / len(epoch_pairs)
        val_loss = _mean_pair_loss(bank, val_pairs, params, config)
        history.append({"epoch": epoch, "train_loss": train_loss,
                        "val_loss": val_loss})
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)) or not params.all_finite():
            raise DivergenceDetected(f"non-finite loss or parameters at epoch {epoch}")

        if val_loss < best_val:
            best_val = val_loss
            best_params = params.copy()
            best_optimizer = optimizer.snapshot()
            best_epoch = epoch
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= config.patience:
                break

    return TrainResult(
        params=best_params,
        history=history,
        best_epoch=best_epoch,
        stopped_epoch=epoch,
        optimizer_state=best_optimizer,
    )
