"""Finite-difference verification of the analytic gradients.

The check treats the pair loss as a black box: every element of every
parameter tensor is perturbed by +/-step and the central difference is
compared against the backpropagated gradient. Relative error uses
``|a - f| / max(|a|, |f|, floor)`` where the floor keeps near-zero
gradients from amplifying finite-difference round-off into spurious
mismatches; elements whose true gradient is exactly zero (flat hinge
region) compare exactly.
"""

from __future__ import annotations

import numpy as np

from .network import (
    AssembledBatch,
    GraphTensors,
    assemble,
    contrastive_loss,
    distance,
    forward,
    pair_loss_and_grads,
)
from .params import ModelParams, TrainConfig


class GradMismatch(RuntimeError):
    """Analytic and finite-difference gradients disagree for a tensor."""

    def __init__(self, tensor: str, error: float, report: dict[str, float]):
        self.tensor = tensor
        self.error = error
        self.report = report
        super().__init__(f"gradient mismatch in tensor {tensor!r}: "
                         f"max relative error {error:.3e}")


def _loss(batch: AssembledBatch, params: ModelParams, label: int,
          config: TrainConfig) -> float:
    Z, _ = forward(batch, params, config)
    return contrastive_loss(distance(Z[0], Z[1]), label, config.margin)


def grad_check(params: ModelParams, g1: GraphTensors, g2: GraphTensors,
               label: int, config: TrainConfig, step: float = 1e-4,
               tolerance: float = 1e-4, floor: float = 1e-3,
               grads: dict[str, np.ndarray] | None = None) -> dict[str, float]:
    """Compare analytic gradients with central finite differences.

    Returns the per-tensor maximum relative error; raises
    :class:`GradMismatch` naming the worst offending tensor if any exceeds
    the tolerance. ``grads`` overrides the analytic gradients (used by
    negative-control tests).
    """
    if grads is None:
        _, grads = pair_loss_and_grads(params, g1, g2, label, config)
    batch = assemble([g1, g2])

    report: dict[str, float] = {}
    for name in params.names():
        tensor = params.tensors[name]
        analytic = grads[name].ravel()
        flat = tensor.ravel()
        worst = 0.0
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            plus = _loss(batch, params, label, config)
            flat[i] = original - step
            minus = _loss(batch, params, label, config)
            flat[i] = original
            fd = (plus - minus) / (2.0 * step)
            a = analytic[i]
            err = abs(a - fd) / max(abs(a), abs(fd), floor)
            if err > worst:
                worst = err
        report[name] = worst

    failing = {name: err for name, err in report.items() if err > tolerance}
    if failing:
        worst_name = max(failing, key=failing.get)
        raise GradMismatch(worst_name, failing[worst_name], report)
    return report
