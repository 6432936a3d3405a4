"""Versioned checkpoint files.

JSON with every tensor's name, shape, and row-major values. Python float
repr round-trips exactly, so save -> load reproduces every tensor (and the
optimizer moments) bit for bit.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .params import ModelParams, TrainConfig

FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    params: ModelParams
    config: TrainConfig
    optimizer_state: dict | None
    meta: dict


def _tensor_payload(tensors: dict[str, np.ndarray]) -> dict:
    return {
        name: {"shape": list(t.shape), "data": t.ravel().tolist()}
        for name, t in tensors.items()
    }


def _tensor_restore(payload: dict) -> dict[str, np.ndarray]:
    return {
        name: np.array(entry["data"], dtype=np.float64).reshape(entry["shape"])
        for name, entry in payload.items()
    }


def save_checkpoint(path: str | Path, params: ModelParams, config: TrainConfig,
                    optimizer_state: dict | None = None,
                    meta: dict | None = None) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "config": asdict(config),
        "heads": params.heads,
        "tensors": _tensor_payload(params.tensors),
        "optimizer": None,
        "meta": meta or {},
    }
    if optimizer_state is not None:
        payload["optimizer"] = {
            "step": optimizer_state["step"],
            "m": _tensor_payload(optimizer_state["m"]),
            "v": _tensor_payload(optimizer_state["v"]),
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_checkpoint(path: str | Path) -> Checkpoint:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format version {version!r}")
    config = TrainConfig(**payload["config"])
    params = ModelParams.from_tensors(payload["heads"], _tensor_restore(payload["tensors"]))
    optimizer_state = None
    if payload["optimizer"] is not None:
        optimizer_state = {
            "step": payload["optimizer"]["step"],
            "m": _tensor_restore(payload["optimizer"]["m"]),
            "v": _tensor_restore(payload["optimizer"]["v"]),
        }
    return Checkpoint(params=params, config=config,
                      optimizer_state=optimizer_state, meta=payload["meta"])


def checkpoint_hash(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()
