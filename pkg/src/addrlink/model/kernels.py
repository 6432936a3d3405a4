"""Kernel backend selection: compiled extension with pure-numpy fallback.

The compiled module is preferred when importable; set the environment
variable ``ADDRLINK_KERNELS=python`` (or call :func:`use_backend`) to force
the fallback, e.g. for benchmarking the two implementations against each
other.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built; fallback still provides everything
    _compiled = None

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled

_active_name = "python"
_active = _kernels_py


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def backend_name() -> str:
    return _active_name


def use_backend(name: str) -> str:
    """Select a backend ("cython", "python", or "auto"); returns the choice."""
    global _active, _active_name
    if name == "auto":
        name = "cython" if _compiled is not None else "python"
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; "
                         f"available: {available_backends()}")
    _active = _BACKENDS[name]
    _active_name = name
    return name


def node_attention_forward(h, nbr, node_mask, attn, slope):
    return _active.node_attention_forward(h, nbr, node_mask, attn, slope)


def node_attention_backward(dz, h, nbr, node_mask, attn, slope, alpha, s_left, s_right):
    return _active.node_attention_backward(
        dz, h, nbr, node_mask, attn, slope, alpha, s_left, s_right
    )


use_backend(os.environ.get("ADDRLINK_KERNELS", "auto"))
