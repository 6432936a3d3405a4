"""Canonical attribute strings and the numeric feature matrix.

Every node attribute is first rendered to a canonical string: addresses as
32 lowercase hex characters (no colons), protocol code lists as
hyphen-joined zero-padded lowercase hex, SNI and DN strings verbatim, and
integer statistics as decimal. The feature row of a node is the sequence of
code points of that string, padded with zeros or truncated to length 50 and
then L1-normalized; all-zero padding rows stay zero.
"""

from __future__ import annotations

import ipaddress
from typing import Iterable

import numpy as np

MAX_ATTR_LEN = 50


def address_hex(addr: str) -> str:
    """Render an IPv6 address as 32 lowercase hex characters."""
    return ipaddress.IPv6Address(addr).exploded.replace(":", "")


def codes_hex(codes: Iterable[int], digits: int = 4) -> str:
    """Render protocol codes as hyphen-joined zero-padded lowercase hex."""
    return "-".join(format(c, f"0{digits}x") for c in codes)


def encode_attribute(attribute: str, length: int = MAX_ATTR_LEN) -> np.ndarray:
    """Map an attribute string to its L1-normalized code-point row."""
    row = np.zeros(length, dtype=np.float64)
    trimmed = attribute[:length]
    if trimmed:
        row[: len(trimmed)] = [ord(ch) for ch in trimmed]
        row /= row.sum()
    return row


def encode_features(graph) -> np.ndarray:
    """Build the padded feature matrix of a truncated, ordered graph.

    Row u holds the encoded attribute of node u; rows at and beyond
    ``real_node_count`` are zero. The matrix is also attached to the graph.
    """
    from .build import MAX_NODES  # local import to avoid a cycle at module load

    features = np.zeros((MAX_NODES, MAX_ATTR_LEN), dtype=np.float64)
    for i, node in enumerate(graph.nodes):
        features[i] = encode_attribute(node.attribute)
    graph.features = features
    return features
