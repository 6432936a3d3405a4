"""JSON snapshots of knowledge graphs for debugging and inspection tools."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .build import KnowledgeGraph


def graph_snapshot(graph: KnowledgeGraph) -> dict:
    """Serialize one graph: node list, edge list, neighborhoods, features."""
    n = graph.real_node_count
    edges = [
        [u, v]
        for u in range(n)
        for v in range(u + 1, n)
        if graph.adjacency[u, v]
    ]
    return {
        "address": graph.address,
        "real_node_count": n,
        "nodes": [
            {"index": i, "kind": node.kind.value, "subtype": node.subtype,
             "attribute": node.attribute}
            for i, node in enumerate(graph.nodes)
        ],
        "edges": edges,
        "metapath_neighbors": graph.metapath_neighbors,
        "features": None if graph.features is None else graph.features.tolist(),
    }


def write_snapshots(path: str | Path, graphs: Iterable[KnowledgeGraph]) -> None:
    payload = {"format_version": 1, "graphs": [graph_snapshot(g) for g in graphs]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")
