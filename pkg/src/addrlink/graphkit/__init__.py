from .build import (
    EmptyInput,
    KnowledgeGraph,
    MAX_NODES,
    META_PATHS,
    Node,
    NodeKind,
    build_graph,
    graph_from_records,
    truncate_and_order,
)
from .features import (
    MAX_ATTR_LEN,
    address_hex,
    codes_hex,
    encode_attribute,
    encode_features,
)
from .snapshot import graph_snapshot, write_snapshots

__all__ = [
    "EmptyInput",
    "KnowledgeGraph",
    "MAX_ATTR_LEN",
    "MAX_NODES",
    "META_PATHS",
    "Node",
    "NodeKind",
    "build_graph",
    "graph_from_records",
    "truncate_and_order",
    "address_hex",
    "codes_hex",
    "encode_attribute",
    "encode_features",
    "graph_snapshot",
    "write_snapshots",
]
