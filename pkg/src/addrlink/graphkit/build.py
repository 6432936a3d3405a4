"""Per-address heterogeneous knowledge graphs from session records.

One graph describes everything a wiretap window revealed about a single
IPv6 client address: the client node, one node per contacted server, and
fingerprint nodes for the observed handshake fields plus the two derived
statistics (first-connection date and per-server flow count). Three
meta-path neighborhoods expose the graph's semantics: servers around the
client (SCS), client fingerprints around the client (FCF), and each
server's fingerprints around that server (FSF).

Node order is canonical so graph construction is a pure function of record
content: client first, client fingerprints by subtype, then servers by
descending flow count, each followed by its own fingerprints. Graphs are
capped at 50 nodes; the cap evicts the lowest-traffic servers first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..ingest.records import SessionRecord, WiretapWindow
from .features import address_hex, codes_hex, encode_features

MAX_NODES = 50
META_PATHS = ("FCF", "FSF", "SCS")

SECONDS_PER_DAY = 86400


class EmptyInput(ValueError):
    """build_graph was given no records."""


class NodeKind(str, Enum):
    CLIENT = "client"
    SERVER = "server"
    CLIENT_FP = "client_fp"
    SERVER_FP = "server_fp"


@dataclass(frozen=True)
class Node:
    kind: NodeKind
    subtype: str | None  # "F1".."F13" for fingerprints, None for C/S
    attribute: str


@dataclass
class KnowledgeGraph:
    address: str
    nodes: list[Node]
    adjacency: np.ndarray
    metapath_neighbors: dict[str, list[list[int]]]
    real_node_count: int
    features: np.ndarray | None = None


def _subtype_index(subtype: str) -> int:
    return int(subtype[1:])


# Client fingerprint fields: subtype -> (record field, renderer).
_CLIENT_FP_FIELDS = {
    "F1": ("record_version", lambda v: codes_hex([v])),
    "F2": ("client_version", lambda v: codes_hex([v])),
    "F3": ("cipher_suites", lambda v: codes_hex(v)),
    "F4": ("compression", lambda v: codes_hex(v, digits=2)),
}

# Per-record server fingerprint fields (F12/F13 are derived per server).
_SERVER_FP_FIELDS = {
    "F5": ("sni", str),
    "F6": ("server_record_version", lambda v: codes_hex([v])),
    "F7": ("server_version", lambda v: codes_hex([v])),
    "F8": ("chosen_cipher", lambda v: codes_hex([v])),
    "F9": ("cert_algorithm_id", str),
    "F10": ("issuer", str),
    "F11": ("subject", str),
}


def build_graph(records: list[SessionRecord], window: WiretapWindow) -> KnowledgeGraph:
    """Construct the knowledge graph of one client address.

    All records must share the client address and lie inside the window.
    The result is untruncated: node count may exceed the 50-node cap until
    :func:`truncate_and_order` is applied.
    """
    if not records:
        raise EmptyInput("no session records for this client address")
    client = records[0].client_addr
    if client is None:
        raise ValueError("records must carry a client address")
    for record in records:
        if record.client_addr != client:
            raise ValueError("all records must share one client address")
        if record.server_addr is None:
            raise ValueError("records must carry a server address")
        if not window.contains(record.timestamp):
            raise ValueError(f"record timestamp {record.timestamp} outside window")

    # Client fingerprints are deduplicated graph-wide by (subtype, value).
    client_fps: set[tuple[str, str]] = set()
    # Server fingerprints are deduplicated per server.
    server_fps: dict[str, set[tuple[str, str]]] = {}
    server_records: dict[str, list[SessionRecord]] = {}

    for record in records:
        for subtype, (fname, render) in _CLIENT_FP_FIELDS.items():
            value = getattr(record, fname)
            if value is not None:
                client_fps.add((subtype, render(value)))
        server = record.server_addr
        server_records.setdefault(server, []).append(record)
        fps = server_fps.setdefault(server, set())
        for subtype, (fname, render) in _SERVER_FP_FIELDS.items():
            value = getattr(record, fname)
            if value is not None:
                fps.add((subtype, render(value)))

    for server, recs in server_records.items():
        first_day = min(r.timestamp for r in recs) // SECONDS_PER_DAY
        server_fps[server].add(("F12", str(first_day)))
        server_fps[server].add(("F13", str(len(recs))))

    # Canonical order: client, client fingerprints, servers by descending
    # flow count (address hex breaks ties), each followed by its fingerprints.
    nodes = [Node(NodeKind.CLIENT, None, address_hex(client))]
    client_fp_indices = []
    for subtype, attr in sorted(client_fps, key=lambda t: (_subtype_index(t[0]), t[1])):
        client_fp_indices.append(len(nodes))
        nodes.append(Node(NodeKind.CLIENT_FP, subtype, attr))

    server_order = sorted(
        server_records, key=lambda s: (-len(server_records[s]), address_hex(s))
    )
    server_indices = []
    fsf_members: dict[int, list[int]] = {}
    for server in server_order:
        s_idx = len(nodes)
        server_indices.append(s_idx)
        nodes.append(Node(NodeKind.SERVER, None, address_hex(server)))
        members = []
        for subtype, attr in sorted(
            server_fps[server], key=lambda t: (_subtype_index(t[0]), t[1])
        ):
            members.append(len(nodes))
            nodes.append(Node(NodeKind.SERVER_FP, subtype, attr))
        fsf_members[s_idx] = members

    n = len(nodes)
    adjacency = np.zeros((n, n), dtype=np.uint8)
    np.fill_diagonal(adjacency, 1)
    for idx in server_indices + client_fp_indices:
        adjacency[0, idx] = adjacency[idx, 0] = 1
    for s_idx, members in fsf_members.items():
        for m in members:
            adjacency[s_idx, m] = adjacency[m, s_idx] = 1

    # Meta-path neighbor sets, each including the node itself. Nodes that do
    # not anchor a meta-path fall back to the self-only set.
    scs = [[u] for u in range(n)]
    fcf = [[u] for u in range(n)]
    fsf = [[u] for u in range(n)]
    scs[0] = sorted([0] + server_indices)
    fcf[0] = sorted([0] + client_fp_indices)
    for s_idx, members in fsf_members.items():
        fsf[s_idx] = sorted([s_idx] + members)

    return KnowledgeGraph(
        address=client,
        nodes=nodes,
        adjacency=adjacency,
        metapath_neighbors={"FCF": fcf, "FSF": fsf, "SCS": scs},
        real_node_count=n,
    )


def truncate_and_order(graph: KnowledgeGraph) -> KnowledgeGraph:
    """Apply the 50-node cap and pad the adjacency to the fixed index space.

    Expects the canonical node order produced by :func:`build_graph`; nodes
    beyond the cap are dropped (suffix-wise, so a kept fingerprint always
    keeps its server) and the padded rows/columns stay zero.
    """
    keep = min(graph.real_node_count, MAX_NODES)
    nodes = graph.nodes[:keep]
    adjacency = np.zeros((MAX_NODES, MAX_NODES), dtype=np.uint8)
    adjacency[:keep, :keep] = graph.adjacency[:keep, :keep]
    neighbors = {
        path: [[v for v in graph.metapath_neighbors[path][u] if v < keep]
               for u in range(keep)]
        for path in META_PATHS
    }
    return KnowledgeGraph(
        address=graph.address,
        nodes=nodes,
        adjacency=adjacency,
        metapath_neighbors=neighbors,
        real_node_count=keep,
        features=None,
    )


def graph_from_records(records: list[SessionRecord], window: WiretapWindow) -> KnowledgeGraph:
    """Build, truncate, and encode a graph in one step."""
    graph = truncate_and_order(build_graph(records, window))
    encode_features(graph)
    return graph
