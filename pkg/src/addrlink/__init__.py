"""addrlink: correlate IPv6 client addresses from TLS session metadata.

The pipeline is: parse or generate TLS session records (``ingest``,
``synthgen``), build one heterogeneous knowledge graph per client address
(``graphkit``), train a siamese multi-level attention encoder that maps a
graph to an embedding whose Euclidean distance measures address relatedness
(``model``), and run pairwise correlation, user tracking, and user discovery
on the embeddings (``tasks``). ``cli`` wires the pieces together.
"""

__version__ = "0.1.0"
