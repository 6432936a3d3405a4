"""Canonical session records extracted from TLS handshakes.

A :class:`SessionRecord` holds the metadata of one observed TLS connection.
The client-side fields come from the ClientHello, the server-side fields
from the ServerHello and Certificate messages; any of them may be absent
when the capture missed the corresponding message. Absence is always
``None``, never an empty string or list, because absent fields must not
produce graph nodes downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class SessionRecord:
    """Metadata of one TLS connection between a client and a server.

    Addresses are RFC 5952 lowercase text. Protocol codes are integers
    (16-bit for versions and cipher suites, 8-bit for compression methods).
    ``timestamp`` is UTC epoch seconds; ``flow_packet_count`` is the number
    of packets seen in the connection's flow.
    """

    client_addr: str | None = None
    server_addr: str | None = None
    record_version: int | None = None
    client_version: int | None = None
    cipher_suites: tuple[int, ...] | None = None
    compression: tuple[int, ...] | None = None
    sni: str | None = None
    server_record_version: int | None = None
    server_version: int | None = None
    chosen_cipher: int | None = None
    cert_algorithm_id: str | None = None
    issuer: str | None = None
    subject: str | None = None
    timestamp: int = 0
    flow_packet_count: int = 0

    def __post_init__(self):
        if self.client_addr is not None and self.client_addr == self.server_addr:
            raise ValueError("client_addr must differ from server_addr")
        if self.cipher_suites is not None and len(self.cipher_suites) == 0:
            raise ValueError("cipher_suites must be non-empty when present")
        if self.flow_packet_count < 0:
            raise ValueError("flow_packet_count must be non-negative")


@dataclass(frozen=True)
class WiretapWindow:
    """Observation interval bounding which sessions feed a knowledge graph."""

    start: int
    duration: int

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("window duration must be positive")

    @property
    def end(self) -> int:
        return self.start + self.duration

    def contains(self, timestamp: int) -> bool:
        return self.start <= timestamp < self.end


def merge_session_parts(base: SessionRecord, *parts: SessionRecord) -> SessionRecord:
    """Combine partial records from individual handshake messages.

    Later parts win only where they carry a value; ``None`` never overwrites
    an observed field.
    """
    merged = base
    for part in parts:
        updates = {
            f.name: getattr(part, f.name)
            for f in fields(part)
            if f.name not in ("timestamp", "flow_packet_count")
            and getattr(part, f.name) is not None
        }
        if updates:
            merged = replace(merged, **updates)
    return merged
