"""Line-delimited session log: the interchange format of the toolkit.

One JSON object per line, UTF-8, fields named exactly as
:class:`~addrlink.ingest.records.SessionRecord`. Addresses are RFC 5952
lowercase text, code lists are arrays of integers, timestamps are integer
epoch seconds, and absent fields are omitted entirely. The generator writes
this format, and the graph builder consumes it.

I/O failures surface as the built-in ``OSError``; schema violations as
:class:`SchemaError` carrying the 1-based line number.
"""

from __future__ import annotations

import ipaddress
import json
from pathlib import Path
from typing import Any, Iterable

from .records import SessionRecord, WiretapWindow


class SchemaError(ValueError):
    """A session-log line violates the interchange schema."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


_REQUIRED = ("client_addr", "server_addr", "timestamp", "flow_packet_count")
_CODE_FIELDS = ("record_version", "client_version", "server_record_version",
                "server_version", "chosen_cipher")
_CODE_LIST_FIELDS = ("cipher_suites", "compression")
_STRING_FIELDS = ("sni", "cert_algorithm_id", "issuer", "subject")
_ALL_FIELDS = set(_REQUIRED) | set(_CODE_FIELDS) | set(_CODE_LIST_FIELDS) | set(_STRING_FIELDS)


def _canonical_addr(value: Any, field: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"{field} must be an IPv6 address string")
    try:
        return ipaddress.IPv6Address(value).compressed
    except (ipaddress.AddressValueError, ValueError) as exc:
        raise SchemaError(f"{field} is not a valid IPv6 address: {exc}")


def _check_code(value: Any, field: str, width: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{field} must be an integer code")
    if not 0 <= value < (1 << width):
        raise SchemaError(f"{field} out of range for a {width}-bit code")
    return value


def record_from_dict(obj: Any) -> SessionRecord:
    """Validate one parsed JSON object and build a SessionRecord."""
    if not isinstance(obj, dict):
        raise SchemaError("record must be a JSON object")
    unknown = set(obj) - _ALL_FIELDS
    if unknown:
        raise SchemaError(f"unknown fields: {sorted(unknown)}")
    for field in _REQUIRED:
        if field not in obj:
            raise SchemaError(f"missing required field {field}")

    client = _canonical_addr(obj["client_addr"], "client_addr")
    server = _canonical_addr(obj["server_addr"], "server_addr")
    if client == server:
        raise SchemaError("client_addr equals server_addr")

    timestamp = obj["timestamp"]
    if isinstance(timestamp, bool) or not isinstance(timestamp, int) or timestamp < 0:
        raise SchemaError("timestamp must be a non-negative integer")
    packets = obj["flow_packet_count"]
    if isinstance(packets, bool) or not isinstance(packets, int) or packets < 0:
        raise SchemaError("flow_packet_count must be a non-negative integer")

    values: dict[str, Any] = {
        "client_addr": client,
        "server_addr": server,
        "timestamp": timestamp,
        "flow_packet_count": packets,
    }
    for field in _CODE_FIELDS:
        if field in obj:
            width = 16
            values[field] = _check_code(obj[field], field, width)
    for field in _CODE_LIST_FIELDS:
        if field in obj:
            raw = obj[field]
            if not isinstance(raw, list) or not raw:
                raise SchemaError(f"{field} must be a non-empty array of integers")
            width = 16 if field == "cipher_suites" else 8
            values[field] = tuple(_check_code(v, field, width) for v in raw)
    for field in _STRING_FIELDS:
        if field in obj:
            if not isinstance(obj[field], str) or not obj[field]:
                raise SchemaError(f"{field} must be a non-empty string")
            values[field] = obj[field]

    try:
        return SessionRecord(**values)
    except ValueError as exc:
        raise SchemaError(str(exc))


def record_to_dict(record: SessionRecord) -> dict[str, Any]:
    """Serialize a record to the interchange schema (absent fields omitted)."""
    if record.client_addr is None or record.server_addr is None:
        raise ValueError("cannot serialize a record without both addresses")
    out: dict[str, Any] = {
        "client_addr": ipaddress.IPv6Address(record.client_addr).compressed,
        "server_addr": ipaddress.IPv6Address(record.server_addr).compressed,
        "timestamp": record.timestamp,
        "flow_packet_count": record.flow_packet_count,
    }
    for field in _CODE_FIELDS + _STRING_FIELDS:
        value = getattr(record, field)
        if value is not None:
            out[field] = value
    for field in _CODE_LIST_FIELDS:
        value = getattr(record, field)
        if value is not None:
            out[field] = list(value)
    return out


def load_session_log(path: str | Path, window: WiretapWindow) -> list[SessionRecord]:
    """Load records whose timestamp falls inside the wiretap window.

    Returns records sorted by timestamp (stable for ties). Blank lines are
    ignored; any other malformed line raises SchemaError with its number.
    """
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc}", line=lineno)
            try:
                record = record_from_dict(obj)
            except SchemaError as exc:
                raise SchemaError(str(exc), line=lineno)
            if window.contains(record.timestamp):
                records.append(record)
    records.sort(key=lambda r: r.timestamp)
    return records


def write_session_log(path: str | Path, records: Iterable[SessionRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record), sort_keys=False))
            fh.write("\n")
