"""Parsers for the TLS handshake messages that carry fingerprintable fields.

Extracts ClientHello, ServerHello, and Certificate metadata from a raw TLS
record (RFC 5246 framing). Each parser consumes exactly one record, never
reads past the declared record length, and reports inconsistent length
fields as :class:`MalformedRecord` instead of raising low-level errors.
Only the leaf certificate of a chain is read; its DER body is decoded with
the ``cryptography`` package.

TLS 1.3 encrypted extensions are out of scope: the handshake fields used
here are the plaintext ones common to TLS 1.0-1.3 ClientHello/ServerHello
and the TLS <= 1.2 Certificate message.
"""

from __future__ import annotations

from cryptography import x509

from .records import SessionRecord

CONTENT_TYPE_HANDSHAKE = 22
HANDSHAKE_CLIENT_HELLO = 1
HANDSHAKE_SERVER_HELLO = 2
HANDSHAKE_CERTIFICATE = 11
EXTENSION_SERVER_NAME = 0
SNI_HOST_NAME = 0


class MalformedRecord(ValueError):
    """Record or handshake framing is inconsistent with its length fields."""


class NotClientHello(ValueError):
    """The handshake message is not a ClientHello."""


class NotServerHello(ValueError):
    """The handshake message is not a ServerHello."""


class EmptyChain(ValueError):
    """The Certificate message carries no certificates."""


class _Reader:
    """Bounded big-endian cursor; any out-of-range read is MalformedRecord."""

    __slots__ = ("data", "pos", "end")

    def __init__(self, data: bytes, start: int = 0, end: int | None = None):
        self.data = data
        self.pos = start
        self.end = len(data) if end is None else end

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > self.end:
            raise MalformedRecord("length field exceeds available bytes")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        b = self.take(2)
        return (b[0] << 8) | b[1]

    def u24(self) -> int:
        b = self.take(3)
        return (b[0] << 16) | (b[1] << 8) | b[2]

    def remaining(self) -> int:
        return self.end - self.pos


def _handshake_body(data: bytes, expected_type: int, wrong_type_error) -> tuple[int, _Reader]:
    """Validate record + handshake framing, return (record_version, body reader)."""
    r = _Reader(data)
    content_type = r.u8()
    if content_type != CONTENT_TYPE_HANDSHAKE:
        raise MalformedRecord(f"content type {content_type} is not a handshake record")
    record_version = r.u16()
    record_len = r.u16()
    if record_len > r.remaining():
        raise MalformedRecord("record length exceeds provided bytes")
    # All subsequent reads are confined to the declared record payload.
    payload = _Reader(data, r.pos, r.pos + record_len)
    msg_type = payload.u8()
    if msg_type != expected_type:
        raise wrong_type_error(f"handshake type {msg_type}, expected {expected_type}")
    body_len = payload.u24()
    if body_len > payload.remaining():
        raise MalformedRecord("handshake length exceeds record payload")
    return record_version, _Reader(data, payload.pos, payload.pos + body_len)


def _iter_extensions(body: _Reader):
    """Yield (type, data reader) for each extension; absent block is fine."""
    if body.remaining() == 0:
        return
    total = body.u16()
    if total > body.remaining():
        raise MalformedRecord("extensions length exceeds handshake body")
    block = _Reader(body.data, body.pos, body.pos + total)
    while block.remaining() > 0:
        ext_type = block.u16()
        ext_len = block.u16()
        start = block.pos
        block.take(ext_len)
        yield ext_type, _Reader(block.data, start, start + ext_len)


def _parse_sni(ext: _Reader) -> str | None:
    list_len = ext.u16()
    if list_len > ext.remaining():
        raise MalformedRecord("server_name list length exceeds extension")
    entries = _Reader(ext.data, ext.pos, ext.pos + list_len)
    while entries.remaining() > 0:
        name_type = entries.u8()
        name_len = entries.u16()
        name = entries.take(name_len)
        if name_type == SNI_HOST_NAME:
            try:
                return name.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise MalformedRecord("server_name is not valid UTF-8") from exc
    return None


def parse_client_hello(data: bytes) -> SessionRecord:
    """Parse a ClientHello record into a partial :class:`SessionRecord`.

    Populates record_version, client_version, cipher_suites, compression,
    and sni (when the server_name extension is present). Unknown extensions
    are skipped.

    Raises:
        MalformedRecord: framing or length fields are inconsistent.
        NotClientHello: the handshake message has a different type.
    """
    record_version, body = _handshake_body(data, HANDSHAKE_CLIENT_HELLO, NotClientHello)
    client_version = body.u16()
    body.take(32)  # client random
    body.take(body.u8())  # legacy session id
    suites_len = body.u16()
    if suites_len == 0 or suites_len % 2 != 0:
        raise MalformedRecord("cipher suite list length must be a positive multiple of 2")
    suites_bytes = body.take(suites_len)
    suites = tuple(
        (suites_bytes[i] << 8) | suites_bytes[i + 1] for i in range(0, suites_len, 2)
    )
    comp_len = body.u8()
    if comp_len == 0:
        raise MalformedRecord("compression method list must be non-empty")
    compression = tuple(body.take(comp_len))

    sni = None
    for ext_type, ext in _iter_extensions(body):
        if ext_type == EXTENSION_SERVER_NAME and sni is None:
            sni = _parse_sni(ext)

    return SessionRecord(
        record_version=record_version,
        client_version=client_version,
        cipher_suites=suites,
        compression=compression,
        sni=sni,
    )


def parse_server_hello(data: bytes) -> SessionRecord:
    """Parse a ServerHello record into a partial :class:`SessionRecord`.

    Populates server_record_version, server_version, and the single
    chosen_cipher.

    Raises:
        MalformedRecord: framing or length fields are inconsistent.
        NotServerHello: the handshake message has a different type.
    """
    record_version, body = _handshake_body(data, HANDSHAKE_SERVER_HELLO, NotServerHello)
    server_version = body.u16()
    body.take(32)  # server random
    body.take(body.u8())  # legacy session id
    chosen_cipher = body.u16()
    body.u8()  # chosen compression method
    for _ in _iter_extensions(body):
        pass  # validated for framing, otherwise ignored

    return SessionRecord(
        server_record_version=record_version,
        server_version=server_version,
        chosen_cipher=chosen_cipher,
    )


def _render_dn(name: x509.Name) -> str:
    """Render a distinguished name as "ATTR=value" pairs in certificate order."""
    parts = []
    for rdn in name.rdns:
        for attr in rdn:
            value = attr.value
            if isinstance(value, bytes):
                value = value.hex()
            parts.append(f"{attr.rfc4514_attribute_name}={value}")
    return ", ".join(parts)


def parse_certificate(data: bytes) -> SessionRecord:
    """Parse a Certificate record into a partial :class:`SessionRecord`.

    Reads the leaf (first) certificate of the chain and populates
    cert_algorithm_id (signature algorithm OID), issuer, and subject.

    Raises:
        MalformedRecord: framing, length fields, or leaf DER are invalid.
        EmptyChain: the certificate list is empty.
    """
    _, body = _handshake_body(data, HANDSHAKE_CERTIFICATE, MalformedRecord)
    chain_len = body.u24()
    if chain_len > body.remaining():
        raise MalformedRecord("certificate list length exceeds handshake body")
    if chain_len == 0:
        raise EmptyChain("certificate list is empty")
    chain = _Reader(body.data, body.pos, body.pos + chain_len)
    leaf_len = chain.u24()
    if leaf_len == 0:
        raise EmptyChain("leaf certificate is empty")
    leaf_der = chain.take(leaf_len)
    # Remaining chain entries are intentionally not read: only the leaf
    # contributes node attributes.
    try:
        cert = x509.load_der_x509_certificate(bytes(leaf_der))
        algorithm = cert.signature_algorithm_oid.dotted_string
        issuer = _render_dn(cert.issuer)
        subject = _render_dn(cert.subject)
    except MalformedRecord:
        raise
    except Exception as exc:
        raise MalformedRecord(f"leaf certificate DER is invalid: {exc}") from exc

    return SessionRecord(
        cert_algorithm_id=algorithm,
        issuer=issuer,
        subject=subject,
    )
