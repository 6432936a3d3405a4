from .records import (
    SessionRecord,
    WiretapWindow,
    merge_session_parts,
)
from .tls import (
    EmptyChain,
    MalformedRecord,
    NotClientHello,
    NotServerHello,
    parse_certificate,
    parse_client_hello,
    parse_server_hello,
)
from .log import (
    SchemaError,
    load_session_log,
    record_from_dict,
    record_to_dict,
    write_session_log,
)

__all__ = [
    "SessionRecord",
    "WiretapWindow",
    "merge_session_parts",
    "MalformedRecord",
    "NotClientHello",
    "NotServerHello",
    "EmptyChain",
    "parse_client_hello",
    "parse_server_hello",
    "parse_certificate",
    "SchemaError",
    "load_session_log",
    "write_session_log",
    "record_to_dict",
    "record_from_dict",
]
