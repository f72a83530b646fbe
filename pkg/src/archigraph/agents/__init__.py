"""Single point of contact with language/vision models: prompt bundles,
transports (live HTTP and deterministic mock), response parsing, and
per-role output validation."""

from .roles import AgentRole, AgentHandle, PromptBundle, load_bundle
from .transport import (
    AgentUnavailableError,
    AuthMissingError,
    HttpTransport,
    MockTransport,
    TransportError,
    chat_complete,
    request_digest,
)
from .gateway import (
    JsonParseError,
    NoJsonFoundError,
    SchemaViolationError,
    defect_counts_from_payload,
    extract_json_payload,
    filter_candidate_images,
    legibility_counts_from_payload,
    make_reroute_agent,
    run_agent,
)

__all__ = [
    "AgentRole",
    "AgentHandle",
    "PromptBundle",
    "load_bundle",
    "AgentUnavailableError",
    "AuthMissingError",
    "HttpTransport",
    "MockTransport",
    "TransportError",
    "chat_complete",
    "request_digest",
    "JsonParseError",
    "NoJsonFoundError",
    "SchemaViolationError",
    "defect_counts_from_payload",
    "extract_json_payload",
    "filter_candidate_images",
    "legibility_counts_from_payload",
    "make_reroute_agent",
    "run_agent",
]
