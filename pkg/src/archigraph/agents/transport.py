"""Wire transports for chat-completion requests and the retry wrapper.

The live transport POSTs a chat-completions body ``{model, messages,
temperature}`` with a bearer credential read from an environment variable.
The mock transport resolves a digest of the request against a canned map
and is bit-reproducible across runs and machines.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time

import httpx

logger = logging.getLogger("archigraph.agents")


class TransportError(RuntimeError):
    """A single request attempt failed (connection, HTTP error, bad body)."""


class AgentUnavailableError(RuntimeError):
    """All retries exhausted (or no canned response for a mock request)."""

    code = "AGENT_UNAVAILABLE"


class AuthMissingError(RuntimeError):
    """Live transport configured but the credential env var is unset."""

    code = "AUTH_MISSING"


def request_digest(model: str, messages: list[dict]) -> str:
    """Stable key for a request: sha256 over model and message contents.

    Temperature is deliberately excluded so canned fixtures survive
    temperature tweaks.
    """
    canon = json.dumps(
        [model, [[m.get("role", ""), m.get("content", "")] for m in messages]],
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


class MockTransport:
    """Canned transport: JSON map from request digest to response text."""

    kind = "mock"

    def __init__(self, responses: dict[str, str]):
        self.responses = dict(responses)
        self.calls = 0

    @classmethod
    def from_file(cls, path) -> "MockTransport":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def send(self, request: dict) -> str:
        self.calls += 1
        digest = request_digest(request["model"], request["messages"])
        try:
            return self.responses[digest]
        except KeyError:
            raise AgentUnavailableError(
                f"no canned response for request digest {digest}"
            ) from None


class HttpTransport:
    """Live chat-completions transport.

    The credential is read from ``api_key_env`` at request time; a missing
    credential fails before any network activity.
    """

    kind = "live"

    def __init__(self, endpoint: str, api_key_env: str = "", timeout: float = 120.0):
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self.timeout = timeout

    def send(self, request: dict) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key_env:
            key = os.environ.get(self.api_key_env)
            if not key:
                raise AuthMissingError(
                    f"credential env var {self.api_key_env!r} is not set"
                )
            headers["Authorization"] = f"Bearer {key}"
        try:
            resp = httpx.post(
                self.endpoint, json=request, headers=headers, timeout=self.timeout
            )
            resp.raise_for_status()
            payload = resp.json()
            return payload["choices"][0]["message"]["content"]
        except AuthMissingError:
            raise
        except Exception as exc:
            raise TransportError(str(exc)) from exc


def chat_complete(handle, messages: list[dict]) -> str:
    """Send one chat request through the handle's transport with retries.

    Retries up to ``max_retries`` times on TransportError with exponential
    backoff; requests and responses are logged with credentials redacted
    (credentials never enter the logged body).
    """
    request = {
        "model": handle.model,
        "messages": messages,
        "temperature": handle.temperature,
    }
    attempts = handle.max_retries if handle.max_retries > 0 else 1
    last_error: Exception | None = None
    for attempt in range(attempts):
        try:
            logger.debug(
                "agent=%s attempt=%d digest=%s",
                handle.role.value,
                attempt + 1,
                request_digest(handle.model, messages),
            )
            reply = handle.transport.send(request)
            logger.debug("agent=%s reply_chars=%d", handle.role.value, len(reply))
            return reply
        except (AuthMissingError, AgentUnavailableError):
            raise
        except TransportError as exc:
            last_error = exc
            logger.warning(
                "agent=%s attempt=%d failed: %s", handle.role.value, attempt + 1, exc
            )
            if attempt + 1 < attempts:
                time.sleep(handle.retry_delay * (2**attempt))
    raise AgentUnavailableError(
        f"{handle.role.value} failed after {attempts} attempts: {last_error}"
    )
