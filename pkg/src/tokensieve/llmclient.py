"""Minimal chat-completion client: one HTTP backend, one deterministic mock.

The request/response schema is deliberately tiny (system, user, two sampling
params in; text out).  Token accounting always uses the package tokenizer so
counts are deterministic and backend-independent.  The HTTP backend retries
timeouts only, with exponential backoff; every error carries the request id.
"""

from __future__ import annotations

import json
import os
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

from .core.spans import OptimizedContext
from .core.tokenizer import count_tokens
from .core.assemble import ControlPrompt, Query
from .errors import EmptyContext, HttpError, ParseError, Timeout
from .selection import render_optimized

ENDPOINT_ENV = "LLM_ENDPOINT"
TIMEOUT_ENV = "LLM_TIMEOUT_MS"

DEFAULT_TIMEOUT_MS = 30_000


@dataclass(frozen=True)
class ChatRequest:
    system: str
    user: str
    max_output_tokens: int = 256
    temperature: float = 0.0


@dataclass(frozen=True)
class ChatResponse:
    text: str
    input_token_count: int
    output_token_count: int


class LLMClient(Protocol):
    def complete(self, request: ChatRequest) -> ChatResponse: ...


def _make_response(request: ChatRequest, text: str) -> ChatResponse:
    return ChatResponse(
        text=text,
        input_token_count=count_tokens(request.system) + count_tokens(request.user),
        output_token_count=count_tokens(text),
    )


@dataclass(frozen=True)
class MockRule:
    """First rule whose match_substring occurs in system+user text answers.

    response_text may reference {system} and {user}; an empty match_substring
    matches everything (use as a trailing catch-all)."""

    match_substring: str
    response_text: str


@dataclass
class RuleMockClient:
    """Bit-deterministic mock: identical requests always produce identical responses."""

    rules: Sequence[MockRule] = ()

    def complete(self, request: ChatRequest) -> ChatResponse:
        haystack = request.system + "\n" + request.user
        for rule in self.rules:
            if rule.match_substring in haystack:
                text = rule.response_text.format(system=request.system, user=request.user)
                return _make_response(request, text)
        return _make_response(request, request.user)  # no rule: echo


def load_mock_rules(path: str | Path) -> list[MockRule]:
    """Rules file: JSON list of {match_substring, response_text}."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [MockRule(r["match_substring"], r["response_text"]) for r in data]


@dataclass
class HttpClient:
    """POSTs {system, user, params} as JSON; expects {"text": ...} back.

    Environment overrides: LLM_ENDPOINT replaces the configured endpoint,
    LLM_TIMEOUT_MS the timeout.  Retries (Timeout only): `retries` extra
    attempts with exponential backoff starting at `backoff_s`.
    """

    endpoint: str = ""
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    retries: int = 2
    backoff_s: float = 0.5
    _request_counter: int = field(default=0, repr=False)

    def _resolved_endpoint(self) -> str:
        return os.environ.get(ENDPOINT_ENV, "") or self.endpoint

    def _resolved_timeout_s(self) -> float:
        raw = os.environ.get(TIMEOUT_ENV, "")
        ms = int(raw) if raw else self.timeout_ms
        return ms / 1000.0

    def complete(self, request: ChatRequest) -> ChatResponse:
        self._request_counter += 1
        request_id = self._request_counter
        endpoint = self._resolved_endpoint()
        if not endpoint:
            raise ParseError(request_id, "no endpoint configured (set LLM_ENDPOINT)")
        body = json.dumps(
            {
                "system": request.system,
                "user": request.user,
                "params": {
                    "max_output_tokens": request.max_output_tokens,
                    "temperature": request.temperature,
                },
            }
        ).encode("utf-8")
        attempt = 0
        while True:
            try:
                text = self._post_once(endpoint, body, request_id)
                return _make_response(request, text)
            except Timeout:
                if attempt >= self.retries:
                    raise
                time.sleep(self.backoff_s * (2**attempt))
                attempt += 1

    def _post_once(self, endpoint: str, body: bytes, request_id: int) -> str:
        req = urllib.request.Request(
            endpoint, data=body, headers={"Content-Type": "application/json"}, method="POST"
        )
        try:
            with urllib.request.urlopen(req, timeout=self._resolved_timeout_s()) as resp:
                payload = resp.read()
        except urllib.error.HTTPError as exc:
            raise HttpError(request_id, exc.code) from exc
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, TimeoutError):
                raise Timeout(request_id, "request timed out") from exc
            raise HttpError(request_id, 0, f"connection failed: {exc.reason}") from exc
        except TimeoutError as exc:
            raise Timeout(request_id, "request timed out") from exc
        try:
            parsed = json.loads(payload.decode("utf-8"))
            return str(parsed["text"])
        except (ValueError, KeyError, UnicodeDecodeError) as exc:
            raise ParseError(request_id, f"bad response body: {exc}") from exc


# ---------------------------------------------------------------------------
# downstream answering over an optimized context
# ---------------------------------------------------------------------------

ORIGINAL_INSTRUCTION = "Answer the question using the context below."
OPTIMIZED_INSTRUCTION = (
    "Answer the question using the context below. The context was automatically "
    "reduced to the passages relevant to the question; fragments may be "
    "non-contiguous excerpts of a longer document."
)

_TEMPLATES = {"original": ORIGINAL_INSTRUCTION, "customized": OPTIMIZED_INSTRUCTION}


@dataclass(frozen=True)
class CascadeResult:
    answer: str
    input_token_count: int
    output_token_count: int
    context_token_count: int


def cascade_payload(context_text: str, query_text: str) -> str:
    """The template-independent part of the downstream prompt."""
    return f"Context:\n{context_text}\n\nQuestion: {query_text}\nAnswer:"


def cascade_answer(
    prompt: ControlPrompt,
    query: Query,
    subset: OptimizedContext,
    client: LLMClient,
    template: str = "original",
    allow_empty: bool = False,
    max_output_tokens: int = 256,
) -> CascadeResult:
    """Ask the downstream client to answer the query over the optimized context.

    Templates differ only in the instruction preamble, never in the payload.
    An empty subset raises EmptyContext unless allow_empty is set.
    """
    if template not in _TEMPLATES:
        raise ValueError(f"unknown template {template!r}; options: {sorted(_TEMPLATES)}")
    if subset.is_empty() and not allow_empty:
        raise EmptyContext("refusing to answer over an empty optimized context")
    system = _TEMPLATES[template]
    if template == "customized":
        system += f" The reduction instruction was: {prompt.text!r}"
    rendered = render_optimized(subset)
    request = ChatRequest(
        system=system,
        user=cascade_payload(rendered, query.text),
        max_output_tokens=max_output_tokens,
        temperature=0.0,
    )
    response = client.complete(request)
    return CascadeResult(
        answer=response.text,
        input_token_count=response.input_token_count,
        output_token_count=response.output_token_count,
        context_token_count=subset.token_count,
    )
