"""Chat-completion clients for the pair-mining prompts.

Two interchangeable clients: an HTTP client for any chat-completion-compatible
endpoint, and a replay client backed by recorded fixtures so every experiment
in the test suite runs offline. Each prompt is its own conversation; nothing
carries over between requests.

Fixture lookups key on the SHA-256 of the exact prompt text, which also makes
accidental prompt drift loud: a reworded prompt simply has no fixture.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol, Sequence

import requests

from .errors import ExternalServiceError, ParseError

logger = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.0
DEFAULT_TIMEOUT = 60.0
DEFAULT_MAX_IN_FLIGHT = 4


def prompt_sha256(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class ChatClient(Protocol):
    def complete(self, prompt: str) -> str: ...


class FixtureClient:
    """Replays recorded responses keyed by prompt hash."""

    def __init__(self, responses: Mapping[str, str]):
        self.responses = dict(responses)

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureClient":
        """Load a fixture file: JSON array of {prompt_sha256, response_text}."""
        path = Path(path)
        try:
            entries = json.loads(path.read_text(encoding="utf-8"))
            if not isinstance(entries, list):
                raise TypeError("expected a JSON array of fixture entries")
            responses = {e["prompt_sha256"]: e["response_text"] for e in entries}
        except (json.JSONDecodeError, TypeError, KeyError) as exc:
            raise ParseError(f"{path}: not a response fixture file ({exc})") from exc
        return cls(responses)

    def complete(self, prompt: str) -> str:
        digest = prompt_sha256(prompt)
        if digest not in self.responses:
            raise ExternalServiceError(f"no recorded response for prompt {digest}")
        return self.responses[digest]


class HttpChatClient:
    """Minimal client for a chat-completion endpoint (one user message per call)."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str | None = None,
        temperature: float = DEFAULT_TEMPERATURE,
        timeout: float = DEFAULT_TIMEOUT,
        max_retries: int = 2,
        session: requests.Session | None = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key
        self.temperature = temperature
        self.timeout = timeout
        self.max_retries = max_retries
        self.session = session or requests.Session()

    def complete(self, prompt: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(0.5 * attempt)
            try:
                response = self.session.post(
                    self.endpoint, json=body, headers=headers, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = exc
                logger.warning("chat request failed (attempt %d): %s", attempt + 1, exc)
                continue
            if response.status_code >= 500:
                last_error = ExternalServiceError(f"server error {response.status_code}")
                logger.warning("chat endpoint returned %d (attempt %d)", response.status_code, attempt + 1)
                continue
            if response.status_code != 200:
                raise ExternalServiceError(
                    f"chat endpoint returned {response.status_code}: {response.text[:200]}"
                )
            try:
                payload = response.json()
                return payload["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise ExternalServiceError(f"malformed chat response: {exc}") from exc
        raise ExternalServiceError(f"chat endpoint unreachable after retries: {last_error}")


@dataclass
class TranscriptRecorder:
    """Wraps a client, recording (hash, prompt, response) triples in call order.

    Transcripts carry no timestamps so reruns stay byte-identical.
    """

    client: ChatClient
    entries: list[dict[str, str]] = field(default_factory=list)

    def complete(self, prompt: str) -> str:
        response = self.client.complete(prompt)
        self.entries.append(
            {
                "prompt_sha256": prompt_sha256(prompt),
                "prompt": prompt,
                "response_text": response,
            }
        )
        return response

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.entries, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def run_prompts(
    client: ChatClient, prompts: Sequence[str], max_in_flight: int = DEFAULT_MAX_IN_FLIGHT
) -> list[str | None]:
    """Dispatch independent prompts with bounded concurrency, preserving order.

    A failed prompt yields None in its slot with a warning; callers decide
    whether partial results are acceptable.
    """
    if max_in_flight < 1:
        raise ValueError("max_in_flight must be at least 1")

    def call(index_prompt: tuple[int, str]) -> str | None:
        index, prompt = index_prompt
        try:
            return client.complete(prompt)
        except ExternalServiceError as exc:
            logger.warning("prompt %d failed: %s", index, exc)
            return None

    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        return list(pool.map(call, enumerate(prompts)))
