"""Uniform generation contract over interchangeable backends.

The remote backend talks to a model server; the gold-echo and empty mocks
close the pipeline loop for oracle testing without any model at all.
Decoding is greedy best-sequence by default; anything fancier is an opaque
backend parameter.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

import requests

from kgqa.compose import ComposedInput
from kgqa.errors import BackendUnavailable, GenerationTimeout
from kgqa.sparql import CanonicalQuery

DEFAULT_MAX_OUTPUT_TOKENS = 256


@dataclass(frozen=True)
class GenerationRequest:
    input: ComposedInput
    max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS
    backend_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class GenerationResult:
    canonical: CanonicalQuery
    latency_ms: float
    backend: str


class GeneratorBackend:
    name = "backend"

    def healthy(self) -> bool:
        return True

    def generate_text(self, text: str, max_new_tokens: int, params: dict) -> str:
        raise NotImplementedError


class ConstantBackend(GeneratorBackend):
    """Always returns the same text; the empty mock is the '' case."""

    def __init__(self, text: str, name: str = "constant"):
        self._text = text
        self.name = name

    def generate_text(self, text: str, max_new_tokens: int, params: dict) -> str:
        return self._text


class EmptyBackend(ConstantBackend):
    """Abstains on every request."""

    def __init__(self):
        super().__init__("", name="empty")


class GoldEchoBackend(GeneratorBackend):
    """Maps a question id (passed via backend_params) to its encoded gold
    target; the oracle closure for end-to-end tests."""

    name = "gold-echo"

    def __init__(self, targets: dict):
        self._targets = dict(targets)

    def generate_text(self, text: str, max_new_tokens: int, params: dict) -> str:
        qid = params.get("question_id")
        return self._targets.get(qid, "")


class RemoteBackend(GeneratorBackend):
    """Client for the model-server wire protocol.

    POST /generate {"input":..., "max_new_tokens":..., "params":...}
    -> {"output":...}; GET /health -> 200.
    """

    def __init__(self, base_url: str, timeout_s: float = 60.0, max_in_flight: int = 4):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self.name = f"remote:{self.base_url}"
        self._gate = threading.Semaphore(max_in_flight)
        self._session = requests.Session()

    def healthy(self) -> bool:
        try:
            response = self._session.get(
                self.base_url + "/health", timeout=self.timeout_s
            )
        except requests.RequestException:
            return False
        return response.status_code == 200

    def generate_text(self, text: str, max_new_tokens: int, params: dict) -> str:
        payload = {"input": text, "max_new_tokens": max_new_tokens, "params": params}
        with self._gate:
            try:
                response = self._session.post(
                    self.base_url + "/generate", json=payload, timeout=self.timeout_s
                )
            except requests.Timeout as exc:
                raise GenerationTimeout(str(exc)) from exc
            except requests.RequestException as exc:
                raise BackendUnavailable(str(exc)) from exc
        if response.status_code != 200:
            raise BackendUnavailable(f"model server returned {response.status_code}")
        try:
            return response.json()["output"]
        except (ValueError, KeyError) as exc:
            raise BackendUnavailable(f"bad generate payload: {exc}") from exc


def generate(request: GenerationRequest, backend: GeneratorBackend) -> GenerationResult:
    """Run one request; reports the backend's single best output."""
    started = time.perf_counter()
    text = backend.generate_text(
        request.input.text, request.max_output_tokens, request.backend_params
    )
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    canonical = CanonicalQuery(text=text if text is not None else "",
                               provenance="MODEL_OUTPUT")
    return GenerationResult(canonical=canonical, latency_ms=elapsed_ms,
                            backend=backend.name)
