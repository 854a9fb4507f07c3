"""SPARQL endpoint execution with in-band failures.

`execute` never raises on query content: every control path yields either
an AnswerSet or a QueryFailure value, which the evaluation layer treats as
an empty answer. Next to the HTTP client there is a recorded fixture store
so whole benchmark runs work offline; public QALD endpoints have a habit
of disappearing.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass

import requests

from kgqa.answers import AnswerSet, normalize_value  # noqa: F401  (re-export)
from kgqa.errors import LexError, MalformedTerm
from kgqa.sparql import PrefixTable, default_prefix_table, normal_form, tokenize, TokKind

log = logging.getLogger(__name__)

FIXTURE_SCHEME = "fixture:"
DEFAULT_USER_AGENT = "kgqa/0.1 (benchmark harness)"
_POLITENESS_LIMIT = 4

_gates_lock = threading.Lock()
_gates: dict[str, threading.Semaphore] = {}


def _gate_for(url: str) -> threading.Semaphore:
    with _gates_lock:
        if url not in _gates:
            _gates[url] = threading.Semaphore(_POLITENESS_LIMIT)
        return _gates[url]


class FailureKind(enum.Enum):
    SYNTAX = "syntax"
    TIMEOUT = "timeout"
    NETWORK = "network"
    ENDPOINT_ERROR = "endpoint_error"


@dataclass(frozen=True)
class QueryFailure:
    kind: FailureKind
    detail: str = ""


@dataclass(frozen=True)
class EndpointConfig:
    url: str
    timeout_s: float = 60.0
    max_retries: int = 2
    user_agent: str = DEFAULT_USER_AGENT

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


def query_key(query: str, table: PrefixTable | None = None) -> str:
    """Stable lookup key: hash of the query's normalized surface form."""
    normalized = normal_form(query, table or default_prefix_table())
    return hashlib.sha256(normalized.encode("utf-8")).hexdigest()


def _is_trivial_ask(query: str) -> bool:
    try:
        tokens = tokenize(query)
    except LexError:
        return False
    texts = [t.text.upper() if t.kind is TokKind.WORD else t.text for t in tokens]
    return texts == ["ASK", "{", "}"] or texts == ["ASK", "WHERE", "{", "}"]


class FixtureStore:
    """Canned query->response map recorded to disk.

    File schema: {"entries": {key: results-JSON body}, "queries": {key:
    normalized query text}} — the queries section is for humans diffing
    recordings.
    """

    def __init__(self, entries=None, queries=None, table: PrefixTable | None = None):
        self.entries: dict[str, dict] = dict(entries or {})
        self.queries: dict[str, str] = dict(queries or {})
        self.table = table or default_prefix_table()

    @classmethod
    def load(cls, path, table: PrefixTable | None = None) -> "FixtureStore":
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
        return cls(entries=data.get("entries", {}), queries=data.get("queries", {}),
                   table=table)

    def save(self, path) -> None:
        data = {"queries": dict(sorted(self.queries.items())),
                "entries": {k: self.entries[k] for k in sorted(self.entries)}}
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(data, handle, ensure_ascii=False, indent=1, sort_keys=True)
            handle.write("\n")

    def record(self, query: str, body: dict) -> str:
        key = query_key(query, self.table)
        self.entries[key] = body
        self.queries[key] = normal_form(query, self.table)
        return key

    def lookup(self, query: str) -> dict | QueryFailure:
        try:
            key = query_key(query, self.table)
        except LexError as exc:
            return QueryFailure(FailureKind.SYNTAX, str(exc))
        if key in self.entries:
            return self.entries[key]
        if _is_trivial_ask(query):
            return {"head": {}, "boolean": True}
        return QueryFailure(
            FailureKind.ENDPOINT_ERROR, "no recorded response for this query"
        )


_store_cache_lock = threading.Lock()
_store_cache: dict[str, FixtureStore] = {}


def _fixture_store_for(cfg: EndpointConfig) -> FixtureStore:
    path = cfg.url[len(FIXTURE_SCHEME):]
    with _store_cache_lock:
        if path not in _store_cache:
            _store_cache[path] = FixtureStore.load(path)
        return _store_cache[path]


def clear_fixture_cache() -> None:
    with _store_cache_lock:
        _store_cache.clear()


def _parse_body(body: dict) -> AnswerSet | QueryFailure:
    try:
        answers = AnswerSet.from_results_json(body, context="endpoint response")
    except MalformedTerm as exc:
        return QueryFailure(FailureKind.ENDPOINT_ERROR, str(exc))
    if answers.is_empty:
        return AnswerSet.empty()
    return answers


def _execute_http(query: str, cfg: EndpointConfig) -> AnswerSet | QueryFailure:
    session = requests.Session()
    headers = {
        "Accept": "application/sparql-results+json",
        "User-Agent": cfg.user_agent,
    }
    attempts = cfg.max_retries + 1
    gate = _gate_for(cfg.url)
    for attempt in range(attempts):
        with gate:
            try:
                response = session.post(
                    cfg.url,
                    data={"query": query},
                    headers=headers,
                    timeout=cfg.timeout_s,
                )
            except requests.Timeout:
                return QueryFailure(FailureKind.TIMEOUT, f"after {cfg.timeout_s}s")
            except requests.RequestException as exc:
                if attempt + 1 < attempts:
                    time.sleep(min(2.0 ** attempt * 0.1, 2.0))
                    continue
                return QueryFailure(FailureKind.NETWORK, str(exc))
        if response.status_code == 400:
            return QueryFailure(FailureKind.SYNTAX, response.text[:200])
        if response.status_code != 200:
            return QueryFailure(
                FailureKind.ENDPOINT_ERROR, f"HTTP {response.status_code}"
            )
        try:
            body = response.json()
        except ValueError as exc:
            return QueryFailure(FailureKind.ENDPOINT_ERROR, f"bad JSON: {exc}")
        return _parse_body(body)
    return QueryFailure(FailureKind.NETWORK, "retries exhausted")


def execute(query: str, cfg: EndpointConfig) -> AnswerSet | QueryFailure:
    """Run a (possibly invalid) query; failures are values, not exceptions."""
    if not isinstance(query, str) or not query.strip():
        return QueryFailure(FailureKind.SYNTAX, "empty query text")
    if cfg.url.startswith(FIXTURE_SCHEME):
        try:
            store = _fixture_store_for(cfg)
        except OSError as exc:
            return QueryFailure(FailureKind.NETWORK, f"fixture store: {exc}")
        body = store.lookup(query)
        if isinstance(body, QueryFailure):
            return body
        return _parse_body(body)
    return _execute_http(query, cfg)
