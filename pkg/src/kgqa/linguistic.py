"""Per-token linguistic annotations and dependency-tree depths.

Annotations come from pluggable providers: a file-backed fixture provider
for deterministic offline runs, and a client for a remote annotation
service. The depth computation itself is pure.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field

import requests

from kgqa.errors import NotATree, ProviderUnavailable, UnsupportedLanguage

log = logging.getLogger(__name__)

FALLBACK_POS = "X"
FALLBACK_DEP = "dep"


@dataclass(frozen=True)
class TokenAnnotation:
    surface: str
    pos: str
    dep_rel: str
    head_index: int  # 0-based; root points at itself


@dataclass
class AnnotatedQuestion:
    lang: str
    tokens: list[TokenAnnotation]
    depths: list[int] = field(default_factory=list)

    @property
    def pos_tags(self) -> list[str]:
        return [t.pos for t in self.tokens]

    @property
    def dep_tags(self) -> list[str]:
        return [t.dep_rel for t in self.tokens]


def compute_depths(tokens: list[TokenAnnotation]) -> list[int]:
    """Depth of each token in the head tree; root has depth 1.

    Iterative breadth-first walk from the root, O(n); a 10k-token chain
    must not overflow the stack.
    """
    n = len(tokens)
    if n == 0:
        return []
    roots = [i for i, t in enumerate(tokens) if t.head_index == i]
    if len(roots) != 1:
        raise NotATree(f"expected exactly one root, found {len(roots)}")
    for i, tok in enumerate(tokens):
        if not 0 <= tok.head_index < n:
            raise NotATree(f"token {i} has head {tok.head_index} outside [0, {n})")
    children: list[list[int]] = [[] for _ in range(n)]
    for i, tok in enumerate(tokens):
        if i != tok.head_index:
            children[tok.head_index].append(i)
    depths = [0] * n
    queue = [roots[0]]
    depths[roots[0]] = 1
    while queue:
        nxt: list[int] = []
        for node in queue:
            for child in children[node]:
                depths[child] = depths[node] + 1
                nxt.append(child)
        queue = nxt
    if any(d == 0 for d in depths):
        raise NotATree("head graph contains a cycle")
    return depths


class AnnotationProvider:
    """Contract for POS/dependency annotation sources."""

    def supports(self, lang: str) -> bool:
        raise NotImplementedError

    def annotate(self, text: str, lang: str) -> list[TokenAnnotation]:
        raise NotImplementedError


def _tokens_from_record(record: dict) -> list[TokenAnnotation]:
    tokens = []
    for raw in record["tokens"]:
        pos = raw.get("pos") or FALLBACK_POS
        dep = raw.get("dep") or FALLBACK_DEP
        if "pos" not in raw or "dep" not in raw:
            log.warning("provider omitted pos/dep for %r; using fallbacks", raw.get("surface"))
        tokens.append(
            TokenAnnotation(
                surface=raw["surface"],
                pos=pos,
                dep_rel=dep,
                head_index=int(raw["head"]),
            )
        )
    return tokens


class FixtureAnnotationProvider(AnnotationProvider):
    """Reads precomputed annotations from JSON-Lines files.

    Record schema: {"text":..., "lang":..., "tokens":[{"surface":...,
    "pos":..., "dep":..., "head":...}]}
    """

    def __init__(self, paths):
        if isinstance(paths, (str, bytes)) or hasattr(paths, "__fspath__"):
            paths = [paths]
        self._records: dict[tuple[str, str], list[TokenAnnotation]] = {}
        self._langs: set[str] = set()
        for path in paths:
            try:
                with open(path, encoding="utf-8") as handle:
                    for line in handle:
                        line = line.strip()
                        if not line:
                            continue
                        record = json.loads(line)
                        key = (record["lang"], record["text"])
                        self._records[key] = _tokens_from_record(record)
                        self._langs.add(record["lang"])
            except OSError as exc:
                raise ProviderUnavailable(f"cannot read fixture {path}: {exc}") from exc

    def supports(self, lang: str) -> bool:
        return lang in self._langs

    def annotate(self, text: str, lang: str) -> list[TokenAnnotation]:
        if not self.supports(lang):
            raise UnsupportedLanguage(f"no fixture annotations for {lang!r}")
        try:
            return self._records[(lang, text)]
        except KeyError:
            raise ProviderUnavailable(
                f"no recorded annotation for {lang!r} text {text!r}"
            ) from None


class RemoteAnnotationProvider(AnnotationProvider):
    """HTTP client for an annotation service.

    POST /annotate with {"text":..., "lang":...}; the response uses the
    fixture record schema. Concurrent requests are capped.
    """

    def __init__(self, base_url: str, languages=None, timeout_s: float = 30.0,
                 max_in_flight: int = 4):
        self.base_url = base_url.rstrip("/")
        self.languages = set(languages) if languages else None
        self.timeout_s = timeout_s
        self._gate = threading.Semaphore(max_in_flight)
        self._session = requests.Session()

    def supports(self, lang: str) -> bool:
        return self.languages is None or lang in self.languages

    def annotate(self, text: str, lang: str) -> list[TokenAnnotation]:
        if not self.supports(lang):
            raise UnsupportedLanguage(f"annotation service lacks {lang!r}")
        with self._gate:
            try:
                response = self._session.post(
                    self.base_url + "/annotate",
                    json={"text": text, "lang": lang},
                    timeout=self.timeout_s,
                )
            except requests.RequestException as exc:
                raise ProviderUnavailable(f"annotation service: {exc}") from exc
        if response.status_code != 200:
            raise ProviderUnavailable(
                f"annotation service returned {response.status_code}"
            )
        try:
            return _tokens_from_record(response.json())
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderUnavailable(f"bad annotation payload: {exc}") from exc


def annotate(question: str, lang: str, provider: AnnotationProvider) -> AnnotatedQuestion:
    """Fetch annotations for a question and fill in tree depths."""
    if not provider.supports(lang):
        raise UnsupportedLanguage(f"provider does not support {lang!r}")
    if not question.strip():
        return AnnotatedQuestion(lang=lang, tokens=[], depths=[])
    tokens = provider.annotate(question, lang)
    return AnnotatedQuestion(lang=lang, tokens=tokens, depths=compute_depths(tokens))
