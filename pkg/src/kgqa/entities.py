"""Entity recognition/linking against a knowledge base, via providers."""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass

import requests

from kgqa.errors import ProviderUnavailable, UnsupportedLanguage

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EntityLink:
    surface: str
    kb_id: str  # local identifier, e.g. Q16397; passed through untouched
    start: int
    end: int


class EntityProvider:
    def supports(self, lang: str) -> bool:
        raise NotImplementedError

    def link(self, text: str, lang: str) -> list[EntityLink]:
        raise NotImplementedError


def _links_from_payload(payload, question_len: int) -> list[EntityLink]:
    links = []
    for raw in payload:
        link = EntityLink(
            surface=raw["surface"],
            kb_id=raw["kb_id"],
            start=int(raw["start"]),
            end=int(raw["end"]),
        )
        if not (0 <= link.start < link.end <= question_len):
            log.warning("dropping out-of-range span %r", raw)
            continue
        if not link.kb_id or any(c.isspace() for c in link.kb_id):
            log.warning("dropping link with bad kb_id %r", raw)
            continue
        links.append(link)
    return links


def resolve_overlaps(links: list[EntityLink]) -> list[EntityLink]:
    """Keep the longest span among overlapping candidates, earlier start
    breaking ties; result is sorted by start and pairwise disjoint."""
    chosen: list[EntityLink] = []
    remaining = sorted(links, key=lambda l: (-(l.end - l.start), l.start))
    for candidate in remaining:
        if all(
            candidate.end <= kept.start or candidate.start >= kept.end
            for kept in chosen
        ):
            chosen.append(candidate)
    return sorted(chosen, key=lambda l: l.start)


def link_entities(question: str, lang: str, provider: EntityProvider) -> list[EntityLink]:
    """Disambiguated entity identifiers for a question, non-overlapping,
    ordered by start offset. An empty result is valid."""
    if not provider.supports(lang):
        raise UnsupportedLanguage(f"provider does not support {lang!r}")
    return resolve_overlaps(provider.link(question, lang))


class FixtureEntityProvider(EntityProvider):
    """JSON-Lines map from (lang, question) to recorded links.

    Record schema: {"text":..., "lang":..., "links":[{"surface":...,
    "kb_id":..., "start":..., "end":...}]}
    """

    def __init__(self, paths):
        if isinstance(paths, (str, bytes)) or hasattr(paths, "__fspath__"):
            paths = [paths]
        self._records: dict[tuple[str, str], list[EntityLink]] = {}
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
                        self._records[key] = _links_from_payload(
                            record["links"], len(record["text"])
                        )
                        self._langs.add(record["lang"])
            except OSError as exc:
                raise ProviderUnavailable(f"cannot read fixture {path}: {exc}") from exc

    def supports(self, lang: str) -> bool:
        return lang in self._langs

    def link(self, text: str, lang: str) -> list[EntityLink]:
        if not self.supports(lang):
            raise UnsupportedLanguage(f"no fixture links for {lang!r}")
        try:
            return list(self._records[(lang, text)])
        except KeyError:
            raise ProviderUnavailable(
                f"no recorded links for {lang!r} text {text!r}"
            ) from None


class RemoteEntityProvider(EntityProvider):
    """HTTP client for a recognition+linking service chain.

    POST /link with {"query":..., "lang":..., "components":[...]}; the
    component chain names are passed through opaquely.
    """

    def __init__(self, base_url: str, components=None, languages=None,
                 timeout_s: float = 30.0, max_in_flight: int = 4):
        self.base_url = base_url.rstrip("/")
        self.components = list(components) if components else []
        self.languages = set(languages) if languages else None
        self.timeout_s = timeout_s
        self._gate = threading.Semaphore(max_in_flight)
        self._session = requests.Session()

    def supports(self, lang: str) -> bool:
        return self.languages is None or lang in self.languages

    def link(self, text: str, lang: str) -> list[EntityLink]:
        if not self.supports(lang):
            raise UnsupportedLanguage(f"linking service lacks {lang!r}")
        with self._gate:
            try:
                response = self._session.post(
                    self.base_url + "/link",
                    json={"query": text, "lang": lang, "components": self.components},
                    timeout=self.timeout_s,
                )
            except requests.RequestException as exc:
                raise ProviderUnavailable(f"linking service: {exc}") from exc
        if response.status_code != 200:
            raise ProviderUnavailable(
                f"linking service returned {response.status_code}"
            )
        try:
            return _links_from_payload(response.json()["links"], len(text))
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderUnavailable(f"bad linking payload: {exc}") from exc
