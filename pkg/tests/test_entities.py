import http.server
import json
import random
import threading

import pytest

from kgqa.entities import (
    EntityLink,
    EntityProvider,
    FixtureEntityProvider,
    RemoteEntityProvider,
    link_entities,
    resolve_overlaps,
)
from kgqa.errors import ProviderUnavailable, UnsupportedLanguage


class ListProvider(EntityProvider):
    def __init__(self, links, langs=("en",)):
        self._links = links
        self._langs = set(langs)

    def supports(self, lang):
        return lang in self._langs

    def link(self, text, lang):
        return list(self._links)


def oracle_resolve(links):
    """Independent overlap resolution: repeatedly pick the longest
    remaining span (earliest on ties) and discard everything overlapping."""
    remaining = list(links)
    kept = []
    while remaining:
        best = max(remaining, key=lambda l: (l.end - l.start, -l.start))
        kept.append(best)
        remaining = [
            l for l in remaining
            if l.end <= best.start or l.start >= best.end
        ]
        remaining = [l for l in remaining if l is not best]
    return sorted(kept, key=lambda l: l.start)


class TestLinkEntities:
    def test_single_mention(self):
        question = "Who are the grandchildren of Bruce Lee?"
        provider = ListProvider([EntityLink("Bruce Lee", "Q16397", 29, 38)])
        links = link_entities(question, "en", provider)
        assert [(l.surface, l.kb_id) for l in links] == [("Bruce Lee", "Q16397")]

    def test_empty_result_is_valid(self):
        assert link_entities("nothing here", "en", ListProvider([])) == []

    def test_longest_overlapping_span_kept(self):
        provider = ListProvider(
            [EntityLink("Bruce", "Q1", 29, 34), EntityLink("Bruce Lee", "Q2", 29, 38)]
        )
        links = link_entities("Who are the grandchildren of Bruce Lee?", "en", provider)
        assert [l.kb_id for l in links] == ["Q2"]

    def test_unsupported_language(self):
        with pytest.raises(UnsupportedLanguage):
            link_entities("x", "xx", ListProvider([]))

    def test_kb_ids_pass_through_untouched(self):
        provider = ListProvider([EntityLink("x", "Q0042-weird.id", 0, 1)])
        links = link_entities("x y", "en", provider)
        assert links[0].kb_id == "Q0042-weird.id"

    def test_randomized_overlap_oracle(self):
        rng = random.Random(99)
        for _ in range(300):
            links = []
            for i in range(rng.randrange(0, 12)):
                start = rng.randrange(0, 40)
                end = start + rng.randrange(1, 12)
                links.append(EntityLink(f"s{i}", f"Q{i}", start, end))
            resolved = resolve_overlaps(links)
            expected = oracle_resolve(links)
            assert [(l.start, l.end) for l in resolved] == [
                (l.start, l.end) for l in expected
            ]
            for a, b in zip(resolved, resolved[1:]):
                assert a.end <= b.start  # disjoint and sorted


class TestFixtureProvider:
    def test_lookup_and_determinism(self, tmp_path):
        path = tmp_path / "entities.jsonl"
        record = {
            "text": "Who are the grandchildren of Bruce Lee?",
            "lang": "en",
            "links": [{"surface": "Bruce Lee", "kb_id": "Q16397",
                       "start": 29, "end": 38}],
        }
        path.write_text(json.dumps(record) + "\n", encoding="utf-8")
        provider = FixtureEntityProvider(path)
        first = link_entities(record["text"], "en", provider)
        second = link_entities(record["text"], "en", provider)
        assert first == second
        assert first[0].kb_id == "Q16397"

    def test_unknown_text_is_provider_fault(self, tmp_path):
        path = tmp_path / "entities.jsonl"
        path.write_text("", encoding="utf-8")
        provider = FixtureEntityProvider(path)
        provider._langs.add("en")
        with pytest.raises(ProviderUnavailable):
            provider.link("never seen", "en")

    def test_invalid_spans_dropped(self, tmp_path):
        path = tmp_path / "entities.jsonl"
        record = {
            "text": "ab",
            "lang": "en",
            "links": [
                {"surface": "ab", "kb_id": "Q1", "start": 0, "end": 99},
                {"surface": "a", "kb_id": "bad id", "start": 0, "end": 1},
                {"surface": "b", "kb_id": "Q2", "start": 1, "end": 2},
            ],
        }
        path.write_text(json.dumps(record) + "\n", encoding="utf-8")
        provider = FixtureEntityProvider(path)
        assert [l.kb_id for l in provider.link("ab", "en")] == ["Q2"]


class _LinkHandler(http.server.BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers["Content-Length"])
        payload = json.loads(self.rfile.read(length))
        assert "components" in payload
        body = json.dumps(
            {"links": [{"surface": payload["query"][:2], "kb_id": "Q7",
                        "start": 0, "end": 2}]}
        ).encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


def test_remote_provider_round_trip():
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), _LinkHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        provider = RemoteEntityProvider(
            f"http://127.0.0.1:{server.server_port}",
            components=["ner", "ned"],
        )
        links = provider.link("Bruce Lee?", "en")
        assert links[0].kb_id == "Q7"
    finally:
        server.shutdown()
