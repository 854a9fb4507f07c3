import http.server
import json
import random
import threading

import pytest

from kgqa.errors import NotATree, ProviderUnavailable, UnsupportedLanguage
from kgqa.linguistic import (
    AnnotatedQuestion,
    FixtureAnnotationProvider,
    RemoteAnnotationProvider,
    TokenAnnotation,
    annotate,
    compute_depths,
)

# "Who are the grandchildren of Bruce Lee ?" -- the reference parse used
# throughout: heads are (are<-Who, are=root, grandchildren<-the,
# are<-grandchildren, grandchildren<-of, Lee<-Bruce, of<-Lee, are<-?).
REFERENCE_SENTENCE = [
    TokenAnnotation("Who", "PRON", "attr", 1),
    TokenAnnotation("are", "AUX", "ROOT", 1),
    TokenAnnotation("the", "DET", "det", 3),
    TokenAnnotation("grandchildren", "NOUN", "nsubj", 1),
    TokenAnnotation("of", "ADP", "prep", 3),
    TokenAnnotation("Bruce", "PROPN", "compound", 6),
    TokenAnnotation("Lee", "PROPN", "pobj", 4),
    TokenAnnotation("?", "PUNCT", "punct", 1),
]


class TestComputeDepths:
    def test_reference_sentence_depths(self):
        assert compute_depths(REFERENCE_SENTENCE) == [2, 1, 3, 2, 3, 5, 4, 2]

    def test_single_token_root(self):
        assert compute_depths([TokenAnnotation("hi", "INTJ", "ROOT", 0)]) == [1]

    def test_two_token_cycle_rejected(self):
        tokens = [
            TokenAnnotation("a", "X", "dep", 1),
            TokenAnnotation("b", "X", "dep", 0),
        ]
        with pytest.raises(NotATree):
            compute_depths(tokens)

    def test_zero_roots_rejected(self):
        tokens = [
            TokenAnnotation("a", "X", "dep", 1),
            TokenAnnotation("b", "X", "dep", 2),
            TokenAnnotation("c", "X", "dep", 1),
        ]
        with pytest.raises(NotATree):
            compute_depths(tokens)

    def test_multiple_roots_rejected(self):
        tokens = [
            TokenAnnotation("a", "X", "ROOT", 0),
            TokenAnnotation("b", "X", "ROOT", 1),
        ]
        with pytest.raises(NotATree):
            compute_depths(tokens)

    def test_head_out_of_range_rejected(self):
        with pytest.raises(NotATree):
            compute_depths([TokenAnnotation("a", "X", "ROOT", 0),
                            TokenAnnotation("b", "X", "dep", 5)])

    def test_long_chain_is_iterative(self):
        n = 10_000
        tokens = [TokenAnnotation(f"t{i}", "X", "ROOT" if i == 0 else "dep",
                                  max(0, i - 1)) for i in range(n)]
        depths = compute_depths(tokens)
        assert depths == list(range(1, n + 1))

    def test_random_tree_properties(self):
        rng = random.Random(4242)
        for _ in range(300):
            n = rng.randrange(1, 120)
            heads = [0] * n
            order = list(range(n))
            rng.shuffle(order)
            attached = [order[0]]
            heads[order[0]] = order[0]
            for node in order[1:]:
                heads[node] = rng.choice(attached)
                attached.append(node)
            tokens = [
                TokenAnnotation(f"t{i}", "X", "ROOT" if heads[i] == i else "dep",
                                heads[i])
                for i in range(n)
            ]
            depths = compute_depths(tokens)
            assert depths.count(1) == 1
            for i, tok in enumerate(tokens):
                if tok.head_index != i:
                    assert depths[i] == depths[tok.head_index] + 1
                assert 1 <= depths[i] <= n


def fixture_file(tmp_path, records):
    path = tmp_path / "annotations.jsonl"
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record) + "\n")
    return path


REFERENCE_RECORD = {
    "text": "Who are the grandchildren of Bruce Lee?",
    "lang": "en",
    "tokens": [
        {"surface": t.surface, "pos": t.pos, "dep": t.dep_rel, "head": t.head_index}
        for t in REFERENCE_SENTENCE
    ],
}


class TestAnnotate:
    def test_fixture_provider_returns_reference_tags(self, tmp_path):
        provider = FixtureAnnotationProvider(fixture_file(tmp_path, [REFERENCE_RECORD]))
        annotated = annotate(REFERENCE_RECORD["text"], "en", provider)
        assert annotated.pos_tags == [
            "PRON", "AUX", "DET", "NOUN", "ADP", "PROPN", "PROPN", "PUNCT"
        ]
        assert annotated.dep_tags == [
            "attr", "ROOT", "det", "nsubj", "prep", "compound", "pobj", "punct"
        ]
        assert annotated.depths == [2, 1, 3, 2, 3, 5, 4, 2]

    def test_empty_question_is_vacuous(self, tmp_path):
        provider = FixtureAnnotationProvider(fixture_file(tmp_path, [REFERENCE_RECORD]))
        annotated = annotate("", "en", provider)
        assert annotated.tokens == [] and annotated.depths == []

    def test_unsupported_language(self, tmp_path):
        provider = FixtureAnnotationProvider(fixture_file(tmp_path, [REFERENCE_RECORD]))
        with pytest.raises(UnsupportedLanguage):
            annotate("что это", "xx", provider)

    def test_unknown_text_is_provider_fault(self, tmp_path):
        provider = FixtureAnnotationProvider(fixture_file(tmp_path, [REFERENCE_RECORD]))
        with pytest.raises(ProviderUnavailable):
            annotate("Never recorded?", "en", provider)

    def test_referential_transparency(self, tmp_path):
        provider = FixtureAnnotationProvider(fixture_file(tmp_path, [REFERENCE_RECORD]))
        first = annotate(REFERENCE_RECORD["text"], "en", provider)
        second = annotate(REFERENCE_RECORD["text"], "en", provider)
        assert first.tokens == second.tokens and first.depths == second.depths

    def test_missing_tags_get_fallbacks(self, tmp_path):
        record = {
            "text": "hi",
            "lang": "en",
            "tokens": [{"surface": "hi", "head": 0}],
        }
        provider = FixtureAnnotationProvider(fixture_file(tmp_path, [record]))
        annotated = annotate("hi", "en", provider)
        assert annotated.pos_tags == ["X"]
        assert annotated.dep_tags == ["dep"]


class _AnnotationHandler(http.server.BaseHTTPRequestHandler):
    fail = False

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        payload = json.loads(self.rfile.read(length))
        if self.fail:
            self.send_response(503)
            self.end_headers()
            return
        body = json.dumps(
            {
                "text": payload["text"],
                "lang": payload["lang"],
                "tokens": [
                    {"surface": w, "pos": "NOUN", "dep": "ROOT" if i == 0 else "dep",
                     "head": 0 if i == 0 else i - 1}
                    for i, w in enumerate(payload["text"].split())
                ],
            }
        ).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture()
def annotation_server():
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), _AnnotationHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestRemoteProvider:
    def test_round_trip(self, annotation_server):
        provider = RemoteAnnotationProvider(annotation_server)
        annotated = annotate("three little words", "en", provider)
        assert [t.surface for t in annotated.tokens] == ["three", "little", "words"]
        assert annotated.depths == [1, 2, 3]

    def test_non_200_is_provider_unavailable(self, annotation_server):
        _AnnotationHandler.fail = True
        try:
            provider = RemoteAnnotationProvider(annotation_server)
            with pytest.raises(ProviderUnavailable):
                provider.annotate("x", "en")
        finally:
            _AnnotationHandler.fail = False

    def test_connection_refused_is_provider_unavailable(self):
        provider = RemoteAnnotationProvider("http://127.0.0.1:1", timeout_s=0.5)
        with pytest.raises(ProviderUnavailable):
            provider.annotate("x", "en")
