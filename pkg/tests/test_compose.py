import http.server
import json
import random
import threading

import pytest

from kgqa.compose import (
    AuxiliaryBundle,
    ComposerConfig,
    RemoteTokenizer,
    WhitespaceTokenizer,
    compose,
    validate_config,
)
from kgqa.errors import MissingAux, SeparatorNotAtomic

REFERENCE_QUESTION = "Who are the grandchildren of Bruce Lee?"
REFERENCE_AUX = AuxiliaryBundle(
    pos_tags=["PRON", "AUX", "DET", "NOUN", "ADP", "PROPN", "PROPN", "PUNCT"],
    dep_tags=["attr", "ROOT", "det", "nsubj", "prep", "compound", "pobj", "punct"],
    depths=[2, 1, 3, 2, 3, 5, 4, 2],
    entity_ids=["Q16397"],
)


def small_config(**kwargs):
    defaults = dict(
        block_widths={"QUESTION": 12, "POS": 10, "DEP": 10, "DEPTH": 10, "ENT": 4},
    )
    defaults.update(kwargs)
    return ComposerConfig(**defaults)


def random_bundle(rng):
    n = rng.randrange(1, 9)
    return (
        " ".join(rng.choice(["who", "what", "city", "Bruce", "born?"]) for _ in range(n)),
        AuxiliaryBundle(
            pos_tags=[rng.choice(["NOUN", "AUX", "DET"]) for _ in range(n)],
            dep_tags=[rng.choice(["dep", "det", "nsubj"]) for _ in range(n)],
            depths=[rng.randrange(1, 6) for _ in range(n)],
            entity_ids=[f"Q{rng.randrange(100)}" for _ in range(rng.randrange(3))],
        ),
    )


class TestCompose:
    def test_blocks_appear_in_order(self):
        cfg = small_config()
        out = compose(REFERENCE_QUESTION, REFERENCE_AUX, cfg, WhitespaceTokenizer())
        text = out.text
        assert text.index("<q>") < text.index("<pos>") < text.index("<dep>")
        assert text.index("<dep>") < text.index("<dpt>") < text.index("<ent>")
        assert "PRON AUX DET NOUN ADP PROPN PROPN PUNCT" in text
        assert "attr ROOT det nsubj prep compound pobj punct" in text
        assert "2 1 3 2 3 5 4 2" in text
        assert "Q16397" in text
        assert REFERENCE_QUESTION in text

    def test_question_only_config(self):
        cfg = small_config(use_ling=False, use_ent=False)
        out = compose(REFERENCE_QUESTION, AuxiliaryBundle(), cfg, WhitespaceTokenizer())
        assert out.text.startswith("<q> " + REFERENCE_QUESTION)
        assert set(out.text.split()) <= set(REFERENCE_QUESTION.split()) | {"<q>", "<pad>"}
        assert list(out.block_offsets) == ["QUESTION"]

    def test_offsets_constant_across_inputs(self):
        cfg = small_config()
        tok = WhitespaceTokenizer()
        rng = random.Random(7)
        reference = None
        for _ in range(200):
            question, aux = random_bundle(rng)
            out = compose(question, aux, cfg, tok)
            if reference is None:
                reference = out.block_offsets
            assert out.block_offsets == reference
            # Realized offsets agree with re-tokenization.
            ids = tok.encode(out.text)
            sep_ids = {name: tok.encode(cfg.separators[name])[0]
                       for name in cfg.active_blocks()}
            for name, offset in out.block_offsets.items():
                assert ids[offset] == sep_ids[name]

    def test_disabling_a_feature_shifts_offsets_by_width_plus_one(self):
        tok = WhitespaceTokenizer()
        full = compose(REFERENCE_QUESTION, REFERENCE_AUX, small_config(), tok)
        no_ling = compose(
            REFERENCE_QUESTION, REFERENCE_AUX,
            small_config(use_ling=False), tok,
        )
        removed = sum(
            small_config().block_widths[b] + 1 for b in ("POS", "DEP", "DEPTH")
        )
        assert no_ling.block_offsets["ENT"] == full.block_offsets["ENT"] - removed
        assert "POS" not in no_ling.block_offsets

    def test_truncation_is_right_side_and_logged(self, caplog):
        cfg = small_config(block_widths={"QUESTION": 3, "POS": 4, "DEP": 4,
                                         "DEPTH": 4, "ENT": 2})
        tok = WhitespaceTokenizer()
        with caplog.at_level("WARNING"):
            out = compose("one two three four five", REFERENCE_AUX, cfg, tok,
                          source_id="q42")
        assert "<q> one two three <pos>" in out.text
        assert any("TRUNCATION" in r.message and "q42" in r.message
                   for r in caplog.records)

    def test_question_block_decodes_back_to_question(self):
        cfg = small_config()
        tok = WhitespaceTokenizer()
        out = compose(REFERENCE_QUESTION, REFERENCE_AUX, cfg, tok)
        ids = tok.encode(out.text)
        start = out.block_offsets["QUESTION"] + 1
        width = cfg.block_widths["QUESTION"]
        block = [i for i in ids[start:start + width]
                 if tok.decode([i]) != cfg.pad_lexeme]
        assert tok.decode(block) == REFERENCE_QUESTION

    def test_missing_aux_rejected(self):
        with pytest.raises(MissingAux):
            compose("hi there", AuxiliaryBundle(), small_config(),
                    WhitespaceTokenizer())

    def test_empty_question_rejected(self):
        with pytest.raises(ValueError):
            compose("   ", REFERENCE_AUX, small_config(), WhitespaceTokenizer())

    def test_no_newlines_in_output(self):
        aux = AuxiliaryBundle(pos_tags=["X"], dep_tags=["dep"], depths=[1],
                              entity_ids=[])
        out = compose("hi\nthere", aux, small_config(), WhitespaceTokenizer())
        assert "\n" not in out.text


class TestAuxiliaryBundle:
    def test_parallel_lists_enforced(self):
        with pytest.raises(ValueError):
            AuxiliaryBundle(pos_tags=["A"], dep_tags=["a", "b"], depths=[1])

    def test_entity_ids_must_be_whitespace_free(self):
        with pytest.raises(ValueError):
            AuxiliaryBundle(entity_ids=["Q1", "bad id"])


class _TokenizerHandler(http.server.BaseHTTPRequestHandler):
    """Word-level stub with a stable vocabulary per server instance."""

    vocab: dict = {}
    inverse: list = []

    def _reply(self, payload):
        body = json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        payload = json.loads(self.rfile.read(length))
        if self.path == "/tokenize":
            ids = []
            for word in payload["text"].split():
                if word not in self.vocab:
                    self.vocab[word] = len(self.inverse)
                    self.inverse.append(word)
                ids.append(self.vocab[word])
            self._reply({"ids": ids})
        elif self.path == "/detokenize":
            self._reply({"text": " ".join(self.inverse[i] for i in payload["ids"])})

    def log_message(self, *args):
        pass


class TestRemoteTokenizer:
    def test_compose_through_http_tokenizer(self):
        _TokenizerHandler.vocab = {}
        _TokenizerHandler.inverse = []
        server = http.server.ThreadingHTTPServer(("127.0.0.1", 0),
                                                 _TokenizerHandler)
        threading.Thread(target=server.serve_forever, daemon=True).start()
        try:
            tok = RemoteTokenizer(f"http://127.0.0.1:{server.server_port}")
            assert tok.is_atomic("<pad>")
            assert not tok.is_atomic("two words")
            out = compose(REFERENCE_QUESTION, REFERENCE_AUX, small_config(), tok)
            reference = compose(REFERENCE_QUESTION, REFERENCE_AUX,
                                small_config(), WhitespaceTokenizer())
            assert out.block_offsets == reference.block_offsets
            assert out.text == reference.text
        finally:
            server.shutdown()


class TestValidateConfig:
    def test_default_config_ok(self):
        report = validate_config(ComposerConfig(), WhitespaceTokenizer())
        assert report.ok

    def test_split_pad_lexeme_rejected(self):
        cfg = small_config(pad_lexeme="two words")
        with pytest.raises(SeparatorNotAtomic):
            validate_config(cfg, WhitespaceTokenizer())
        with pytest.raises(SeparatorNotAtomic):
            compose(REFERENCE_QUESTION, REFERENCE_AUX, cfg, WhitespaceTokenizer())

    def test_probe_corpus_percentiles(self):
        rng = random.Random(3)
        probe = [random_bundle(rng) for _ in range(50)]
        report = validate_config(small_config(), WhitespaceTokenizer(), probe)
        assert report.fits()
        assert set(report.p95_lengths) == {"QUESTION", "POS", "DEP", "DEPTH", "ENT"}

    def test_default_widths_fit_the_fixture_corpus(self, qald9plus_train,
                                                   fixtures_dir):
        from kgqa.datasets import ProviderSet, build_aux
        from kgqa.entities import FixtureEntityProvider
        from kgqa.linguistic import FixtureAnnotationProvider

        cfg = ComposerConfig()
        providers = ProviderSet(
            annotations=FixtureAnnotationProvider(
                [fixtures_dir / "annotations.en.jsonl"]
            ),
            entities=FixtureEntityProvider([fixtures_dir / "entities.en.jsonl"]),
            tokenizer=WhitespaceTokenizer(),
        )
        probe = []
        for item in qald9plus_train.items:
            text = item.texts["en"]
            probe.append((text, build_aux(text, "en", cfg, providers)))
        report = validate_config(cfg, providers.tokenizer, probe)
        assert report.fits()
        assert report.p95_lengths["QUESTION"] <= cfg.block_widths["QUESTION"]
