"""Model input composition.

The question and its auxiliary feature blocks are concatenated with
per-block separator tokens and padded so that every block starts at a
fixed token index under the active tokenizer. Keeping the offsets
constant across a whole run is the alignment contract the rest of the
pipeline relies on.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field

import requests

from kgqa.errors import MissingAux, SeparatorNotAtomic

log = logging.getLogger(__name__)

BLOCK_QUESTION = "QUESTION"
BLOCK_POS = "POS"
BLOCK_DEP = "DEP"
BLOCK_DEPTH = "DEPTH"
BLOCK_ENT = "ENT"

DEFAULT_WIDTHS = {
    BLOCK_QUESTION: 64,
    BLOCK_POS: 48,
    BLOCK_DEP: 48,
    BLOCK_DEPTH: 48,
    BLOCK_ENT: 16,
}

DEFAULT_SEPARATORS = {
    BLOCK_QUESTION: "<q>",
    BLOCK_POS: "<pos>",
    BLOCK_DEP: "<dep>",
    BLOCK_DEPTH: "<dpt>",
    BLOCK_ENT: "<ent>",
}


class Tokenizer:
    """Minimal tokenizer contract the composer needs."""

    def encode(self, text: str) -> list[int]:
        raise NotImplementedError

    def decode(self, ids: list[int]) -> str:
        raise NotImplementedError

    def is_atomic(self, lexeme: str) -> bool:
        return len(self.encode(lexeme)) == 1


class WhitespaceTokenizer(Tokenizer):
    """Deterministic word-level tokenizer for offline tests."""

    def __init__(self):
        self._vocab: dict[str, int] = {}
        self._inverse: list[str] = []

    def encode(self, text: str) -> list[int]:
        ids = []
        for word in text.split():
            if word not in self._vocab:
                self._vocab[word] = len(self._inverse)
                self._inverse.append(word)
            ids.append(self._vocab[word])
        return ids

    def decode(self, ids: list[int]) -> str:
        return " ".join(self._inverse[i] for i in ids)


class RemoteTokenizer(Tokenizer):
    """Asks the model server's /tokenize endpoint, so composer offsets
    agree with the subword tokenizer the model actually uses."""

    def __init__(self, base_url: str, timeout_s: float = 30.0, max_in_flight: int = 4):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self._gate = threading.Semaphore(max_in_flight)
        self._session = requests.Session()
        self._cache: dict[str, list[int]] = {}

    def encode(self, text: str) -> list[int]:
        if text in self._cache:
            return list(self._cache[text])
        with self._gate:
            response = self._session.post(
                self.base_url + "/tokenize",
                json={"text": text},
                timeout=self.timeout_s,
            )
        response.raise_for_status()
        ids = list(response.json()["ids"])
        self._cache[text] = ids
        return list(ids)

    def decode(self, ids: list[int]) -> str:
        with self._gate:
            response = self._session.post(
                self.base_url + "/detokenize",
                json={"ids": list(ids)},
                timeout=self.timeout_s,
            )
        response.raise_for_status()
        return response.json()["text"]


@dataclass(frozen=True)
class ComposerConfig:
    use_ling: bool = True
    use_ent: bool = True
    block_widths: dict = field(default_factory=lambda: dict(DEFAULT_WIDTHS))
    separators: dict = field(default_factory=lambda: dict(DEFAULT_SEPARATORS))
    pad_lexeme: str = "<pad>"

    def active_blocks(self) -> list[str]:
        blocks = [BLOCK_QUESTION]
        if self.use_ling:
            blocks += [BLOCK_POS, BLOCK_DEP, BLOCK_DEPTH]
        if self.use_ent:
            blocks.append(BLOCK_ENT)
        return blocks

    def to_dict(self) -> dict:
        return {
            "use_ling": self.use_ling,
            "use_ent": self.use_ent,
            "block_widths": dict(self.block_widths),
            "separators": dict(self.separators),
            "pad_lexeme": self.pad_lexeme,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ComposerConfig":
        cfg = cls()
        widths = dict(cfg.block_widths)
        widths.update(data.get("block_widths", {}))
        seps = dict(cfg.separators)
        seps.update(data.get("separators", {}))
        return cls(
            use_ling=bool(data.get("use_ling", cfg.use_ling)),
            use_ent=bool(data.get("use_ent", cfg.use_ent)),
            block_widths=widths,
            separators=seps,
            pad_lexeme=data.get("pad_lexeme", cfg.pad_lexeme),
        )


@dataclass(frozen=True)
class AuxiliaryBundle:
    """Auxiliary information for one question. None means "not extracted";
    an empty list is a legitimate extraction result."""

    pos_tags: list | None = None
    dep_tags: list | None = None
    depths: list | None = None
    entity_ids: list | None = None

    def __post_init__(self):
        present = [x for x in (self.pos_tags, self.dep_tags, self.depths) if x is not None]
        if present and len({len(x) for x in present}) > 1:
            raise ValueError("pos/dep/depth lists must be parallel")
        if self.entity_ids:
            for kb_id in self.entity_ids:
                if not kb_id or any(c.isspace() for c in kb_id):
                    raise ValueError(f"entity id {kb_id!r} contains whitespace")


@dataclass(frozen=True)
class ComposedInput:
    text: str
    block_offsets: dict

    def __post_init__(self):
        if "\n" in self.text:
            raise ValueError("composed text must not contain raw newlines")


def _block_content(name: str, question: str, aux: AuxiliaryBundle) -> str:
    if name == BLOCK_QUESTION:
        return " ".join(question.split())
    if name == BLOCK_POS:
        return " ".join(aux.pos_tags)
    if name == BLOCK_DEP:
        return " ".join(aux.dep_tags)
    if name == BLOCK_DEPTH:
        return " ".join(str(d) for d in aux.depths)
    return " ".join(aux.entity_ids)


def _require_aux(cfg: ComposerConfig, aux: AuxiliaryBundle) -> None:
    if cfg.use_ling:
        for label, value in (
            ("pos_tags", aux.pos_tags),
            ("dep_tags", aux.dep_tags),
            ("depths", aux.depths),
        ):
            if value is None:
                raise MissingAux(f"config enables linguistic context but {label} is missing")
    if cfg.use_ent and aux.entity_ids is None:
        raise MissingAux("config enables entity info but entity_ids is missing")


def check_lexemes(cfg: ComposerConfig, tokenizer: Tokenizer) -> None:
    for name in cfg.active_blocks():
        lexeme = cfg.separators[name]
        if not tokenizer.is_atomic(lexeme):
            raise SeparatorNotAtomic(f"separator {lexeme!r} is not one token")
    if not tokenizer.is_atomic(cfg.pad_lexeme):
        raise SeparatorNotAtomic(f"pad {cfg.pad_lexeme!r} is not one token")


def compose(
    question: str,
    aux: AuxiliaryBundle,
    cfg: ComposerConfig,
    tokenizer: Tokenizer,
    source_id: str | None = None,
) -> ComposedInput:
    """Assemble separator-delimited, padded feature blocks.

    Every block occupies exactly width+1 tokens (separator + content +
    padding), so block start offsets depend only on the configuration.
    Overlong content is right-truncated and logged.
    """
    if not question.strip():
        raise ValueError("question must be non-empty")
    _require_aux(cfg, aux)
    check_lexemes(cfg, tokenizer)
    pieces: list[str] = []
    offsets: dict[str, int] = {}
    cursor = 0
    for name in cfg.active_blocks():
        width = int(cfg.block_widths[name])
        content = _block_content(name, question, aux)
        ids = tokenizer.encode(content)
        if len(ids) > width:
            log.warning(
                "TRUNCATION block=%s id=%s kept=%d dropped=%d",
                name, source_id or "?", width, len(ids) - width,
            )
            ids = ids[:width]
        rendered = tokenizer.decode(ids)
        offsets[name] = cursor
        piece = cfg.separators[name]
        if rendered:
            piece += " " + rendered
        pad_count = width - len(ids)
        if pad_count:
            piece += " " + " ".join([cfg.pad_lexeme] * pad_count)
        pieces.append(piece)
        cursor += width + 1
    text = " ".join(" ".join(pieces).split())
    return ComposedInput(text=text, block_offsets=offsets)


@dataclass(frozen=True)
class ConfigReport:
    ok: bool
    p95_lengths: dict
    widths: dict

    def fits(self) -> bool:
        return all(self.p95_lengths[b] <= self.widths[b] for b in self.p95_lengths)


def validate_config(
    cfg: ComposerConfig,
    tokenizer: Tokenizer,
    probe: list[tuple[str, AuxiliaryBundle]] | None = None,
) -> ConfigReport:
    """Confirm separator/pad atomicity; optionally measure content lengths
    over a probe corpus to guide width selection."""
    check_lexemes(cfg, tokenizer)
    p95: dict[str, int] = {}
    if probe:
        lengths: dict[str, list[int]] = {b: [] for b in cfg.active_blocks()}
        for question, aux in probe:
            _require_aux(cfg, aux)
            for name in cfg.active_blocks():
                content = _block_content(name, question, aux)
                lengths[name].append(len(tokenizer.encode(content)))
        for name, values in lengths.items():
            values.sort()
            p95[name] = values[min(len(values) - 1, int(0.95 * len(values)))]
    return ConfigReport(ok=True, p95_lengths=p95, widths=dict(cfg.block_widths))
