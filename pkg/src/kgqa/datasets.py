"""Benchmark ingestion into a uniform in-memory model.

QALD-format files (QALD-9-Plus, QALD-10) and LC-QuAD 2.0 files load into
the same Benchmark structure; answers embedded per question are normalized
into AnswerSet at load time so gold and predicted answers share one
comparison path.
"""

from __future__ import annotations

import enum
import json
import logging
import re
from dataclasses import dataclass, field, replace

from kgqa.answers import AnswerKind, AnswerSet
from kgqa.compose import AuxiliaryBundle, ComposerConfig, Tokenizer, compose
from kgqa.entities import EntityProvider, link_entities
from kgqa.errors import (
    DuplicateId,
    LexError,
    MalformedFile,
    MalformedTerm,
    MissingLanguage,
)
from kgqa.linguistic import AnnotationProvider, annotate
from kgqa.sparql import PrefixTable, default_prefix_table, encode_target, tokenize

log = logging.getLogger(__name__)

_LANG_CODE = re.compile(r"[a-z]{2}\Z")


class Source(enum.Enum):
    QALD9PLUS = "qald9plus"
    QALD10 = "qald10"
    LCQUAD2 = "lcquad2"


class KgTarget(enum.Enum):
    WIKIDATA = "wikidata"
    DBPEDIA = "dbpedia"
    OTHER = "other"


@dataclass(frozen=True)
class QAItem:
    id: str
    texts: dict
    gold_sparql: str
    gold_answers: AnswerSet
    source: Source
    unparseable: bool = False

    def text(self, lang: str) -> str:
        try:
            return self.texts[lang]
        except KeyError:
            raise MissingLanguage(f"item {self.id} has no {lang!r} text") from None


@dataclass(frozen=True)
class Benchmark:
    name: str
    items: tuple
    kg_target: KgTarget = KgTarget.WIKIDATA

    def __len__(self) -> int:
        return len(self.items)

    def languages(self) -> set:
        langs: set[str] = set()
        for item in self.items:
            langs.update(item.texts)
        return langs


def _check_lexable(sparql: str) -> bool:
    try:
        tokenize(sparql)
        return True
    except LexError:
        return False


def _parse_texts(raw, context: str) -> dict:
    if not isinstance(raw, list):
        raise MalformedFile(f"{context}: 'question' must be an array")
    texts: dict[str, str] = {}
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict) or "language" not in entry:
            raise MalformedFile(f"{context}[{i}]: expected {{language, string}}")
        lang = entry["language"]
        if not isinstance(lang, str) or not _LANG_CODE.match(lang):
            raise MalformedFile(f"{context}[{i}]: bad language code {lang!r}")
        text = entry.get("string", "")
        if not isinstance(text, str):
            raise MalformedFile(f"{context}[{i}]: string must be a string")
        text = text.strip()
        if not text:
            log.debug("%s: skipping empty %s text", context, lang)
            continue
        texts[lang] = text
    if not texts:
        raise MalformedFile(f"{context}: no non-empty question strings")
    return texts


def _parse_answers(raw, context: str) -> AnswerSet:
    if raw is None:
        return AnswerSet.empty()
    if not isinstance(raw, list):
        raise MalformedFile(f"{context}: 'answers' must be an array")
    if not raw:
        return AnswerSet.empty()
    if len(raw) > 1:
        log.debug("%s: %d answer documents, using the first", context, len(raw))
    try:
        return AnswerSet.from_results_json(raw[0], context=context)
    except MalformedTerm as exc:
        raise MalformedFile(str(exc)) from exc


def load_qald(path, source: Source) -> Benchmark:
    """Load a QALD-format JSON file (top-level `questions` array)."""
    with open(path, encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except ValueError as exc:
            raise MalformedFile(f"{path}: not JSON: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("questions"), list):
        raise MalformedFile(f"{path}: expected a top-level 'questions' array")
    entries = data["questions"]
    if not entries:
        raise MalformedFile(f"{path}: benchmark contains zero questions")
    items = []
    seen: set[str] = set()
    for index, entry in enumerate(entries):
        context = f"{path}: questions[{index}]"
        if not isinstance(entry, dict):
            raise MalformedFile(f"{context}: expected an object")
        qid = entry.get("id")
        if qid is None:
            raise MalformedFile(f"{context}: missing id")
        qid = str(qid)
        if qid in seen:
            raise DuplicateId(f"{context}: duplicate id {qid!r}")
        seen.add(qid)
        texts = _parse_texts(entry.get("question"), f"{context}.question")
        query = entry.get("query")
        if not isinstance(query, dict) or not isinstance(query.get("sparql"), str) \
                or not query["sparql"].strip():
            raise MalformedFile(f"{context}.query.sparql: missing or empty")
        sparql = query["sparql"].strip()
        if "answers" not in entry:
            raise MalformedFile(f"{context}: missing answers section")
        answers = _parse_answers(entry["answers"], f"{context}.answers")
        items.append(
            QAItem(
                id=qid,
                texts=texts,
                gold_sparql=sparql,
                gold_answers=answers,
                source=source,
                unparseable=not _check_lexable(sparql),
            )
        )
    name = str(path).rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return Benchmark(name=name, items=tuple(items))


def load_lcquad(path, include_paraphrases: bool = False) -> Benchmark:
    """Load an LC-QuAD 2.0 JSON array; English texts and no gold answers."""
    with open(path, encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except ValueError as exc:
            raise MalformedFile(f"{path}: not JSON: {exc}") from exc
    if not isinstance(data, list) or not data:
        raise MalformedFile(f"{path}: expected a non-empty array of records")
    items = []
    seen: set[str] = set()
    for index, entry in enumerate(data):
        context = f"{path}: [{index}]"
        if not isinstance(entry, dict):
            raise MalformedFile(f"{context}: expected an object")
        uid = entry.get("uid")
        if uid is None:
            raise MalformedFile(f"{context}: missing uid")
        sparql = entry.get("sparql_wikidata")
        if not isinstance(sparql, str) or not sparql.strip():
            raise MalformedFile(f"{context}.sparql_wikidata: missing or empty")
        question = entry.get("question")
        if not isinstance(question, str) or not question.strip():
            raise MalformedFile(f"{context}.question: missing or empty")
        variants = [(str(uid), question.strip())]
        if include_paraphrases:
            para = entry.get("paraphrased_question")
            if isinstance(para, str) and para.strip():
                variants.append((f"{uid}-para", para.strip()))
        for qid, text in variants:
            if qid in seen:
                raise DuplicateId(f"{context}: duplicate uid {qid!r}")
            seen.add(qid)
            items.append(
                QAItem(
                    id=qid,
                    texts={"en": text},
                    gold_sparql=sparql.strip(),
                    gold_answers=AnswerSet.empty(),
                    source=Source.LCQUAD2,
                    unparseable=not _check_lexable(sparql),
                )
            )
    name = str(path).rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return Benchmark(name=name, items=tuple(items))


def save_qald(benchmark: Benchmark, path) -> None:
    """Write a Benchmark back out in QALD JSON form, deterministically."""
    questions = []
    for item in benchmark.items:
        questions.append(
            {
                "id": item.id,
                "question": [
                    {"language": lang, "string": item.texts[lang]}
                    for lang in sorted(item.texts)
                ],
                "query": {"sparql": item.gold_sparql},
                "answers": [item.gold_answers.to_results_json()],
            }
        )
    with open(path, "w", encoding="utf-8") as handle:
        json.dump({"questions": questions}, handle, ensure_ascii=False, indent=1)
        handle.write("\n")


def filter_empty_gold(benchmark: Benchmark) -> Benchmark:
    """Keep only items whose gold answer set is non-empty; order preserved."""
    kept = tuple(
        item
        for item in benchmark.items
        if item.gold_answers.kind is not AnswerKind.EMPTY
        and not item.gold_answers.is_empty
    )
    return replace(benchmark, items=kept)


@dataclass
class ProviderSet:
    """Everything export/evaluation needs to turn an item into model I/O."""

    annotations: AnnotationProvider
    entities: EntityProvider
    tokenizer: Tokenizer
    prefix_table: PrefixTable = field(default_factory=default_prefix_table)


def build_aux(
    text: str, lang: str, cfg: ComposerConfig, providers: ProviderSet
) -> AuxiliaryBundle:
    pos = dep = depths = entity_ids = None
    if cfg.use_ling:
        annotated = annotate(text, lang, providers.annotations)
        pos = annotated.pos_tags
        dep = annotated.dep_tags
        depths = annotated.depths
    if cfg.use_ent:
        links = link_entities(text, lang, providers.entities)
        entity_ids = [link.kb_id for link in links]
    return AuxiliaryBundle(pos_tags=pos, dep_tags=dep, depths=depths,
                           entity_ids=entity_ids)


def export_training_pairs(
    benchmark: Benchmark,
    lang: str,
    cfg: ComposerConfig,
    providers: ProviderSet,
):
    """Yield one {"id","lang","input","target"} record per item.

    Items whose gold query does not lex are skipped (counted and logged);
    an item without text in the requested language aborts the export.
    """
    skipped = 0
    for item in benchmark.items:
        text = item.text(lang)
        if item.unparseable:
            skipped += 1
            continue
        target = encode_target(item.gold_sparql, providers.prefix_table)
        aux = build_aux(text, lang, cfg, providers)
        composed = compose(text, aux, cfg, providers.tokenizer, source_id=item.id)
        yield {
            "id": item.id,
            "lang": lang,
            "input": composed.text,
            "target": target.text,
        }
    if skipped:
        log.warning("export skipped %d items with unparseable gold queries", skipped)


def write_training_pairs(records, path) -> int:
    """Write export records as UTF-8 JSON-Lines; returns the record count."""
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            handle.write("\n")
            count += 1
    return count
