"""Per-question evaluation driver and run reproducibility records.

The driver owns all parallelism: questions are annotated, composed,
generated, decoded, executed and scored in a bounded worker pool, and the
aggregation order is the dataset order, so reports are byte-identical
across re-runs with fixture providers.
"""

from __future__ import annotations

import concurrent.futures
import datetime
import hashlib
import json
import logging
from dataclasses import dataclass, field, replace

from kgqa.answers import AnswerSet
from kgqa.compose import ComposerConfig, compose
from kgqa.datasets import Benchmark, ProviderSet, build_aux
from kgqa.endpoint import EndpointConfig, execute
from kgqa.errors import (
    BackendUnavailable,
    GenerationTimeout,
    NotATree,
    ProviderUnavailable,
    SystemicFailure,
    UnsupportedLanguage,
)
from kgqa.generate import GenerationRequest, GeneratorBackend, generate
from kgqa.metrics import EvalReport, aggregate, score_question
from kgqa.sparql import decode_prediction, encode_target

log = logging.getLogger(__name__)

DEFAULT_MAX_WORKERS = 4


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def fingerprint(config: dict, dataset_hash: str, seed: int = 0) -> str:
    """Stable id for a run setup: config + dataset + seed, nothing else."""
    payload = json.dumps(
        {"config": config, "dataset": dataset_hash, "seed": seed},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass
class RunManifest:
    command: str
    config_path: str
    config_hash: str
    dataset_path: str
    dataset_hash: str
    backend: str
    lang: str
    seed: int
    fingerprint: str
    created_utc: str = field(
        default_factory=lambda: datetime.datetime.now(datetime.timezone.utc)
        .isoformat(timespec="seconds")
    )

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.__dict__, handle, ensure_ascii=False, indent=1,
                      sort_keys=True)
            handle.write("\n")


def gold_echo_targets(benchmark: Benchmark, prefix_table) -> dict:
    """id -> encoded gold target; unparseable golds map to abstention."""
    targets = {}
    for item in benchmark.items:
        if item.unparseable:
            targets[item.id] = ""
        else:
            targets[item.id] = encode_target(item.gold_sparql, prefix_table).text
    return targets


def evaluate_benchmark(
    benchmark: Benchmark,
    lang: str,
    composer_cfg: ComposerConfig,
    providers: ProviderSet,
    backend: GeneratorBackend,
    endpoint_cfg: EndpointConfig,
    max_output_tokens: int = 256,
    max_workers: int = DEFAULT_MAX_WORKERS,
    run_fingerprint: str = "",
) -> EvalReport:
    """Full generate -> decode -> execute -> score pass over a benchmark.

    Per-question faults are scored as unanswered; an unhealthy backend at
    startup aborts the run.
    """
    if not backend.healthy():
        raise SystemicFailure(f"backend {backend.name} failed its health probe")
    # Fail fast on data problems before spinning up workers.
    for item in benchmark.items:
        item.text(lang)

    def run_item(item):
        try:
            text = item.text(lang)
            aux = build_aux(text, lang, composer_cfg, providers)
            composed = compose(text, aux, composer_cfg, providers.tokenizer,
                               source_id=item.id)
            request = GenerationRequest(
                input=composed,
                max_output_tokens=max_output_tokens,
                backend_params={"question_id": item.id},
            )
            try:
                result = generate(request, backend)
                canonical = result.canonical
            except (BackendUnavailable, GenerationTimeout) as exc:
                log.warning("item %s: backend fault: %s", item.id, exc)
                return score_question(item.gold_answers, AnswerSet.empty(),
                                      item.id)
            decoded = decode_prediction(canonical, providers.prefix_table)
            answers = execute(decoded, endpoint_cfg)
            return score_question(item.gold_answers, answers, item.id)
        except (ProviderUnavailable, UnsupportedLanguage, NotATree) as exc:
            log.warning("item %s scored as unanswered: %s", item.id, exc)
            return score_question(item.gold_answers, AnswerSet.empty(), item.id)

    if max_workers <= 1:
        scores = [run_item(item) for item in benchmark.items]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
            scores = list(pool.map(run_item, benchmark.items))
    return aggregate(scores, config_fingerprint=run_fingerprint)


def refresh_answers(
    benchmark: Benchmark, endpoint_cfg: EndpointConfig
) -> tuple[Benchmark, dict]:
    """Re-run every gold query and rewrite the stored answers.

    Returns the refreshed (unfiltered) benchmark plus a stats dict with
    separately counted empty results and endpoint errors; failed items end
    up with empty answers so the caller's filter drops them visibly.
    """
    refreshed = []
    stats = {"kept": 0, "empty": [], "error": []}
    for item in benchmark.items:
        result = execute(item.gold_sparql, endpoint_cfg)
        if isinstance(result, AnswerSet):
            answers = result
            if answers.is_empty:
                stats["empty"].append(item.id)
            else:
                stats["kept"] += 1
        else:
            log.warning("item %s: endpoint failure %s (%s)", item.id,
                        result.kind.value, result.detail)
            stats["error"].append(item.id)
            answers = AnswerSet.empty()
        refreshed.append(replace(item, gold_answers=answers))
    return replace(benchmark, items=tuple(refreshed)), stats
