#!/usr/bin/env python3
"""Regenerate the committed fixture corpus under fixtures/.

Benchmark files, the recorded endpoint store, annotation/entity fixtures,
the toy training corpus, ready-to-use run configs, and the prepared toy
JSONL pairs are all derived deterministically; re-running this script must
leave the tree unchanged.
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from kgqa.compose import ComposerConfig  # noqa: E402
from kgqa.datasets import (  # noqa: E402
    ProviderSet,
    Source,
    export_training_pairs,
    load_qald,
    write_training_pairs,
)
from kgqa.compose import WhitespaceTokenizer  # noqa: E402
from kgqa.entities import FixtureEntityProvider  # noqa: E402
from kgqa.linguistic import FixtureAnnotationProvider  # noqa: E402
from kgqa.synth import generate_main_corpus, generate_toy_corpus  # noqa: E402


TOY_COMPOSER = ComposerConfig(
    block_widths={"QUESTION": 16, "POS": 12, "DEP": 12, "DEPTH": 12, "ENT": 4}
)


def write_configs(fixtures: Path) -> None:
    # Paths are relative to the config file's own directory.
    eval_config = {
        "composer": ComposerConfig().to_dict(),
        "tokenizer": {"kind": "whitespace"},
        "prefix_table": "prefixes.tsv",
        "providers": {
            lang: {
                "annotations": [f"annotations.{lang}.jsonl"],
                "entities": [f"entities.{lang}.jsonl"],
            }
            for lang in ("en", "de")
        },
        "endpoint": {
            "url": "fixture:endpoint_store.json",
            "timeout_s": 30,
            "max_retries": 2,
        },
        "backend": {"kind": "gold-echo", "max_output_tokens": 256},
        "max_workers": 4,
    }
    with open(fixtures / "config.eval.json", "w", encoding="utf-8") as handle:
        json.dump(eval_config, handle, indent=1, sort_keys=True)
        handle.write("\n")

    toy = fixtures / "toy"
    toy_config = {
        "composer": TOY_COMPOSER.to_dict(),
        "tokenizer": {"kind": "whitespace"},
        "providers": {
            lang: {
                "annotations": [f"annotations.{lang}.jsonl"],
                "entities": [f"entities.{lang}.jsonl"],
            }
            for lang in ("en", "de")
        },
        "endpoint": {
            "url": "fixture:toy_store.json",
            "timeout_s": 30,
            "max_retries": 0,
        },
        "backend": {
            "kind": "remote",
            "url": "http://127.0.0.1:8930",
            "timeout_s": 120,
            "max_output_tokens": 96,
        },
        "max_workers": 2,
    }
    with open(toy / "config.toy.json", "w", encoding="utf-8") as handle:
        json.dump(toy_config, handle, indent=1, sort_keys=True)
        handle.write("\n")


def write_toy_pairs(fixtures: Path) -> None:
    toy = fixtures / "toy"
    cfg = TOY_COMPOSER
    for split, source in (("train", "toy-train.json"), ("heldout", "toy-test.json")):
        benchmark = load_qald(toy / source, Source.QALD10)
        records = []
        for lang in ("en", "de"):
            providers = ProviderSet(
                annotations=FixtureAnnotationProvider(
                    [toy / f"annotations.{lang}.jsonl"]
                ),
                entities=FixtureEntityProvider([toy / f"entities.{lang}.jsonl"]),
                tokenizer=WhitespaceTokenizer(),
            )
            records.extend(export_training_pairs(benchmark, lang, cfg, providers))
        out = toy / f"toy-{split}.pairs.jsonl"
        count = write_training_pairs(records, out)
        print(f"wrote {count} pairs to {out}")


def main() -> None:
    fixtures = ROOT / "fixtures"
    for label, path in generate_main_corpus(fixtures).items():
        print(f"main {label}: {path}")
    for label, path in generate_toy_corpus(fixtures / "toy").items():
        print(f"toy {label}: {path}")
    write_configs(fixtures)
    write_toy_pairs(fixtures)


if __name__ == "__main__":
    main()
