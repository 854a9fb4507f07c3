"""Command-line entry point.

Subcommands cover dataset preparation, gold-answer refreshing, bulk
annotation precomputation, composer config validation, and end-to-end
benchmarking. Every output file gets a sibling run manifest.

Exit codes: 0 success, 1 usage error, 2 data error, 3 systemic
backend/endpoint failure.
"""

from __future__ import annotations

import json
import logging
import shlex
import sys
from pathlib import Path

import click

from kgqa.compose import (
    ComposerConfig,
    RemoteTokenizer,
    Tokenizer,
    WhitespaceTokenizer,
    validate_config,
)
from kgqa.datasets import (
    Benchmark,
    ProviderSet,
    Source,
    build_aux,
    export_training_pairs,
    filter_empty_gold,
    load_lcquad,
    load_qald,
    save_qald,
    write_training_pairs,
)
from kgqa.endpoint import EndpointConfig
from kgqa.entities import (
    EntityProvider,
    FixtureEntityProvider,
    RemoteEntityProvider,
    link_entities,
)
from kgqa.errors import KgqaError, SystemicFailure
from kgqa.generate import (
    ConstantBackend,
    EmptyBackend,
    GeneratorBackend,
    GoldEchoBackend,
    RemoteBackend,
)
from kgqa.linguistic import (
    AnnotationProvider,
    FixtureAnnotationProvider,
    RemoteAnnotationProvider,
    annotate,
)
from kgqa.metrics import emit_report, render_table
from kgqa.pipeline import (
    RunManifest,
    evaluate_benchmark,
    file_sha256,
    fingerprint,
    gold_echo_targets,
    refresh_answers,
)
from kgqa.sparql import PrefixTable, default_prefix_table, load_prefix_table

log = logging.getLogger(__name__)

SOURCES = {
    "qald9plus": Source.QALD9PLUS,
    "qald10": Source.QALD10,
    "lcquad": Source.LCQUAD2,
}


class Settings:
    """Runtime objects materialized from the JSON config file.

    Relative paths inside the config resolve against the config file's
    own directory, so config + fixtures travel together.
    """

    def __init__(self, config_path: str | None, seed: int, overrides: dict):
        self.config_path = config_path or ""
        self.seed = seed
        self.raw: dict = {}
        self._base_dir = Path(".")
        if config_path:
            with open(config_path, encoding="utf-8") as handle:
                self.raw = json.load(handle)
            self._base_dir = Path(config_path).resolve().parent
        self.config_hash = file_sha256(config_path) if config_path else ""
        composer_raw = dict(self.raw.get("composer", {}))
        composer_raw.update({k: v for k, v in overrides.items() if v is not None})
        self.composer = ComposerConfig.from_dict(composer_raw)
        self.max_workers = int(self.raw.get("max_workers", 4))
        table_path = self.raw.get("prefix_table")
        self.prefix_table: PrefixTable = (
            load_prefix_table(self._resolve(table_path))
            if table_path else default_prefix_table()
        )
        self._tokenizer: Tokenizer | None = None

    def _resolve(self, path: str) -> str:
        candidate = Path(path)
        if candidate.is_absolute():
            return str(candidate)
        return str(self._base_dir / candidate)

    @property
    def tokenizer(self) -> Tokenizer:
        if self._tokenizer is None:
            spec = self.raw.get("tokenizer", {"kind": "whitespace"})
            if spec.get("kind", "whitespace") == "whitespace":
                self._tokenizer = WhitespaceTokenizer()
            elif spec["kind"] == "remote":
                self._tokenizer = RemoteTokenizer(
                    spec["url"], timeout_s=float(spec.get("timeout_s", 30))
                )
            else:
                raise KgqaError(f"unknown tokenizer kind {spec.get('kind')!r}")
        return self._tokenizer

    def annotation_provider(self, lang: str) -> AnnotationProvider:
        spec = self.raw.get("providers", {}).get(lang, {}).get("annotations")
        if spec is None:
            raise KgqaError(f"no annotation provider configured for {lang!r}")
        if isinstance(spec, dict) and spec.get("kind") == "remote":
            return RemoteAnnotationProvider(
                spec["url"],
                languages=spec.get("languages"),
                timeout_s=float(spec.get("timeout_s", 30)),
            )
        paths = [spec] if isinstance(spec, str) else list(spec)
        return FixtureAnnotationProvider([self._resolve(p) for p in paths])

    def entity_provider(self, lang: str) -> EntityProvider:
        spec = self.raw.get("providers", {}).get(lang, {}).get("entities")
        if spec is None:
            raise KgqaError(f"no entity provider configured for {lang!r}")
        if isinstance(spec, dict) and spec.get("kind") == "remote":
            return RemoteEntityProvider(
                spec["url"],
                components=spec.get("components"),
                languages=spec.get("languages"),
                timeout_s=float(spec.get("timeout_s", 30)),
            )
        paths = [spec] if isinstance(spec, str) else list(spec)
        return FixtureEntityProvider([self._resolve(p) for p in paths])

    def provider_set(self, lang: str) -> ProviderSet:
        return ProviderSet(
            annotations=self.annotation_provider(lang),
            entities=self.entity_provider(lang),
            tokenizer=self.tokenizer,
            prefix_table=self.prefix_table,
        )

    def endpoint(self) -> EndpointConfig:
        spec = self.raw.get("endpoint")
        if not spec:
            raise KgqaError("no endpoint configured")
        url = spec["url"]
        if url.startswith("fixture:"):
            url = "fixture:" + self._resolve(url[len("fixture:"):])
        return EndpointConfig(
            url=url,
            timeout_s=float(spec.get("timeout_s", 60)),
            max_retries=int(spec.get("max_retries", 2)),
            user_agent=spec.get("user_agent", EndpointConfig.__dataclass_fields__["user_agent"].default),
        )

    def backend(self, benchmark: Benchmark, kind_override: str | None = None) -> GeneratorBackend:
        spec = dict(self.raw.get("backend", {"kind": "gold-echo"}))
        if kind_override:
            spec["kind"] = kind_override
        kind = spec.get("kind", "gold-echo")
        if kind == "gold-echo":
            return GoldEchoBackend(gold_echo_targets(benchmark, self.prefix_table))
        if kind == "empty":
            return EmptyBackend()
        if kind == "constant":
            return ConstantBackend(spec.get("text", ""))
        if kind == "remote":
            return RemoteBackend(
                spec["url"], timeout_s=float(spec.get("timeout_s", 60))
            )
        raise KgqaError(f"unknown backend kind {kind!r}")

    def max_output_tokens(self) -> int:
        return int(self.raw.get("backend", {}).get("max_output_tokens", 256))

    def fingerprint_config(self, lang: str, dataset_hash: str) -> str:
        payload = {
            "composer": self.composer.to_dict(),
            "endpoint": self.raw.get("endpoint", {}),
            "backend": self.raw.get("backend", {}),
            "lang": lang,
        }
        return fingerprint(payload, dataset_hash, self.seed)


def _load_dataset(path: str, fmt: str | None) -> Benchmark:
    if fmt is None:
        with open(path, encoding="utf-8") as handle:
            head = handle.read(64).lstrip()
        fmt = "lcquad" if head.startswith("[") else "qald9plus"
    if fmt == "lcquad":
        return load_lcquad(path)
    return load_qald(path, SOURCES[fmt])


def _write_manifest(out_path: Path, settings: Settings, dataset: str,
                    backend_name: str, lang: str, fp: str) -> None:
    manifest = RunManifest(
        command=" ".join(shlex.quote(a) for a in sys.argv),
        config_path=settings.config_path,
        config_hash=settings.config_hash,
        dataset_path=str(dataset),
        dataset_hash=file_sha256(dataset),
        backend=backend_name,
        lang=lang,
        seed=settings.seed,
        fingerprint=fp,
    )
    manifest.write(str(out_path) + ".manifest.json")


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="JSON run configuration.")
@click.option("--verbose", is_flag=True, help="Debug-level logging.")
@click.option("--seed", type=int, default=0,
              help="Fingerprint salt; the pipeline itself is deterministic.")
@click.pass_context
def cli(ctx, config_path, verbose, seed):
    """Multilingual text-to-SPARQL pipeline and evaluation harness."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    ctx.obj = {"config_path": config_path, "seed": seed}


def _settings(ctx, ling=None, ent=None) -> Settings:
    overrides = {"use_ling": ling, "use_ent": ent}
    return Settings(ctx.obj["config_path"], ctx.obj["seed"], overrides)


@cli.command()
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(sorted(SOURCES)), default=None,
              help="Dataset format; sniffed when omitted.")
@click.option("--lang", required=True, help="Question language to export.")
@click.option("--ling/--no-ling", "ling", default=None,
              help="Include linguistic context blocks.")
@click.option("--ent/--no-ent", "ent", default=None,
              help="Include the entity block.")
@click.option("--out", required=True, type=click.Path())
@click.pass_context
def prepare(ctx, dataset, fmt, lang, ling, ent, out):
    """Export composed-input/canonical-target training pairs as JSONL."""
    settings = _settings(ctx, ling, ent)
    benchmark = _load_dataset(dataset, fmt)
    providers = settings.provider_set(lang)
    records = export_training_pairs(benchmark, lang, settings.composer, providers)
    count = write_training_pairs(records, out)
    fp = settings.fingerprint_config(lang, file_sha256(dataset))
    _write_manifest(Path(out), settings, dataset, "n/a", lang, fp)
    click.echo(f"wrote {count} records to {out}")


@cli.command("refresh-answers")
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(sorted(SOURCES)), default=None)
@click.option("--out", required=True, type=click.Path())
@click.pass_context
def refresh_answers_cmd(ctx, dataset, fmt, out):
    """Re-run gold queries against the endpoint, drop empty-answer items."""
    settings = _settings(ctx)
    benchmark = _load_dataset(dataset, fmt)
    endpoint_cfg = settings.endpoint()
    refreshed, stats = refresh_answers(benchmark, endpoint_cfg)
    if stats["error"] and len(stats["error"]) == len(benchmark.items):
        raise SystemicFailure("endpoint unreachable for every item")
    filtered = filter_empty_gold(refreshed)
    save_qald(filtered, out)
    fp = settings.fingerprint_config("*", file_sha256(dataset))
    _write_manifest(Path(out), settings, dataset, "n/a", "*", fp)
    if stats["empty"]:
        log.info("dropped %d items with empty answers: %s",
                 len(stats["empty"]), " ".join(stats["empty"]))
    if stats["error"]:
        log.warning("dropped %d items with endpoint errors: %s",
                    len(stats["error"]), " ".join(stats["error"]))
    click.echo(
        f"kept {len(filtered.items)} of {len(benchmark.items)} items "
        f"({len(stats['empty'])} empty, {len(stats['error'])} failed)"
    )


@cli.command()
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(sorted(SOURCES)), default=None)
@click.option("--lang", required=True)
@click.option("--ling/--no-ling", "ling", default=None)
@click.option("--ent/--no-ent", "ent", default=None)
@click.option("--backend", "backend_kind", default=None,
              type=click.Choice(["gold-echo", "empty", "remote"]),
              help="Override the configured backend kind.")
@click.option("--matrix", default=None,
              help="Comma-separated feature axes to ablate, e.g. 'ling,ent'.")
@click.option("--out", required=True, type=click.Path(),
              help="Report path stem; .json/.txt/.manifest.json are added.")
@click.pass_context
def evaluate(ctx, dataset, fmt, lang, ling, ent, backend_kind, matrix, out):
    """Run the full pipeline over a benchmark and write report files."""
    if matrix:
        axes = [a.strip() for a in matrix.split(",") if a.strip()]
        bad = [a for a in axes if a not in ("ling", "ent")]
        if bad:
            raise click.UsageError(f"unknown matrix axes: {bad}")
        fingerprints = []
        for use_ling in (False, True) if "ling" in axes else (ling,):
            for use_ent in (False, True) if "ent" in axes else (ent,):
                cell = f"ling{int(bool(use_ling))}_ent{int(bool(use_ent))}"
                fp = _evaluate_once(ctx, dataset, fmt, lang, use_ling, use_ent,
                                    backend_kind, f"{out}.{cell}")
                fingerprints.append(fp)
        if len(set(fingerprints)) != len(fingerprints):
            raise KgqaError("matrix cells produced colliding fingerprints")
        click.echo(f"{len(fingerprints)} matrix reports written to {out}.*")
        return
    _evaluate_once(ctx, dataset, fmt, lang, ling, ent, backend_kind, out)


def _evaluate_once(ctx, dataset, fmt, lang, ling, ent, backend_kind, out) -> str:
    settings = _settings(ctx, ling, ent)
    benchmark = _load_dataset(dataset, fmt)
    providers = settings.provider_set(lang)
    backend = settings.backend(benchmark, backend_kind)
    endpoint_cfg = settings.endpoint()
    fp = settings.fingerprint_config(lang, file_sha256(dataset))
    report = evaluate_benchmark(
        benchmark,
        lang,
        settings.composer,
        providers,
        backend,
        endpoint_cfg,
        max_output_tokens=settings.max_output_tokens(),
        max_workers=settings.max_workers,
        run_fingerprint=fp,
    )
    emit_report(report, f"{out}.json", "JSON")
    emit_report(report, f"{out}.txt", "TABLE")
    _write_manifest(Path(out), settings, dataset, backend.name, lang, fp)
    click.echo(render_table(report), nl=False)
    return fp


@cli.command("annotate")
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(sorted(SOURCES)), default=None)
@click.option("--langs", required=True,
              help="Comma-separated languages to precompute.")
@click.option("--out-dir", required=True, type=click.Path())
@click.pass_context
def annotate_cmd(ctx, dataset, fmt, langs, out_dir):
    """Bulk-precompute annotation and entity fixtures for a dataset."""
    settings = _settings(ctx)
    benchmark = _load_dataset(dataset, fmt)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for lang in [l.strip() for l in langs.split(",") if l.strip()]:
        ann_provider = settings.annotation_provider(lang)
        ent_provider = settings.entity_provider(lang)
        ann_records = []
        ent_records = []
        for item in benchmark.items:
            if lang not in item.texts:
                continue
            text = item.texts[lang]
            annotated = annotate(text, lang, ann_provider)
            ann_records.append({
                "text": text,
                "lang": lang,
                "tokens": [
                    {"surface": t.surface, "pos": t.pos, "dep": t.dep_rel,
                     "head": t.head_index}
                    for t in annotated.tokens
                ],
            })
            links = link_entities(text, lang, ent_provider)
            ent_records.append({
                "text": text,
                "lang": lang,
                "links": [
                    {"surface": l.surface, "kb_id": l.kb_id,
                     "start": l.start, "end": l.end}
                    for l in links
                ],
            })
        for name, records in (("annotations", ann_records),
                              ("entities", ent_records)):
            path = out / f"{name}.{lang}.jsonl"
            with open(path, "w", encoding="utf-8") as handle:
                for record in records:
                    handle.write(json.dumps(record, ensure_ascii=False,
                                            sort_keys=True) + "\n")
            click.echo(f"wrote {len(records)} records to {path}")
    fp = settings.fingerprint_config(langs, file_sha256(dataset))
    _write_manifest(out / "annotate", settings, dataset, "n/a", langs, fp)


@cli.command("validate-config")
@click.option("--dataset", type=click.Path(exists=True), default=None,
              help="Optional probe corpus for width statistics.")
@click.option("--format", "fmt", type=click.Choice(sorted(SOURCES)), default=None)
@click.option("--lang", default="en")
@click.pass_context
def validate_config_cmd(ctx, dataset, fmt, lang):
    """Check separator/pad atomicity and report per-block content sizes."""
    settings = _settings(ctx)
    probe = None
    if dataset:
        benchmark = _load_dataset(dataset, fmt)
        providers = settings.provider_set(lang)
        probe = []
        for item in benchmark.items:
            if lang not in item.texts:
                continue
            text = item.texts[lang]
            probe.append((text, build_aux(text, lang, settings.composer, providers)))
    result = validate_config(settings.composer, settings.tokenizer, probe)
    click.echo("separators/pad: atomic")
    for block, p95 in sorted(result.p95_lengths.items()):
        width = result.widths[block]
        verdict = "ok" if p95 <= width else "OVERFLOW"
        click.echo(f"{block}: p95 content length {p95} / width {width} {verdict}")


def main(argv=None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        return 1
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except SystemicFailure as exc:
        click.echo(f"systemic failure: {exc}", err=True)
        return 3
    except KgqaError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
