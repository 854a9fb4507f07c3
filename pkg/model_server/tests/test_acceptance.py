"""Acceptance suite for the training/serving component.

Criteria: the toy fine-tune must overfit its 200 training pairs (exact
match >= 0.95), generalize to held-out paraphrases (>= 0.9), show a
strictly decreasing loss curve over the first three epochs, and the
upstream pipeline must complete an evaluation run against the served
model with macro F1 >= 0.9, with every separator/pad lexeme atomic under
/tokenize.
"""

import json
import subprocess
import sys
from pathlib import Path

from model_server.checkpoint import build_base_checkpoint, load_checkpoint
from model_server.config import TrainConfig
from model_server.data import read_pairs
from model_server.train import exact_match, read_loss_curve, train

from conftest import REPO_ROOT, TOY_DIR


def test_toy_overfit_exact_match(trained_checkpoint, toy_paths):
    model, tokenizer = load_checkpoint(str(trained_checkpoint))
    rate = exact_match(model, tokenizer, read_pairs(toy_paths["train"]))
    print(f"[{'PASS' if rate >= 0.95 else 'FAIL'}] train exact-match {rate:.3f} (>= 0.95)")
    assert rate >= 0.95


def test_toy_heldout_paraphrases(trained_checkpoint, toy_paths):
    model, tokenizer = load_checkpoint(str(trained_checkpoint))
    rate = exact_match(model, tokenizer, read_pairs(toy_paths["heldout"]))
    print(f"[{'PASS' if rate >= 0.9 else 'FAIL'}] held-out exact-match {rate:.3f} (>= 0.9)")
    assert rate >= 0.9


def test_loss_curve_strictly_decreases_first_three_epochs(trained_checkpoint):
    curve = read_loss_curve(trained_checkpoint)
    train_losses = [t for _, t, _ in curve[:4]]
    assert len(train_losses) >= 3
    for earlier, later in zip(train_losses, train_losses[1:]):
        assert later < earlier
    print(f"[PASS] loss strictly decreasing over first epochs: "
          f"{[round(x, 3) for x in train_losses]}")


def test_short_double_run_determinism(tmp_path, toy_paths):
    """Identical config + seed must reproduce the loss curve exactly on
    this host (checked at reduced scale to keep the suite fast)."""
    from model_server.data import vocabulary

    words = vocabulary([toy_paths["train"], toy_paths["heldout"]])
    base = build_base_checkpoint(words, tmp_path / "base", pretrain_steps=0)
    curves = []
    for run in ("a", "b"):
        cfg = TrainConfig(base_checkpoint=str(base), max_epochs=5,
                          patience=5, seed=99)
        out = train(toy_paths["train"], cfg, tmp_path / f"run-{run}")
        curves.append(read_loss_curve(out))
    assert curves[0] == curves[1]
    print("[PASS] double-run loss curves identical")


def _run_kgqa(*argv) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "kgqa.cli", *argv],
        capture_output=True,
        text=True,
        cwd=REPO_ROOT,
    )


def _toy_config_with_absolute_paths() -> dict:
    """The shipped toy config resolves paths against its own directory;
    anchor them before writing a modified copy elsewhere."""
    config = json.loads((TOY_DIR / "config.toy.json").read_text())
    for providers in config["providers"].values():
        for key, paths in providers.items():
            providers[key] = [str(TOY_DIR / p) for p in paths]
    store = config["endpoint"]["url"].removeprefix("fixture:")
    config["endpoint"]["url"] = f"fixture:{TOY_DIR / store}"
    return config


def test_protocol_conformance_end_to_end(served_model, tmp_path):
    """The upstream evaluate command, pointed at this server, completes
    with macro F1 >= 0.9 on the toy benchmark."""
    config = _toy_config_with_absolute_paths()
    config["backend"]["url"] = served_model
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))

    out = tmp_path / "report"
    result = _run_kgqa(
        "--config", str(config_path), "evaluate",
        str(TOY_DIR / "toy-test.json"), "--lang", "en", "--out", str(out),
    )
    assert result.returncode == 0, result.stderr
    report = json.loads(Path(f"{out}.json").read_text())
    print(f"[{'PASS' if report['macro_f1'] >= 0.9 else 'FAIL'}] "
          f"evaluate against served model: macro_f1 {report['macro_f1']:.3f}")
    assert report["macro_f1"] >= 0.9
    assert report["n_questions"] == 50


def test_tokenize_atomicity_via_upstream_validation(served_model, tmp_path):
    """The upstream composer accepts this server's /tokenize as the
    authoritative tokenizer for all configured separator/pad lexemes."""
    config = _toy_config_with_absolute_paths()
    config["backend"]["url"] = served_model
    config["tokenizer"] = {"kind": "remote", "url": served_model}
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))

    result = _run_kgqa("--config", str(config_path), "validate-config")
    assert result.returncode == 0, result.stderr
    assert "atomic" in result.stdout
    print("[PASS] separator/pad lexemes atomic under served /tokenize")
