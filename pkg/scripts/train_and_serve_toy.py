#!/usr/bin/env python3
"""End-to-end demo: build the toy base checkpoint, fine-tune it on the
prepared toy pairs, serve it, and evaluate the pipeline against it.

Requires both packages installed (pip install -e . -e model_server).
Takes a few minutes on CPU; artifacts land under build/toy/.
"""

import json
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
TOY = ROOT / "fixtures" / "toy"
BUILD = ROOT / "build" / "toy"
PORT = 8930


def run(*cmd, **kwargs) -> None:
    print("+", " ".join(str(c) for c in cmd))
    result = subprocess.run([str(c) for c in cmd], cwd=ROOT, **kwargs)
    if result.returncode != 0:
        sys.exit(result.returncode)


def main() -> None:
    BUILD.mkdir(parents=True, exist_ok=True)
    base = BUILD / "base"
    ckpt = BUILD / "trained"
    run(sys.executable, "-m", "model_server.cli", "build-base",
        TOY / "toy-train.pairs.jsonl", TOY / "toy-heldout.pairs.jsonl",
        "--out", base)
    run(sys.executable, "-m", "model_server.cli", "train",
        TOY / "toy-train.pairs.jsonl", "--base", base, "--out", ckpt)
    run(sys.executable, "-m", "model_server.cli", "eval-em",
        TOY / "toy-train.pairs.jsonl", "--checkpoint", ckpt)
    run(sys.executable, "-m", "model_server.cli", "eval-em",
        TOY / "toy-heldout.pairs.jsonl", "--checkpoint", ckpt)

    server = subprocess.Popen(
        [sys.executable, "-m", "model_server.cli", "serve",
         "--checkpoint", str(ckpt), "--port", str(PORT)],
        cwd=ROOT,
    )
    try:
        import time

        import requests

        deadline = time.time() + 60
        while time.time() < deadline:
            try:
                if requests.get(f"http://127.0.0.1:{PORT}/health",
                                timeout=2).status_code == 200:
                    break
            except requests.RequestException:
                time.sleep(0.5)
        run(sys.executable, "-m", "kgqa.cli", "--config",
            TOY / "config.toy.json", "evaluate", TOY / "toy-test.json",
            "--lang", "en", "--out", BUILD / "report")
        print(json.loads((BUILD / "report.json").read_text())["macro_f1"])
    finally:
        server.terminate()
        server.wait(timeout=10)


if __name__ == "__main__":
    main()
