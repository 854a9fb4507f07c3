import hashlib
import json
import os
import socket
import sys
import time
from pathlib import Path

import pytest

HERE = Path(__file__).resolve().parent
PACKAGE_ROOT = HERE.parent
REPO_ROOT = PACKAGE_ROOT.parent
SRC = PACKAGE_ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

TOY_DIR = REPO_ROOT / "fixtures" / "toy"
TRAIN_PAIRS = TOY_DIR / "toy-train.pairs.jsonl"
HELDOUT_PAIRS = TOY_DIR / "toy-heldout.pairs.jsonl"
CACHE_DIR = PACKAGE_ROOT / ".cache"

TRAIN_SETTINGS = {
    "max_epochs": 250,
    "patience": 40,
    "seed": 13,
}
BASE_SETTINGS = {"d_model": 160, "num_layers": 3, "num_heads": 4, "seed": 7}


def _inputs_digest() -> str:
    digest = hashlib.sha256()
    for path in (TRAIN_PAIRS, HELDOUT_PAIRS):
        digest.update(path.read_bytes())
    digest.update(json.dumps([TRAIN_SETTINGS, BASE_SETTINGS],
                             sort_keys=True).encode())
    return digest.hexdigest()[:16]


@pytest.fixture(scope="session")
def toy_paths():
    if not TRAIN_PAIRS.exists():
        pytest.skip("toy fixtures missing; run scripts/make_fixtures.py "
                    "in the repository root")
    return {"train": TRAIN_PAIRS, "heldout": HELDOUT_PAIRS, "dir": TOY_DIR}


@pytest.fixture(scope="session")
def trained_checkpoint(toy_paths):
    """Base build + fine-tune, cached on disk across pytest sessions.

    Training takes minutes on CPU; the cache key covers the pairs files and
    the training settings, so edits invalidate it automatically.
    """
    from model_server.checkpoint import build_base_checkpoint
    from model_server.config import TrainConfig
    from model_server.data import vocabulary
    from model_server.train import train

    digest = _inputs_digest()
    out_dir = CACHE_DIR / f"toy-{digest}"
    marker = out_dir / "cache_ok.json"
    if marker.exists() and not os.environ.get("MODEL_SERVER_NO_CACHE"):
        return out_dir

    base_dir = CACHE_DIR / f"base-{digest}"
    words = vocabulary([toy_paths["train"], toy_paths["heldout"]])
    started = time.time()
    build_base_checkpoint(words, base_dir, **BASE_SETTINGS)
    cfg = TrainConfig(base_checkpoint=str(base_dir), **TRAIN_SETTINGS)
    train(toy_paths["train"], cfg, out_dir)
    elapsed = time.time() - started
    marker.write_text(json.dumps({"digest": digest, "seconds": elapsed}))
    return out_dir


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="session")
def served_model(trained_checkpoint):
    from model_server.server import BackgroundServer

    with BackgroundServer(str(trained_checkpoint), port=free_port()) as server:
        yield server.url
