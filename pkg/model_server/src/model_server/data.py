"""Prepared-pairs JSONL handling.

The upstream pipeline exports one object per line with "id", "lang",
"input" and "target" keys; this module only ever consumes that format.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass


class DataFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Pair:
    id: str
    lang: str
    input: str
    target: str


def read_pairs(path) -> list[Pair]:
    pairs = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                pairs.append(
                    Pair(
                        id=str(record["id"]),
                        lang=record["lang"],
                        input=record["input"],
                        target=record["target"],
                    )
                )
            except (ValueError, KeyError, TypeError) as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    if not pairs:
        raise DataFormatError(f"{path}: no records")
    return pairs


def train_val_split(pairs, val_fraction: float, seed: int):
    """Deterministic shuffle split; validation is never empty."""
    indices = list(range(len(pairs)))
    random.Random(seed).shuffle(indices)
    n_val = max(1, int(len(pairs) * val_fraction))
    val_idx = set(indices[:n_val])
    train = [p for i, p in enumerate(pairs) if i not in val_idx]
    val = [p for i, p in enumerate(pairs) if i in val_idx]
    return train, val


def vocabulary(paths) -> list[str]:
    """Whitespace token inventory over pairs files, frequency-ranked."""
    counts: dict[str, int] = {}
    for path in paths:
        for pair in read_pairs(path):
            for text in (pair.input, pair.target):
                for word in text.split():
                    counts[word] = counts.get(word, 0) + 1
    return [w for w, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]
