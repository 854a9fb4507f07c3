"""Training configuration."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class TrainConfig:
    base_checkpoint: str
    max_epochs: int = 300
    patience: int = 40
    batch_size: int = 16
    learning_rate: float = 5e-4
    max_input_length: int = 160
    max_output_length: int = 64
    seed: int = 13
    val_fraction: float = 0.1

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if not 0.0 < self.val_fraction < 0.5:
            raise ValueError("val_fraction must be in (0, 0.5)")
        if self.batch_size < 1 or self.max_input_length < 8 \
                or self.max_output_length < 8:
            raise ValueError("implausible batch size or sequence lengths")

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(asdict(self), handle, indent=1, sort_keys=True)
            handle.write("\n")

    @classmethod
    def from_json(cls, path) -> "TrainConfig":
        with open(path, encoding="utf-8") as handle:
            return cls(**json.load(handle))
