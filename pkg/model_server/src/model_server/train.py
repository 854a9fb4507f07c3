"""Fine-tuning loop.

Plain teacher-forced negative-log-likelihood training with an epoch-level
validation loss, early stopping, and a loss curve CSV. The best epoch by
validation loss is what gets saved.
"""

from __future__ import annotations

import copy
import csv
import logging
import math
from pathlib import Path

import torch

from model_server.checkpoint import join_units, load_checkpoint
from model_server.config import TrainConfig
from model_server.data import Pair, read_pairs, train_val_split

log = logging.getLogger(__name__)


def encode_batch(tokenizer, batch: list[Pair], cfg: TrainConfig):
    inputs = tokenizer(
        [p.input for p in batch],
        padding=True,
        truncation=True,
        max_length=cfg.max_input_length,
        return_tensors="pt",
    )
    targets = tokenizer(
        [p.target + " " + tokenizer.eos_token for p in batch],
        padding=True,
        truncation=True,
        max_length=cfg.max_output_length,
        return_tensors="pt",
    )
    labels = targets["input_ids"].clone()
    labels[targets["attention_mask"] == 0] = -100
    return inputs["input_ids"], inputs["attention_mask"], labels


def _epoch_loss(model, tokenizer, pairs, cfg, optimizer=None) -> float:
    training = optimizer is not None
    model.train(training)
    total = 0.0
    count = 0
    for start in range(0, len(pairs), cfg.batch_size):
        batch = pairs[start:start + cfg.batch_size]
        input_ids, attention_mask, labels = encode_batch(tokenizer, batch, cfg)
        if training:
            optimizer.zero_grad()
            out = model(input_ids=input_ids, attention_mask=attention_mask,
                        labels=labels)
            out.loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), 1.0)
            optimizer.step()
        else:
            with torch.no_grad():
                out = model(input_ids=input_ids, attention_mask=attention_mask,
                            labels=labels)
        total += float(out.loss.detach()) * len(batch)
        count += len(batch)
    return total / count


@torch.no_grad()
def greedy_predict(model, tokenizer, texts, max_new_tokens: int = 64,
                   batch_size: int = 16) -> list[str]:
    model.eval()
    outputs = []
    for start in range(0, len(texts), batch_size):
        chunk = texts[start:start + batch_size]
        encoded = tokenizer(chunk, padding=True, return_tensors="pt")
        generated = model.generate(
            input_ids=encoded["input_ids"],
            attention_mask=encoded["attention_mask"],
            max_new_tokens=max_new_tokens,
            num_beams=1,
            do_sample=False,
        )
        for row in generated:
            text = tokenizer.decode(row, skip_special_tokens=True)
            outputs.append(join_units(" ".join(text.split())))
    return outputs


def exact_match(model, tokenizer, pairs: list[Pair],
                max_new_tokens: int = 64) -> float:
    predictions = greedy_predict(model, tokenizer, [p.input for p in pairs],
                                 max_new_tokens)
    hits = sum(
        1 for p, out in zip(pairs, predictions)
        if out == " ".join(p.target.split())
    )
    return hits / len(pairs)


def train(pairs_path, cfg: TrainConfig, out_dir) -> Path:
    """Fine-tune cfg.base_checkpoint on a pairs file; returns out_dir.

    Writes the best-validation-loss checkpoint, `loss_curve.csv`
    (epoch,train_loss,val_loss) and the effective train config.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pairs = read_pairs(pairs_path)
    train_pairs, val_pairs = train_val_split(pairs, cfg.val_fraction, cfg.seed)
    log.info("training on %d pairs, validating on %d", len(train_pairs),
             len(val_pairs))

    torch.manual_seed(cfg.seed)
    model, tokenizer = load_checkpoint(cfg.base_checkpoint)
    model.train()
    optimizer = torch.optim.AdamW(model.parameters(), lr=cfg.learning_rate)

    rng = torch.Generator().manual_seed(cfg.seed)
    curve = []
    best_val = math.inf
    best_state = None
    best_epoch = -1
    for epoch in range(1, cfg.max_epochs + 1):
        order = torch.randperm(len(train_pairs), generator=rng).tolist()
        shuffled = [train_pairs[i] for i in order]
        train_loss = _epoch_loss(model, tokenizer, shuffled, cfg, optimizer)
        val_loss = _epoch_loss(model, tokenizer, val_pairs, cfg)
        curve.append((epoch, train_loss, val_loss))
        if val_loss < best_val:
            best_val = val_loss
            best_state = copy.deepcopy(model.state_dict())
            best_epoch = epoch
        if epoch % 10 == 0 or epoch == 1:
            log.info("epoch %d: train %.4f val %.4f", epoch, train_loss, val_loss)
        if epoch - best_epoch >= cfg.patience:
            log.info("early stop at epoch %d (best %d)", epoch, best_epoch)
            break

    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    cfg.to_json(out_dir / "train_config.json")
    with open(out_dir / "loss_curve.csv", "w", newline="",
              encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["epoch", "train_loss", "val_loss"])
        writer.writerows(curve)
    return out_dir


def read_loss_curve(out_dir) -> list[tuple[int, float, float]]:
    with open(Path(out_dir) / "loss_curve.csv", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))[1:]
    return [(int(e), float(t), float(v)) for e, t, v in rows]
