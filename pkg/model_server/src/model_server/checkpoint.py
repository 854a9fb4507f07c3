"""Base checkpoint construction and loading.

`build_base_checkpoint` materializes the smallest usable base: a
whitespace word-level tokenizer over the corpus vocabulary plus a tiny
randomly initialized encoder-decoder in the mT5 layout, saved as a
regular checkpoint directory. Any checkpoint directory (or hub id, when
the environment can resolve one) loads through `load_checkpoint`.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path

import torch
from tokenizers import Regex, Tokenizer
from tokenizers.models import WordLevel
from tokenizers.pre_tokenizers import Sequence, Split, WhitespaceSplit
from transformers import (
    MT5Config,
    MT5ForConditionalGeneration,
    PreTrainedTokenizerFast,
)

log = logging.getLogger(__name__)

PAD = "<pad>"
EOS = "</s>"
UNK = "<unk>"

# Prefixed names split at the colon ("wd:Q5" -> "wd:" "Q5") so an entity
# identifier is one shared vocabulary item wherever it appears; with tied
# embeddings the decoder can copy it instead of memorizing per-entity
# associations.
_PNAME_SPLIT = re.compile(r"^([^\W\d_][\w.-]*:)(.+)$", re.UNICODE)


def split_units(word: str) -> list[str]:
    match = _PNAME_SPLIT.match(word)
    if match:
        return [match.group(1), match.group(2)]
    return [word]


def join_units(text: str) -> str:
    """Inverse of the colon split over space-joined decoder output."""
    return re.sub(r"(\S+:) (?=\S)", r"\1", text)


class LoadFailure(RuntimeError):
    pass


def build_tokenizer(words) -> PreTrainedTokenizerFast:
    vocab = {PAD: 0, EOS: 1, UNK: 2}
    for word in words:
        for unit in split_units(word):
            if unit not in vocab:
                vocab[unit] = len(vocab)
    tokenizer = Tokenizer(WordLevel(vocab=vocab, unk_token=UNK))
    tokenizer.pre_tokenizer = Sequence(
        [
            WhitespaceSplit(),
            Split(Regex(r"[^\s\d:]+[\w.-]*:"), behavior="isolated"),
        ]
    )
    return PreTrainedTokenizerFast(
        tokenizer_object=tokenizer,
        pad_token=PAD,
        eos_token=EOS,
        unk_token=UNK,
    )


def _copy_pretrain(model, tokenizer, steps: int, batch_size: int,
                   learning_rate: float, seed: int) -> float:
    """Sequence-copy pretraining.

    Random vocabulary sequences are mapped to themselves, which teaches
    the encoder-decoder stack a token-copying circuit before any task
    fine-tuning; downstream training then only has to bind the copy
    behavior to the task instead of memorizing per-token associations.
    """
    generator = torch.Generator().manual_seed(seed)
    specials = {tokenizer.pad_token_id, tokenizer.eos_token_id,
                tokenizer.unk_token_id}
    candidates = torch.tensor(
        [i for i in range(len(tokenizer)) if i not in specials]
    )
    optimizer = torch.optim.AdamW(model.parameters(), lr=learning_rate)
    model.train()
    loss_value = float("inf")
    for step in range(steps):
        length = int(torch.randint(4, 33, (1,), generator=generator))
        picks = torch.randint(0, len(candidates), (batch_size, length),
                              generator=generator)
        sequence = candidates[picks]
        eos = torch.full((batch_size, 1), tokenizer.eos_token_id)
        labels = torch.cat([sequence, eos], dim=1)
        optimizer.zero_grad()
        out = model(
            input_ids=sequence,
            attention_mask=torch.ones_like(sequence),
            labels=labels,
        )
        out.loss.backward()
        torch.nn.utils.clip_grad_norm_(model.parameters(), 1.0)
        optimizer.step()
        loss_value = float(out.loss.detach())
        if step % 200 == 0:
            log.info("copy pretrain step %d: loss %.4f", step, loss_value)
    model.eval()
    return loss_value


def build_base_checkpoint(
    words,
    out_dir,
    d_model: int = 160,
    num_layers: int = 3,
    num_heads: int = 4,
    seed: int = 7,
    pretrain_steps: int = 1500,
    pretrain_batch: int = 24,
    pretrain_lr: float = 1e-3,
) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tokenizer = build_tokenizer(words)
    torch.manual_seed(seed)
    config = MT5Config(
        vocab_size=len(tokenizer),
        d_model=d_model,
        d_kv=d_model // num_heads,
        d_ff=d_model * 2,
        num_layers=num_layers,
        num_decoder_layers=num_layers,
        num_heads=num_heads,
        dropout_rate=0.05,
        pad_token_id=tokenizer.pad_token_id,
        eos_token_id=tokenizer.eos_token_id,
        decoder_start_token_id=tokenizer.pad_token_id,
        tie_word_embeddings=True,
    )
    model = MT5ForConditionalGeneration(config)
    if pretrain_steps:
        final_loss = _copy_pretrain(model, tokenizer, pretrain_steps,
                                    pretrain_batch, pretrain_lr, seed)
        log.info("copy pretraining finished at loss %.4f", final_loss)
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    log.info("base checkpoint with %d-word vocabulary at %s",
             len(tokenizer), out_dir)
    return out_dir


def load_checkpoint(checkpoint: str):
    """(model, tokenizer) from a directory or resolvable hub id."""
    try:
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

        model = AutoModelForSeq2SeqLM.from_pretrained(checkpoint)
        tokenizer = AutoTokenizer.from_pretrained(checkpoint)
    except Exception as exc:  # hub ids can fail offline; report uniformly
        raise LoadFailure(f"cannot load checkpoint {checkpoint!r}: {exc}") from exc
    model.eval()
    return model, tokenizer
