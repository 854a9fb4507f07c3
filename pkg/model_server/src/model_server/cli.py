"""Command-line entry point: build-base, train, eval-em, serve."""

from __future__ import annotations

import logging
import sys

import click

from model_server.checkpoint import build_base_checkpoint, load_checkpoint
from model_server.config import TrainConfig
from model_server.data import read_pairs, vocabulary
from model_server.train import exact_match, train


@click.group()
@click.option("--verbose", is_flag=True)
def cli(verbose):
    """Sequence-model training and serving for prepared JSONL pairs."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


@cli.command("build-base")
@click.argument("pairs_files", nargs=-1, required=True,
                type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--d-model", default=160, show_default=True)
@click.option("--layers", default=3, show_default=True)
@click.option("--heads", default=4, show_default=True)
@click.option("--seed", default=7, show_default=True)
def build_base(pairs_files, out, d_model, layers, heads, seed):
    """Construct the smallest base checkpoint from corpus vocabulary."""
    words = vocabulary(pairs_files)
    path = build_base_checkpoint(words, out, d_model=d_model,
                                 num_layers=layers, num_heads=heads, seed=seed)
    click.echo(f"base checkpoint at {path} ({len(words)} corpus words)")


@cli.command("train")
@click.argument("pairs_file", type=click.Path(exists=True))
@click.option("--base", "base_checkpoint", required=True,
              help="Checkpoint directory or resolvable model id.")
@click.option("--out", required=True, type=click.Path())
@click.option("--max-epochs", default=300, show_default=True)
@click.option("--patience", default=40, show_default=True)
@click.option("--batch-size", default=16, show_default=True)
@click.option("--learning-rate", default=5e-4, show_default=True)
@click.option("--seed", default=13, show_default=True)
def train_cmd(pairs_file, base_checkpoint, out, max_epochs, patience,
              batch_size, learning_rate, seed):
    """Fine-tune on a prepared pairs file."""
    cfg = TrainConfig(
        base_checkpoint=base_checkpoint,
        max_epochs=max_epochs,
        patience=patience,
        batch_size=batch_size,
        learning_rate=learning_rate,
        seed=seed,
    )
    path = train(pairs_file, cfg, out)
    click.echo(f"checkpoint written to {path}")


@cli.command("eval-em")
@click.argument("pairs_file", type=click.Path(exists=True))
@click.option("--checkpoint", required=True)
@click.option("--max-new-tokens", default=64, show_default=True)
def eval_em(pairs_file, checkpoint, max_new_tokens):
    """Exact-match rate of greedy decoding against pair targets."""
    model, tokenizer = load_checkpoint(checkpoint)
    pairs = read_pairs(pairs_file)
    rate = exact_match(model, tokenizer, pairs, max_new_tokens)
    click.echo(f"exact-match {rate:.4f} over {len(pairs)} pairs")


@cli.command("serve")
@click.option("--checkpoint", required=True)
@click.option("--port", default=8930, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve_cmd(checkpoint, port, host):
    """Serve /generate, /tokenize and /health."""
    from model_server.server import serve

    serve(checkpoint, port, host)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.ClickException as exc:
        exc.show()
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        click.echo(f"error: {exc}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
