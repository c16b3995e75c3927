"""Command-line interface: build-triplets, finetune, export."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import TrainerError
from .export import export_embeddings
from .model import (
    TrainerConfig,
    augment_vocabulary,
    build_model,
    build_tokenizer,
    load_model,
    save_model,
)
from .train import margin_stats, train, write_metrics
from .triplets import (
    build_triplets,
    load_clusters,
    load_domains,
    read_triplets,
    write_triplets,
)

EXIT_OK = 0
EXIT_ERROR = 2


def cmd_build_triplets(args) -> int:
    clusters = load_clusters(args.clusters)
    pool = load_domains(args.pool)
    triplets = build_triplets(clusters, pool, count=args.count, seed=args.seed)
    write_triplets(args.out, triplets)
    print(f"build-triplets: written={len(triplets)}", file=sys.stderr)
    return EXIT_OK


def _config_from_args(args) -> TrainerConfig:
    return TrainerConfig(
        hidden_size=args.hidden_size,
        num_layers=args.layers,
        num_heads=args.heads,
        margin=args.margin,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        seed=args.seed,
        holdout=args.holdout,
    )


def cmd_finetune(args) -> int:
    config = _config_from_args(args)
    triplets = read_triplets(args.triplets)
    tokenizer = build_tokenizer()
    tlds = sorted({t.anchor.rsplit(".", 1)[-1] for t in triplets}
                  | {t.negative.rsplit(".", 1)[-1] for t in triplets})
    brands = load_domains(args.brands) if args.brands else []
    added = augment_vocabulary(tokenizer, tlds, brands)
    model = build_model(tokenizer, config)

    holdout = triplets[:config.holdout]
    training = triplets[config.holdout:] or triplets
    before_pos, before_neg = margin_stats(model, tokenizer, holdout or triplets)
    losses = train(model, tokenizer, training, config)
    after_pos, after_neg = margin_stats(model, tokenizer, holdout or triplets)

    out = Path(args.out)
    save_model(out, model, tokenizer)
    write_metrics(out / "metrics.tsv", losses)
    print(
        f"finetune: tokens_added={added} epochs={len(losses)} "
        f"loss_first={losses[0]:.4f} loss_last={losses[-1]:.4f} "
        f"holdout_margin_before={before_pos - before_neg:.4f} "
        f"holdout_margin_after={after_pos - after_neg:.4f}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_export(args) -> int:
    model, tokenizer = load_model(args.model)
    domains = load_domains(args.domains)
    written = export_embeddings(model, tokenizer, domains, args.out)
    print(f"export: written={written}", file=sys.stderr)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsd-trainer",
        description="Fine-tune a domain-name encoder and export embeddings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-triplets", help="sample triplets from clusters")
    p.add_argument("--clusters", required=True, help="cluster file (ldjson)")
    p.add_argument("--pool", required=True, help="benign pool, one domain per line")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_build_triplets)

    p = sub.add_parser("finetune", help="train the encoder on a triplet file")
    p.add_argument("--triplets", required=True)
    p.add_argument("--out", required=True, help="model artifact directory")
    p.add_argument("--brands", help="brand tokens to add, one per line")
    p.add_argument("--hidden-size", type=int, default=64)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--margin", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=2)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--holdout", type=int, default=100)
    p.set_defaults(handler=cmd_finetune)

    p = sub.add_parser("export", help="write an embedding file for a domain list")
    p.add_argument("--model", required=True, help="model artifact directory")
    p.add_argument("--domains", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        from transformers.utils import logging as hf_logging
        hf_logging.disable_progress_bar()
    except ImportError:
        pass
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except TrainerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
