"""Command-line interface for the embedding sidecar.

    embedkit embed  --in texts.jsonl --model hash-32 --out corpus.jsonl
                    [--label unlabeled] [--max-tokens 512]
    embedkit attack --in corpus_texts.jsonl --floor 0.8 --out attacks.jsonl
                    [--model hash-32] [--max-tokens 512]

Exit codes: 0 success, 1 completed with warnings (truncated texts),
2 input or model error.
"""

from __future__ import annotations

import argparse
import sys

from .attack import perturb_texts, write_attack_file
from .jobs import EmbedJob, embed_texts
from .models import DEFAULT_MAX_TOKENS, EmbedError

EXIT_OK = 0
EXIT_WARNINGS = 1
EXIT_ERROR = 2


def cmd_embed(args) -> int:
    job = EmbedJob(
        input_path=args.infile,
        model_id=args.model,
        output_path=args.out,
        default_label=args.label,
        max_tokens=args.max_tokens,
    )
    result = embed_texts(job)
    print(
        f"wrote {result.records} records ({result.texts_embedded} texts embedded, "
        f"dim {result.dimension}, labels: {', '.join(result.labels)}) to {args.out}"
    )
    if result.warnings:
        print(f"{len(result.warnings)} warning(s):", file=sys.stderr)
        for warning in result.warnings:
            print(f"  {warning}", file=sys.stderr)
        return EXIT_WARNINGS
    return EXIT_OK


def cmd_attack(args) -> int:
    result = perturb_texts(
        args.infile, args.floor, model_id=args.model, max_tokens=args.max_tokens
    )
    write_attack_file(result, args.out)
    print(
        f"wrote {len(result.pairs)} adversarial pair(s) and {len(result.skipped)} "
        f"skip(s) to {args.out} (skip rate {result.skip_rate:.2f})"
    )
    for record_id, reason in result.skipped:
        print(f"  skipped {record_id}: {reason}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embedkit",
        description="Produce embedding interchange files and adversarial twins",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_embed = sub.add_parser("embed", help="embed texts into an interchange JSONL file")
    p_embed.add_argument("--in", dest="infile", required=True,
                         help="input file: plain text lines or JSONL records")
    p_embed.add_argument("--model", required=True,
                         help='model id: "hash-<dim>" or a transformers model name')
    p_embed.add_argument("--out", required=True, help="output JSONL path")
    p_embed.add_argument("--label", default="unlabeled",
                         help="label for records that do not declare one")
    p_embed.add_argument("--max-tokens", type=int, default=DEFAULT_MAX_TOKENS)
    p_embed.set_defaults(func=cmd_embed)

    p_attack = sub.add_parser("attack", help="emit semantically close adversarial texts")
    p_attack.add_argument("--in", dest="infile", required=True)
    p_attack.add_argument("--floor", type=float, required=True,
                          help="minimum cosine similarity to the original, in (0, 1)")
    p_attack.add_argument("--out", required=True)
    p_attack.add_argument("--model", default="hash-32")
    p_attack.add_argument("--max-tokens", type=int, default=DEFAULT_MAX_TOKENS)
    p_attack.set_defaults(func=cmd_attack)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EmbedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
