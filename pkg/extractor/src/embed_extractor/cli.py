"""extract-embeddings: text file in, embedding bundle out."""

import argparse
import sys

from .extract import ExtractionError, ExtractionJob, run_extraction


def _parse_layers(value):
    if value is None or value == "all":
        return None
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse layer list {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extract-embeddings",
        description="Run a pretrained contextual encoder over a text file "
        "(one text per line) and write per-layer token embeddings as an "
        "embedding bundle.",
    )
    parser.add_argument("input", help="UTF-8 text file, one text per line")
    parser.add_argument("output", help="bundle path (JSON lines)")
    parser.add_argument("--model", required=True,
                        help="encoder identifier or local model directory")
    parser.add_argument("--layers", type=_parse_layers, default=None,
                        help="'all' (default) or comma-separated hidden-state "
                        "indices (0 = embedding layer)")
    parser.add_argument("--max-tokens", type=int, default=512,
                        help="truncate texts beyond this many subword tokens")
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--include-special-tokens", action="store_true",
                        help="keep sequence-start/end marker tokens")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = ExtractionJob(
        model=args.model,
        input_path=args.input,
        output_path=args.output,
        layers=args.layers,
        max_tokens=args.max_tokens,
        include_special_tokens=args.include_special_tokens,
        batch_size=args.batch_size,
    )
    try:
        report = run_extraction(job)
    except (ExtractionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {report.records_written} record(s) to {args.output} "
        f"({len(report.skipped_ids)} skipped, "
        f"{len(report.truncated_ids)} truncated)",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
