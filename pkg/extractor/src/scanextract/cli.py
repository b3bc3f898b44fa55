"""scanextract CLI.

    scanextract extract --in <images> --out <dataset-dir> [--size 256]
                        [--encoder auto|tiny|radimagenet-resnet50|
                         imagenet-resnet50] [--weights FILE]
    scanextract export-probs --in <model-outputs> --out <dataset-dir>
"""

from __future__ import annotations

import argparse
import sys

from .errors import ScanextractError
from .export import ExtractConfig, export_probabilities, extract_embeddings


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="scanextract",
        description="Produce selection-engine dataset files from images "
                    "and model outputs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract",
                       help="encode images into items.json + embeddings.bin")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--encoder", default="auto")
    p.add_argument("--weights", default=None,
                   help="local state-dict file for radimagenet-resnet50")
    p.add_argument("--batch-size", type=int, default=8)

    p = sub.add_parser("export-probs",
                       help="convert per-item softmax .npy files to .prb")
    p.add_argument("--in", dest="in_dir", required=True,
                   help="directory of <id>.npy softmax tensors")
    p.add_argument("--out", dest="out_dir", required=True,
                   help="dataset directory (items.json must exist)")
    return parser


def cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        if args.command == "extract":
            config = ExtractConfig(in_dir=args.in_dir, out_dir=args.out_dir,
                                   size=args.size, encoder=args.encoder,
                                   weights=args.weights,
                                   batch_size=args.batch_size)
            ids = extract_embeddings(config)
            print(f"embedded {len(ids)} images -> {args.out_dir}")
        else:
            ids = export_probabilities(args.in_dir, args.out_dir)
            print(f"exported {len(ids)} probability maps -> "
                  f"{args.out_dir}/probs")
        return 0
    except (ScanextractError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
