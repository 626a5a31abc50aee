"""CLI for the embedding exporter: ``vitlca-extract extract ...``."""

from __future__ import annotations

import argparse
import sys

from .extract import DATASETS, ExtractionConfig, extract


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vitlca-extract",
                                     description="Export ViT-B/16 embeddings to .vlca")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("extract", help="run the extraction")
    p.add_argument("--dataset", choices=DATASETS, required=True)
    p.add_argument("--split", default="train")
    p.add_argument("--data-root", default="./data")
    p.add_argument("--subset-size", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--device", default="cpu")
    p.add_argument("--layer", choices=["final"], default="final")
    p.add_argument("--pool", choices=["cls", "mean"], default="cls")
    p.add_argument("--weights", choices=["pretrained", "random"], default="pretrained")
    p.add_argument("--download", action="store_true",
                   help="allow torchvision to download the dataset")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = ExtractionConfig(
        dataset=args.dataset,
        out_path=args.out,
        split=args.split,
        data_root=args.data_root,
        subset_size=args.subset_size,
        seed=args.seed,
        batch_size=args.batch_size,
        device=args.device,
        pool=args.pool,
        weights=args.weights,
        download=args.download,
    )
    try:
        path = extract(config)
    except (ValueError, FileNotFoundError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"embeddings written -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
