"""Batch CLI: encode text tables, encode stored images, run job manifests."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from PIL import Image

from .backends import AdapterConfig, AdapterError, resolve_encoder
from .formats import (
    read_caption_manifest,
    read_job_manifest,
    read_text_table,
    write_embedding_file,
)
from .runner import run_manifest


def _config_from(args) -> AdapterConfig:
    return AdapterConfig(
        encoder_checkpoint=args.encoder,
        generator_checkpoint=getattr(args, "generator", "synthetic-64"),
        device=args.device,
        batch_size=args.batch_size,
    )


def _add_backend_flags(parser: argparse.ArgumentParser, generator: bool = False) -> None:
    parser.add_argument("--encoder", default="synthetic-64",
                        help="encoder checkpoint (synthetic-<dim> or clip:<model id>)")
    if generator:
        parser.add_argument("--generator", default="synthetic-64",
                            help="generator checkpoint (synthetic-<dim>)")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--batch-size", type=int, default=8)


def cmd_encode_texts(args) -> int:
    pairs = read_text_table(args.input, args.id_column, args.text_column)
    if not pairs:
        raise AdapterError(f"no rows in {args.input}")
    encoder = resolve_encoder(_config_from(args))
    ids = [rid for rid, _ in pairs]
    texts = [text for _, text in pairs]
    vectors = []
    for start in range(0, len(texts), args.batch_size):
        vectors.append(encoder.encode_texts(texts[start : start + args.batch_size]))
    import numpy as np

    write_embedding_file(args.out, ids, np.vstack(vectors))
    print(f"encoded={len(ids)} out={args.out}")
    return 0


def cmd_encode_images(args) -> int:
    rows = read_text_table(args.index, "assetId", "path")
    if not rows:
        raise AdapterError(f"no rows in {args.index}")
    base = Path(args.index).parent
    encoder = resolve_encoder(_config_from(args))
    ids, images = [], []
    for asset_id, rel_path in rows:
        path = base / rel_path
        if not path.exists():
            raise AdapterError(f"image for asset {asset_id!r} not found: {path}")
        ids.append(asset_id)
        images.append(Image.open(path))
    import numpy as np

    vectors = []
    for start in range(0, len(images), args.batch_size):
        vectors.append(encoder.encode_images(images[start : start + args.batch_size]))
    write_embedding_file(args.out, ids, np.vstack(vectors))
    print(f"encoded={len(ids)} out={args.out}")
    return 0


def cmd_run_jobs(args) -> int:
    jobs = read_job_manifest(args.manifest)
    captions = read_caption_manifest(args.captions)
    if not jobs:
        raise AdapterError(f"empty job manifest: {args.manifest}")
    summary = run_manifest(
        jobs, captions, args.out, config=_config_from(args), workers=args.workers)
    print("jobs={jobs} ok={ok} failed={failed} assets={assets}".format(**summary))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfprobe-adapter",
        description="Execute generation/encoding jobs for the probe pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode-texts", help="embed an (id, text) table")
    p.add_argument("--input", required=True, help="CSV with a header row")
    p.add_argument("--id-column", default="id")
    p.add_argument("--text-column", default="text")
    p.add_argument("--out", required=True)
    _add_backend_flags(p)
    p.set_defaults(func=cmd_encode_texts)

    p = sub.add_parser("encode-images", help="embed images listed in an assetId,path index")
    p.add_argument("--index", required=True, help="CSV with header assetId,path")
    p.add_argument("--out", required=True)
    _add_backend_flags(p)
    p.set_defaults(func=cmd_encode_images)

    p = sub.add_parser("run-jobs", help="execute a job manifest end to end")
    p.add_argument("--manifest", required=True)
    p.add_argument("--captions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    _add_backend_flags(p, generator=True)
    p.set_defaults(func=cmd_run_jobs)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single exit point with context
        print(f"cfprobe-adapter {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
