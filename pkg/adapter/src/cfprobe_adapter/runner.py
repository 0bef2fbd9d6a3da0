"""Execute a job manifest: generate set samples, store images, encode them.

Each manifest line becomes exactly one status row. A failed job is recorded
and skipped; the run carries on. Images land under content-hash filenames so
re-runs deduplicate, and every output file is written atomically.
"""

from __future__ import annotations

import hashlib
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .backends import AdapterConfig, resolve
from .formats import (
    Caption,
    Job,
    write_asset_metadata,
    write_embedding_file,
    write_image_index,
    write_status,
)


@dataclass(frozen=True)
class GeneratedAsset:
    asset_id: str
    caption_id: str
    set_id: str
    sample_index: int
    png_bytes: bytes
    image: Image.Image


@dataclass(frozen=True)
class JobOutcome:
    job: Job
    assets: tuple[GeneratedAsset, ...]
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


def asset_id_for(caption_id: str, sample_index: int) -> str:
    return f"{caption_id}-{sample_index:04d}"


def run_job(job: Job, captions: Sequence[Caption], generator) -> JobOutcome:
    """One generation attempt of a whole set; never raises."""
    try:
        if not captions:
            raise ValueError(f"no captions for set {job.set_id!r}")
        images = generator.generate_set([c.text for c in captions], job.p, job.seed)
        assets = []
        for caption, image in zip(captions, images):
            buffer = io.BytesIO()
            image.save(buffer, format="PNG")
            assets.append(GeneratedAsset(
                asset_id=asset_id_for(caption.caption_id, job.sample_index),
                caption_id=caption.caption_id,
                set_id=job.set_id,
                sample_index=job.sample_index,
                png_bytes=buffer.getvalue(),
                image=image,
            ))
        return JobOutcome(job, tuple(assets))
    except Exception as exc:  # noqa: BLE001 - a bad job must not sink the run
        return JobOutcome(job, (), error=str(exc))


def run_manifest(
    jobs: Sequence[Job],
    captions: Sequence[Caption],
    out_dir: str | Path,
    config: AdapterConfig | None = None,
    workers: int = 1,
) -> dict:
    """Execute every job; write images, embeddings, metadata, and status.

    Outputs under out_dir: images/<sha256>.png, images.cfeb (one embedding per
    generated asset), assets.csv, image_index.csv, status.csv.
    """
    config = config or AdapterConfig()
    encoder, generator = resolve(config)

    by_set: dict[str, list[Caption]] = {}
    for caption in captions:
        by_set.setdefault(caption.set_id, []).append(caption)

    def execute(job: Job) -> JobOutcome:
        return run_job(job, by_set.get(job.set_id, []), generator)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(execute, jobs))
    else:
        outcomes = [execute(job) for job in jobs]

    out_dir = Path(out_dir)
    image_dir = out_dir / "images"
    image_dir.mkdir(parents=True, exist_ok=True)

    asset_rows, index_rows, status_rows = [], [], []
    embed_ids: list[str] = []
    embed_images: list[Image.Image] = []
    for outcome in outcomes:
        job = outcome.job
        if not outcome.ok:
            status_rows.append((job.set_id, job.sample_index, "failed", outcome.error))
            continue
        for asset in outcome.assets:
            digest = hashlib.sha256(asset.png_bytes).hexdigest()
            image_path = image_dir / f"{digest}.png"
            if not image_path.exists():
                tmp = image_path.with_name(image_path.name + ".tmp")
                tmp.write_bytes(asset.png_bytes)
                tmp.replace(image_path)
            asset_rows.append((asset.asset_id, asset.caption_id, asset.set_id, asset.sample_index))
            index_rows.append((asset.asset_id, f"images/{digest}.png"))
            embed_ids.append(asset.asset_id)
            embed_images.append(asset.image)
        status_rows.append((job.set_id, job.sample_index, "ok", ""))

    if embed_ids:
        batches = []
        for start in range(0, len(embed_images), config.batch_size):
            batches.append(encoder.encode_images(embed_images[start : start + config.batch_size]))
        write_embedding_file(out_dir / "images.cfeb", embed_ids, np.vstack(batches))
    write_asset_metadata(out_dir / "assets.csv", asset_rows)
    write_image_index(out_dir / "image_index.csv", index_rows)
    write_status(out_dir / "status.csv", status_rows)
    return {
        "jobs": len(jobs),
        "ok": sum(1 for o in outcomes if o.ok),
        "failed": sum(1 for o in outcomes if not o.ok),
        "assets": len(asset_rows),
    }
