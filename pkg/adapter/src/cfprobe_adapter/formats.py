"""File formats shared with the probe toolkit, implemented independently.

The adapter talks to the probe purely through files: it consumes the job and
caption manifests and emits embedding files (magic "CFEB", little-endian
header, float32 records), asset metadata, and a job status report. All writes
go through a temp-file rename so partially written outputs never appear.
"""

from __future__ import annotations

import csv
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MAGIC = b"CFEB"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIQ")
_ID_LEN = struct.Struct("<H")

STATUS_HEADER = ("setId", "sampleIndex", "status", "message")


@dataclass(frozen=True)
class Job:
    set_id: str
    sample_index: int
    p: float
    seed: int


@dataclass(frozen=True)
class Caption:
    caption_id: str
    set_id: str
    text: str


def read_job_manifest(path: str | Path) -> list[Job]:
    """Headerless CSV rows: setId, sampleIndex, p, seed."""
    jobs = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            jobs.append(Job(row[0], int(row[1]), float(row[2]), int(row[3])))
    return jobs


def read_caption_manifest(path: str | Path) -> list[Caption]:
    """The probe's caption manifest; only id, set id, and text matter here."""
    captions = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty caption manifest")
        try:
            id_col = header.index("captionId")
            set_col = header.index("setId")
            text_col = header.index("text")
        except ValueError:
            raise ValueError(f"{path}: caption manifest missing required columns") from None
        for row in reader:
            if row:
                captions.append(Caption(row[id_col], row[set_col], row[text_col]))
    return captions


def read_text_table(path: str | Path, id_column: str, text_column: str) -> list[tuple[str, str]]:
    """Generic (id, text) pairs from any CSV with a header row."""
    pairs = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty table")
        try:
            id_col = header.index(id_column)
            text_col = header.index(text_column)
        except ValueError:
            raise ValueError(f"{path}: no columns {id_column!r}/{text_column!r}") from None
        for row in reader:
            if row:
                pairs.append((row[id_col], row[text_col]))
    return pairs


def _atomic(path: Path):
    return _AtomicWrite(path)


class _AtomicWrite:
    """Write to <path>.tmp and rename into place on success."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.tmp = self.path.with_name(self.path.name + ".tmp")

    def __enter__(self):
        self.fh = open(self.tmp, "wb")
        return self.fh

    def __exit__(self, exc_type, exc, tb):
        self.fh.close()
        if exc_type is None:
            os.replace(self.tmp, self.path)
        else:
            self.tmp.unlink(missing_ok=True)
        return False


def write_embedding_file(path: str | Path, ids: Sequence[str], vectors) -> None:
    matrix = np.ascontiguousarray(np.asarray(vectors, dtype=np.float32))
    if matrix.ndim != 2 or matrix.shape[0] != len(ids):
        raise ValueError("vectors must be 2-D with one row per id")
    with _atomic(Path(path)) as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, matrix.shape[1], matrix.shape[0]))
        for rid, row in zip(ids, matrix):
            encoded = rid.encode("utf-8")
            fh.write(_ID_LEN.pack(len(encoded)))
            fh.write(encoded)
            fh.write(row.tobytes())


def write_asset_metadata(path: str | Path, rows: Iterable[tuple[str, str, str, int]]) -> None:
    """Headerless CSV rows: assetId, captionId, setId, sampleIndex."""
    with _atomic(Path(path)) as fh:
        text = "".join(f"{aid},{cid},{sid},{idx}\n" for aid, cid, sid, idx in rows)
        fh.write(text.encode("utf-8"))


def write_status(path: str | Path, rows: Iterable[tuple[str, int, str, str]]) -> None:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(STATUS_HEADER)
    for set_id, sample_index, status, message in rows:
        writer.writerow([set_id, sample_index, status, message])
    with _atomic(Path(path)) as fh:
        fh.write(buf.getvalue().encode("utf-8"))


def write_image_index(path: str | Path, rows: Iterable[tuple[str, str]]) -> None:
    """CSV with header assetId,path mapping assets to stored image files."""
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["assetId", "path"])
    for asset_id, image_path in rows:
        writer.writerow([asset_id, image_path])
    with _atomic(Path(path)) as fh:
        fh.write(buf.getvalue().encode("utf-8"))
