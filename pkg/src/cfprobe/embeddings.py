"""Unit-norm embedding storage, the binary file format, and the mock embedder.

File layout (little-endian throughout): magic "CFEB", version u16, dimension
u32, record count u64; then per record an id length u16, the UTF-8 id bytes,
and dimension x float32 components. Vectors are normalized once, at load;
every downstream operation then treats dot products as cosines.
"""

from __future__ import annotations

import csv
import hashlib
import random
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterator, Sequence

import numpy as np

from .errors import DegenerateVectorError, DimensionMismatchError, IngestError

MAGIC = b"CFEB"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIQ")
_ID_LEN = struct.Struct("<H")

NORM_ATOL = 1e-6


def normalize(vector) -> np.ndarray:
    """Scale to unit Euclidean norm, preserving direction. Rejects zero vectors."""
    arr = np.asarray(vector, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DegenerateVectorError("vector has non-finite components")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise DegenerateVectorError("cannot normalize the zero vector")
    return arr / norm


def mock_embed(token: str, dim: int) -> np.ndarray:
    """Deterministic unit vector for a token; a stand-in for a real encoder.

    Components come from random.Random seeded with SHA-256 of the token, so
    the vector is stable across runs, platforms, and Python versions.
    """
    if dim < 2:
        raise ValueError(f"mock embedding dimension must be >= 2, got {dim}")
    seed = int.from_bytes(hashlib.sha256(token.encode("utf-8")).digest(), "big")
    rng = random.Random(seed)
    return normalize([rng.gauss(0.0, 1.0) for _ in range(dim)])


@dataclass(frozen=True)
class EmbeddingRecord:
    id: str
    vector: np.ndarray
    kind: str | None = None


@dataclass(frozen=True)
class ImageAsset:
    id: str
    caption_id: str
    set_id: str
    sample_index: int
    embedding_id: str


class EmbeddingStore:
    """Sealed id -> unit-vector map; read-only after construction."""

    def __init__(self, ids: Sequence[str], matrix: np.ndarray, kind: str | None = None):
        if matrix.ndim != 2 or len(ids) != matrix.shape[0]:
            raise IngestError("id list and matrix row count disagree")
        self._ids = tuple(ids)
        self._index = {rid: i for i, rid in enumerate(self._ids)}
        if len(self._index) != len(self._ids):
            raise IngestError("duplicate ids in store")
        self._matrix = matrix.astype(np.float64, copy=True)
        if not np.all(np.isfinite(self._matrix)):
            bad_row = int(np.argwhere(~np.isfinite(self._matrix))[0][0])
            raise IngestError(f"record {self._ids[bad_row]!r} has non-finite components")
        norms = np.linalg.norm(self._matrix, axis=1)
        if np.any(norms == 0.0):
            bad = self._ids[int(np.argmax(norms == 0.0))]
            raise IngestError(f"record {bad!r} is the zero vector")
        self._matrix /= norms[:, None]
        self._matrix.setflags(write=False)
        self.kind = kind
        # Rank of each row in ascending-id order; retrieval tie-breaking.
        order = sorted(range(len(self._ids)), key=self._ids.__getitem__)
        self._id_rank = np.empty(len(self._ids), dtype=np.int64)
        self._id_rank[order] = np.arange(len(self._ids))
        self._id_rank.setflags(write=False)

    @property
    def ids(self) -> tuple[str, ...]:
        return self._ids

    @property
    def dimension(self) -> int:
        return self._matrix.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def id_rank(self) -> np.ndarray:
        return self._id_rank

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._index

    def vector(self, record_id: str) -> np.ndarray:
        try:
            return self._matrix[self._index[record_id]]
        except KeyError:
            raise KeyError(f"no embedding for id {record_id!r}") from None

    def record(self, record_id: str) -> EmbeddingRecord:
        return EmbeddingRecord(record_id, self.vector(record_id), self.kind)

    def subset(self, record_ids: Sequence[str]) -> "EmbeddingStore":
        rows = [self._index[r] for r in record_ids]
        return EmbeddingStore(list(record_ids), self._matrix[rows], self.kind)

    def __iter__(self) -> Iterator[EmbeddingRecord]:
        for rid in self._ids:
            yield self.record(rid)


def write_embeddings(path: str | Path, ids: Sequence[str], vectors, *, version: int = FORMAT_VERSION) -> None:
    """Serialize records in the bit-exact file format; vectors stored as float32."""
    matrix = np.ascontiguousarray(np.asarray(vectors, dtype=np.float32))
    if matrix.ndim != 2 or matrix.shape[0] != len(ids):
        raise ValueError("vectors must be a 2-D array with one row per id")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, version, matrix.shape[1], matrix.shape[0]))
        for rid, row in zip(ids, matrix):
            encoded = rid.encode("utf-8")
            if len(encoded) > 0xFFFF:
                raise ValueError(f"id too long to serialize: {rid[:32]!r}…")
            fh.write(_ID_LEN.pack(len(encoded)))
            fh.write(encoded)
            fh.write(row.tobytes())


def write_store(store: EmbeddingStore, path: str | Path) -> None:
    write_embeddings(path, store.ids, store.matrix)


def ingest(path: str | Path, kind: str | None = None) -> EmbeddingStore:
    """Load and validate an embedding file into a sealed, normalized store."""
    with open(path, "rb") as fh:
        return _ingest_stream(fh, str(path), kind)


def _ingest_stream(fh: BinaryIO, name: str, kind: str | None) -> EmbeddingStore:
    header = fh.read(_HEADER.size)
    if len(header) < _HEADER.size:
        raise IngestError(f"{name}: truncated header")
    magic, version, dim, count = _HEADER.unpack(header)
    if magic != MAGIC:
        raise IngestError(f"{name}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise IngestError(f"{name}: unsupported format version {version}")
    if dim == 0:
        raise IngestError(f"{name}: zero dimension")

    ids: list[str] = []
    rows = np.empty((count, dim), dtype=np.float32)
    seen: set[str] = set()
    vec_bytes = 4 * dim
    for i in range(count):
        len_raw = fh.read(_ID_LEN.size)
        if len(len_raw) < _ID_LEN.size:
            raise IngestError(f"{name}: truncated at record {i} (expected {count} records)")
        (id_len,) = _ID_LEN.unpack(len_raw)
        id_raw = fh.read(id_len)
        if len(id_raw) < id_len:
            raise IngestError(f"{name}: truncated id in record {i}")
        rid = id_raw.decode("utf-8")
        payload = fh.read(vec_bytes)
        if len(payload) < vec_bytes:
            raise IngestError(f"{name}: truncated vector for record {rid!r}")
        vec = np.frombuffer(payload, dtype="<f4")
        if not np.all(np.isfinite(vec)):
            raise IngestError(f"{name}: non-finite component in record {rid!r}")
        if rid in seen:
            raise IngestError(f"{name}: duplicate id {rid!r}")
        seen.add(rid)
        ids.append(rid)
        rows[i] = vec
    if fh.read(1):
        raise IngestError(f"{name}: trailing bytes after {count} records")
    try:
        return EmbeddingStore(ids, rows, kind)
    except IngestError as exc:
        raise IngestError(f"{name}: {exc}") from None


def write_asset_metadata(assets: Sequence[ImageAsset], path: str | Path) -> None:
    """Headerless CSV rows: assetId, captionId, setId, sampleIndex."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for a in assets:
            writer.writerow([a.id, a.caption_id, a.set_id, a.sample_index])


def read_asset_metadata(path: str | Path) -> list[ImageAsset]:
    assets = []
    seen = set()
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) != 4:
                raise IngestError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            asset_id = row[0]
            if asset_id in seen:
                raise IngestError(f"{path}:{lineno}: duplicate asset id {asset_id!r}")
            seen.add(asset_id)
            assets.append(ImageAsset(asset_id, row[1], row[2], int(row[3]), asset_id))
    return assets
