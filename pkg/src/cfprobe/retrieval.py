"""Exact top-K cosine retrieval over sealed image pools.

Pools here are small (at most a few hundred images per subject), so retrieval
is a full scan: one matrix-vector product, then a deterministic ranking with
ties broken by ascending asset id.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingStore, normalize
from .errors import DegenerateVectorError, DimensionMismatchError

RETRIEVAL_DUMP_HEADER = ("subject", "rank", "assetId", "score")


@dataclass(frozen=True)
class RetrievalResult:
    """Top-K ranked asset ids with scores in non-increasing order."""

    subject: str
    query_embedding_id: str
    k: int
    ranked: tuple[tuple[str, float], ...]

    @property
    def asset_ids(self) -> tuple[str, ...]:
        return tuple(aid for aid, _ in self.ranked)


def average_text_embedding(per_prefix_embeddings: Sequence) -> np.ndarray:
    """Mean of unit vectors, re-normalized; the cross-prefix query embedding."""
    if len(per_prefix_embeddings) == 0:
        raise DegenerateVectorError("need at least one embedding to average")
    matrix = np.asarray([np.asarray(v, dtype=np.float64) for v in per_prefix_embeddings])
    if matrix.ndim != 2:
        raise DimensionMismatchError("embeddings must share one dimension")
    return normalize(matrix.mean(axis=0))


def top_k(
    query,
    pool: EmbeddingStore,
    k: int,
    subject: str = "",
    query_embedding_id: str = "",
) -> RetrievalResult:
    """The k pool items most similar to the query, deterministically ranked."""
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    if len(pool) == 0:
        raise ValueError("cannot retrieve from an empty pool")
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (pool.dimension,):
        raise DimensionMismatchError(f"query shape {q.shape} vs pool dimension {pool.dimension}")
    scores = pool.matrix @ q
    # lexsort's last key is primary: sort by -score, breaking ties by id order.
    order = np.lexsort((pool.id_rank, -scores))[: min(k, len(pool))]
    ranked = tuple((pool.ids[i], float(scores[i])) for i in order)
    return RetrievalResult(subject, query_embedding_id, k, ranked)


def default_k(cat_a_values: Sequence, cat_b_values: Sequence) -> int:
    """K = |A1| x |A2|, the size of one full counterfactual set."""
    if not cat_a_values or not cat_b_values:
        raise ValueError("both attribute sets must be non-empty")
    return len(cat_a_values) * len(cat_b_values)


def write_retrieval_dump(results: Sequence[RetrievalResult], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RETRIEVAL_DUMP_HEADER)
        for result in results:
            for rank, (asset_id, score) in enumerate(result.ranked, start=1):
                writer.writerow([result.subject, rank, asset_id, repr(score)])
