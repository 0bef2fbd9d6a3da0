"""Scoring and selection of generated counterfactual samples.

A sample (one generation attempt of a whole set) survives only if every
member image matches its caption at cosine >= min_cosine; among survivors of
each group, the samples with the highest mean pairwise directional
similarity are retained, up to a cap.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DegenerateVectorError, DimensionMismatchError

MIN_COSINE = 0.2
KEEP_PER_GROUP = 10

RETENTION_HEADER = ("setId", "sampleIndex", "retained", "minMemberCosine", "directionalScore")


def caption_image_similarity(caption_emb, image_emb) -> float:
    """Cosine between a caption and its image; both must already be unit-norm."""
    cap = np.asarray(caption_emb, dtype=np.float64)
    img = np.asarray(image_emb, dtype=np.float64)
    if cap.shape != img.shape:
        raise DimensionMismatchError(f"shape mismatch: {cap.shape} vs {img.shape}")
    return float(np.clip(np.dot(cap, img), -1.0, 1.0))


def directional_similarity(img_emb_a, img_emb_b, txt_emb_a, txt_emb_b) -> float:
    """Cosine between the image edit direction (B - A) and the text edit direction.

    High values mean the image change mirrors the caption change. Raises
    DegenerateVectorError when either edit direction is zero.
    """
    img_a, img_b = (np.asarray(v, dtype=np.float64) for v in (img_emb_a, img_emb_b))
    txt_a, txt_b = (np.asarray(v, dtype=np.float64) for v in (txt_emb_a, txt_emb_b))
    if not (img_a.shape == img_b.shape == txt_a.shape == txt_b.shape):
        raise DimensionMismatchError("all four embeddings must share one dimension")
    img_dir = img_b - img_a
    txt_dir = txt_b - txt_a
    img_norm = float(np.linalg.norm(img_dir))
    txt_norm = float(np.linalg.norm(txt_dir))
    if img_norm == 0.0 or txt_norm == 0.0:
        raise DegenerateVectorError("zero edit direction")
    return float(np.clip(np.dot(img_dir, txt_dir) / (img_norm * txt_norm), -1.0, 1.0))


def set_directional_score(image_embs: Sequence, text_embs: Sequence) -> float:
    """Mean directional similarity over all unordered member pairs of one sample.

    Degenerate pairs (identical images or identical captions) are excluded;
    if every pair is degenerate the sample has no score.
    """
    if len(image_embs) != len(text_embs):
        raise DimensionMismatchError("one text embedding per image embedding required")
    if len(image_embs) < 2:
        raise DegenerateVectorError("a set sample needs at least 2 members to score")
    scores = []
    for i, j in combinations(range(len(image_embs)), 2):
        try:
            scores.append(directional_similarity(
                image_embs[i], image_embs[j], text_embs[i], text_embs[j]))
        except DegenerateVectorError:
            continue
    if not scores:
        raise DegenerateVectorError("all member pairs are degenerate")
    return float(np.mean(scores))


@dataclass(frozen=True)
class ScoredSample:
    """One generation attempt of a full set, scored for filtering."""

    set_id: str
    sample_index: int
    member_cosines: tuple[float, ...]
    directional_score: float

    @property
    def min_member_cosine(self) -> float:
        return min(self.member_cosines)


def score_sample(set_id: str, sample_index: int, caption_embs: Sequence, image_embs: Sequence) -> ScoredSample:
    cosines = tuple(
        caption_image_similarity(c, v) for c, v in zip(caption_embs, image_embs, strict=True)
    )
    return ScoredSample(
        set_id=set_id,
        sample_index=sample_index,
        member_cosines=cosines,
        directional_score=set_directional_score(image_embs, caption_embs),
    )


@dataclass(frozen=True)
class RetentionDecision:
    sample: ScoredSample
    retained: bool


def select_and_filter(
    samples: Iterable[ScoredSample],
    min_cosine: float = MIN_COSINE,
    keep: int = KEEP_PER_GROUP,
    group_key: Callable[[ScoredSample], str] | None = None,
) -> list[RetentionDecision]:
    """Apply the per-member cosine floor, then keep the top samples per group.

    Groups default to one counterfactual set. Survivors are ranked by
    directional score (descending), ties broken by sample index (ascending),
    so retention is invariant to the arrival order of samples. Decisions come
    back sorted by (set id, sample index).
    """
    if group_key is None:
        group_key = lambda s: s.set_id
    ordered = sorted(samples, key=lambda s: (s.set_id, s.sample_index))
    for prev, cur in zip(ordered, ordered[1:]):
        if (prev.set_id, prev.sample_index) == (cur.set_id, cur.sample_index):
            raise ValueError(f"duplicate sample ({cur.set_id!r}, {cur.sample_index})")

    groups: dict[str, list[ScoredSample]] = {}
    for sample in ordered:
        groups.setdefault(group_key(sample), []).append(sample)

    retained_keys: set[tuple[str, int]] = set()
    for members in groups.values():
        survivors = [s for s in members if s.min_member_cosine >= min_cosine]
        survivors.sort(key=lambda s: (-s.directional_score, s.sample_index, s.set_id))
        for s in survivors[:keep]:
            retained_keys.add((s.set_id, s.sample_index))

    return [
        RetentionDecision(s, (s.set_id, s.sample_index) in retained_keys)
        for s in ordered
    ]


def write_retention_report(decisions: Sequence[RetentionDecision], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RETENTION_HEADER)
        for d in decisions:
            writer.writerow([
                d.sample.set_id,
                d.sample.sample_index,
                "true" if d.retained else "false",
                repr(d.sample.min_member_cosine),
                repr(d.sample.directional_score),
            ])


def read_retained_keys(path: str | Path) -> set[tuple[str, int]]:
    """The (setId, sampleIndex) pairs marked retained in a retention report."""
    retained = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        for row in reader:
            if not row:
                continue
            if row[2] == "true":
                retained.add((row[0], int(row[1])))
    return retained
