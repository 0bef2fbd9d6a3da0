"""Audits over human annotations: gender prediction, confusion stats, error census.

Gender prediction compares an image embedding against two query-text
embeddings ("A male person" / "A female person" by default) and picks the
strictly higher cosine; exact ties are returned as undetermined, never
silently assigned. The same argmax mechanism generalizes to any label set.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatchError, IngestError

MALE_QUERY_TEXT = "A male person"
FEMALE_QUERY_TEXT = "A female person"

UNDETERMINED = "undetermined"

ERROR_CATEGORIES = ("good", "cannot_discern_gender", "fail_female", "fail_male", "out_of_frame")
# Categories whose images show an identifiable person of some gender.
DISCERNIBLE_CATEGORIES = frozenset({"good", "fail_female", "fail_male"})

ANNOTATION_HEADER = ("assetId", "category", "annotatedGender")
CONFUSION_HEADER = ("class", "precision", "recall", "f1", "support")
CENSUS_HEADER = ("category", "count", "percent")
BREAKDOWN_HEADER = ("category", "race", "gender", "count", "percent")


@dataclass(frozen=True)
class AuditAnnotation:
    asset_id: str
    category: str
    annotated_gender: str | None = None

    def __post_init__(self):
        if self.category not in ERROR_CATEGORIES:
            raise ValueError(f"unknown annotation category {self.category!r}")
        discernible = self.category in DISCERNIBLE_CATEGORIES
        if discernible and self.annotated_gender not in ("male", "female"):
            raise ValueError(
                f"{self.asset_id}: category {self.category!r} requires an annotated gender")
        if not discernible and self.annotated_gender is not None:
            raise ValueError(
                f"{self.asset_id}: category {self.category!r} cannot carry an annotated gender")


def predict_attribute(image_emb, query_embs: Mapping[str, np.ndarray]) -> str:
    """Argmax over query embeddings; UNDETERMINED when the best score is tied."""
    img = np.asarray(image_emb, dtype=np.float64)
    if len(query_embs) < 2:
        raise ValueError("need at least two query embeddings")
    scores = {}
    for label, q in query_embs.items():
        q = np.asarray(q, dtype=np.float64)
        if q.shape != img.shape:
            raise DimensionMismatchError(f"query {label!r} shape {q.shape} vs image {img.shape}")
        scores[label] = float(np.dot(img, q))
    best = max(scores.values())
    winners = [label for label, s in scores.items() if s == best]
    return winners[0] if len(winners) == 1 else UNDETERMINED


def predict_gender(image_emb, male_query_emb, female_query_emb) -> str:
    return predict_attribute(image_emb, {"male": male_query_emb, "female": female_query_emb})


@dataclass(frozen=True)
class ClassStats:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class ConfusionStats:
    per_class: Mapping[str, ClassStats]


def confusion_stats(
    predictions: Mapping[str, str],
    annotations: Sequence[AuditAnnotation],
    classes: tuple[str, ...] = ("male", "female"),
) -> ConfusionStats:
    """Per-class precision/recall/F1 of predictions against discernible annotations.

    Undetermined predictions are counted as errors: they miss the true class
    (hurting recall) without being credited to any class.
    """
    truth = {
        a.asset_id: a.annotated_gender for a in annotations
        if a.category in DISCERNIBLE_CATEGORIES
    }
    matched = [aid for aid in predictions if aid in truth]
    if not matched:
        raise ValueError("no overlap between prediction and annotation asset ids")

    per_class = {}
    for cls in classes:
        tp = sum(1 for aid in matched if predictions[aid] == cls and truth[aid] == cls)
        fp = sum(1 for aid in matched if predictions[aid] == cls and truth[aid] != cls)
        fn = sum(1 for aid in matched if predictions[aid] != cls and truth[aid] == cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[cls] = ClassStats(precision, recall, f1, support=tp + fn)
    return ConfusionStats(per_class)


@dataclass(frozen=True)
class ErrorCensus:
    counts: Mapping[str, int]
    percentages: Mapping[str, float]
    # (category, race, gender) -> (count, percent of that race-gender cell)
    breakdown: Mapping[tuple[str, str, str], tuple[int, float]] | None = None


def error_census(
    annotations: Sequence[AuditAnnotation],
    attrs_of_asset: Mapping[str, Mapping[str, str]] | None = None,
) -> ErrorCensus:
    """Category percentages over all annotations; per-(race, gender) breakdown
    of each category when asset attributes are supplied."""
    if not annotations:
        raise ValueError("need at least one annotation")
    counts = Counter(a.category for a in annotations)
    total = len(annotations)
    percentages = {cat: 100.0 * counts.get(cat, 0) / total for cat in ERROR_CATEGORIES}

    breakdown = None
    if attrs_of_asset is not None:
        cell_totals: Counter = Counter()
        cell_counts: Counter = Counter()
        for a in annotations:
            attrs = attrs_of_asset.get(a.asset_id)
            if attrs is None or "race" not in attrs or "gender" not in attrs:
                continue
            cell = (attrs["race"], attrs["gender"])
            cell_totals[cell] += 1
            cell_counts[(a.category, *cell)] += 1
        breakdown = {
            key: (count, 100.0 * count / cell_totals[key[1:]])
            for key, count in sorted(cell_counts.items())
        }
    return ErrorCensus(dict(counts), percentages, breakdown)


def read_annotations(path: str | Path) -> list[AuditAnnotation]:
    """Read the annotation CSV (header: assetId,category,annotatedGender)."""
    annotations = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise IngestError(f"{path}: empty annotation file")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise IngestError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            gender = row[2].strip() or None
            try:
                annotations.append(AuditAnnotation(row[0], row[1].strip(), gender))
            except ValueError as exc:
                raise IngestError(f"{path}:{lineno}: {exc}") from None
    return annotations


def write_annotations(annotations: Sequence[AuditAnnotation], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ANNOTATION_HEADER)
        for a in annotations:
            writer.writerow([a.asset_id, a.category, a.annotated_gender or ""])


def write_confusion_csv(stats: ConfusionStats, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CONFUSION_HEADER)
        for cls, s in stats.per_class.items():
            writer.writerow([cls, repr(s.precision), repr(s.recall), repr(s.f1), s.support])


def write_error_census_csv(census: ErrorCensus, path: str | Path, breakdown_path: str | Path | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CENSUS_HEADER)
        for cat in ERROR_CATEGORIES:
            writer.writerow([cat, census.counts.get(cat, 0), repr(census.percentages[cat])])
    if breakdown_path is not None and census.breakdown is not None:
        with open(breakdown_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(BREAKDOWN_HEADER)
            for (cat, race, gender), (count, percent) in census.breakdown.items():
                writer.writerow([cat, race, gender, count, repr(percent)])
