"""Skew@K / MaxSkew@K, proportion breakdowns, and cross-subject aggregation.

Skew@K for an attribute pair is the natural log of the ratio between the
pair's actual proportion among the top-K retrieved images and its desired
proportion. MaxSkew@K is the maximum over all pairs; zero means retrieval
matches the desired distribution at its worst-off pair. Pairs retrieved zero
times get a negative-infinity sentinel rather than an epsilon-smoothed value.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .embeddings import EmbeddingStore
from .retrieval import RetrievalResult, top_k

NEG_INF = float("-inf")

PairKey = tuple[str, ...]

SKEW_HEADER = ("subject", "catA", "catB", "pair", "skew")
MAXSKEW_HEADER = ("subject", "maxskew")
AGGREGATE_HEADER = (
    "group", "mean", "min", "q1", "median", "q3", "max",
    "argmin_subject", "argmax_subject", "neg_inf_count",
)
PROPORTION_HEADER = ("subject", "table", "key", "proportion")
_SUM_TOL = 1e-9


@dataclass(frozen=True)
class DesiredDistribution:
    """Target retrieval proportion per attribute pair; must sum to one."""

    proportions: Mapping[PairKey, float]

    def __post_init__(self):
        if not self.proportions:
            raise ValueError("desired distribution is empty")
        total = math.fsum(self.proportions.values())
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"desired proportions sum to {total!r}, not 1")
        for pair, p in self.proportions.items():
            if not p > 0.0:
                raise ValueError(f"desired proportion for {pair!r} must be positive, got {p!r}")

    def __getitem__(self, pair: PairKey) -> float:
        return self.proportions[pair]

    def __contains__(self, pair: PairKey) -> bool:
        return pair in self.proportions

    @property
    def pairs(self) -> tuple[PairKey, ...]:
        return tuple(self.proportions)

    @classmethod
    def uniform(cls, pairs: Sequence[PairKey]) -> "DesiredDistribution":
        pairs = list(pairs)
        return cls({tuple(p): 1.0 / len(pairs) for p in pairs})

    @classmethod
    def uniform_cross_product(cls, labels_a: Sequence[str], labels_b: Sequence[str]) -> "DesiredDistribution":
        return cls.uniform([(a, b) for a in labels_a for b in labels_b])


@dataclass(frozen=True)
class SkewReport:
    subject: str
    k: int
    per_pair: Mapping[PairKey, float]
    max_skew: float
    proportions: Mapping[PairKey, float]
    category_pair: tuple[str, ...] = ()


def _retrieved_pairs(result: RetrievalResult, pair_of_asset: Mapping[str, PairKey]) -> list[PairKey]:
    pairs = []
    for asset_id in result.asset_ids:
        try:
            pairs.append(tuple(pair_of_asset[asset_id]))
        except KeyError:
            raise ValueError(f"retrieved asset {asset_id!r} has no attribute-pair label") from None
    return pairs


def _skew_of(count: int, total: int, desired_p: float) -> float:
    if count == 0:
        return NEG_INF
    return math.log((count / total) / desired_p)


def skew_at_k(
    result: RetrievalResult,
    pair: PairKey,
    desired: DesiredDistribution,
    pair_of_asset: Mapping[str, PairKey],
) -> float:
    """Skew of one attribute pair in one retrieval; -inf when never retrieved."""
    pair = tuple(pair)
    if pair not in desired:
        raise ValueError(f"pair {pair!r} is not in the desired distribution")
    pairs = _retrieved_pairs(result, pair_of_asset)
    return _skew_of(pairs.count(pair), len(pairs), desired[pair])


def max_skew_at_k(
    result: RetrievalResult,
    desired: DesiredDistribution,
    pair_of_asset: Mapping[str, PairKey],
) -> float:
    """Maximum skew over every pair in the desired distribution."""
    return skew_report(result, desired, pair_of_asset).max_skew


def skew_report(
    result: RetrievalResult,
    desired: DesiredDistribution,
    pair_of_asset: Mapping[str, PairKey],
    category_pair: tuple[str, ...] = (),
) -> SkewReport:
    """Per-pair skews, MaxSkew, and actual proportions for one retrieval."""
    pairs = _retrieved_pairs(result, pair_of_asset)
    counts = Counter(pairs)
    unknown = [p for p in counts if p not in desired]
    if unknown:
        raise ValueError(f"retrieved pair(s) outside the desired distribution: {sorted(unknown)}")
    total = len(pairs)
    per_pair = {p: _skew_of(counts.get(p, 0), total, desired[p]) for p in desired.pairs}
    proportions = {p: counts.get(p, 0) / total for p in desired.pairs}
    return SkewReport(
        subject=result.subject,
        k=result.k,
        per_pair=per_pair,
        max_skew=max(per_pair.values()),
        proportions=proportions,
        category_pair=category_pair,
    )


def conditional_skew(
    query,
    pool: EmbeddingStore,
    pool_filter: tuple[str, str],
    measured_category: str,
    desired: DesiredDistribution,
    attrs_of_asset: Mapping[str, Mapping[str, str]],
    k: int = 12,
    subject: str = "",
) -> SkewReport:
    """Marginal skew over one category, within a pool fixed to one attribute value.

    pool_filter is a (category, label) pair, e.g. ("race", "White"); the
    candidate pool is restricted to assets carrying it, the same neutral
    query retrieves top-k, and skew is computed over measured_category labels.
    k defaults to 12, the usual reporting depth for race x gender pools.
    """
    filter_cat, filter_label = pool_filter
    kept = [
        asset_id for asset_id in pool.ids
        if attrs_of_asset.get(asset_id, {}).get(filter_cat) == filter_label
    ]
    if not kept:
        raise ValueError(f"no pool assets carry {filter_cat}={filter_label!r}")
    restricted = pool.subset(kept)
    result = top_k(query, restricted, k, subject=subject)
    marginal_of_asset = {
        asset_id: (attrs_of_asset[asset_id][measured_category],) for asset_id in kept
    }
    return skew_report(result, desired, marginal_of_asset, category_pair=(measured_category,))


@dataclass(frozen=True)
class ProportionBreakdown:
    joint: Mapping[PairKey, float]
    marginals: Mapping[str, Mapping[str, float]]


def proportion_breakdown(
    result: RetrievalResult,
    pair_of_asset: Mapping[str, PairKey],
    categories: tuple[str, str] = ("cat_a", "cat_b"),
) -> ProportionBreakdown:
    """Joint proportions over pairs plus per-category marginals (row/column sums)."""
    pairs = _retrieved_pairs(result, pair_of_asset)
    if not pairs:
        raise ValueError("empty retrieval result")
    total = len(pairs)
    joint = {p: c / total for p, c in sorted(Counter(pairs).items())}
    marginals: dict[str, dict[str, float]] = {categories[0]: {}, categories[1]: {}}
    for (label_a, label_b), prop in joint.items():
        marginals[categories[0]][label_a] = marginals[categories[0]].get(label_a, 0.0) + prop
        marginals[categories[1]][label_b] = marginals[categories[1]].get(label_b, 0.0) + prop
    return ProportionBreakdown(joint, marginals)


@dataclass(frozen=True)
class AggregateSummary:
    """Distribution of MaxSkew across subjects, with the extreme subjects named."""

    group: str
    count: int
    mean: float
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    argmin_subject: str
    argmax_subject: str
    neg_inf_count: int


def aggregate_across_subjects(reports: Sequence[SkewReport], group: str = "") -> AggregateSummary:
    """Five-number summary (plus mean) of MaxSkew over subjects.

    Negative-infinity sentinels are excluded from the summary statistics and
    reported as a separate count.
    """
    if not reports:
        raise ValueError("need at least one report to aggregate")
    finite = [r for r in reports if r.max_skew != NEG_INF]
    neg_inf_count = len(reports) - len(finite)
    if not finite:
        raise ValueError("every report has a negative-infinity MaxSkew")
    values = np.array([r.max_skew for r in finite], dtype=np.float64)
    q1, median, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    argmin = min(finite, key=lambda r: (r.max_skew, r.subject))
    argmax = min(finite, key=lambda r: (-r.max_skew, r.subject))
    return AggregateSummary(
        group=group,
        count=len(finite),
        mean=float(values.mean()),
        minimum=float(values.min()),
        q1=float(q1),
        median=float(median),
        q3=float(q3),
        maximum=float(values.max()),
        argmin_subject=argmin.subject,
        argmax_subject=argmax.subject,
        neg_inf_count=neg_inf_count,
    )


def format_pair(pair: PairKey) -> str:
    return "|".join(pair)


def write_skew_csv(reports: Sequence[SkewReport], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SKEW_HEADER)
        for report in reports:
            cat_a = report.category_pair[0] if report.category_pair else ""
            cat_b = report.category_pair[1] if len(report.category_pair) > 1 else ""
            for pair in sorted(report.per_pair):
                writer.writerow([
                    report.subject, cat_a, cat_b, format_pair(pair), repr(report.per_pair[pair]),
                ])


def write_maxskew_csv(reports: Sequence[SkewReport], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MAXSKEW_HEADER)
        for report in reports:
            writer.writerow([report.subject, repr(report.max_skew)])


def write_aggregate_csv(summaries: Sequence[AggregateSummary], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGGREGATE_HEADER)
        for s in summaries:
            writer.writerow([
                s.group, repr(s.mean), repr(s.minimum), repr(s.q1), repr(s.median),
                repr(s.q3), repr(s.maximum), s.argmin_subject, s.argmax_subject, s.neg_inf_count,
            ])


def write_proportions_csv(
    breakdowns: Sequence[tuple[str, ProportionBreakdown]], path: str | Path
) -> None:
    """Rows: subject, table ("joint" or "marginal:<category>"), key, proportion."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PROPORTION_HEADER)
        for subject, breakdown in breakdowns:
            for pair in sorted(breakdown.joint):
                writer.writerow([subject, "joint", format_pair(pair), repr(breakdown.joint[pair])])
            for category in breakdown.marginals:
                for label in sorted(breakdown.marginals[category]):
                    writer.writerow([
                        subject, f"marginal:{category}", label,
                        repr(breakdown.marginals[category][label]),
                    ])
