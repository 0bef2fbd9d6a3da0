"""Caption enumeration: counterfactual sets, neutral prompts, dataset census.

Captions follow the template  <prefix> <attr1> <attr2> <subject>  joined with
single spaces. All captions sharing one (prefix, subject, category pair) form
a counterfactual set spanning the attribute cross-product exactly once.
Identifiers are content hashes so re-enumeration is stable across runs.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .config import AttributeValue, Prefix, ProbeConfig, Subject
from .errors import ConfigurationError

DEFAULT_SAMPLES_PER_SET = 100

CENSUS_HEADER = ("subject_kind", "cat_a", "cat_b", "sets", "images_per_set", "total_images")
CAPTION_HEADER = (
    "captionId", "setId", "prefix", "subjectKind", "subject",
    "catA", "attrA", "catB", "attrB", "text",
)
SET_HEADER = ("setId", "prefix", "subjectKind", "subject", "catA", "catB", "size")
NEUTRAL_PROMPT_HEADER = ("promptId", "prefix", "subjectKind", "subject", "text")


def _content_id(*parts: str) -> str:
    digest = hashlib.sha256("\x1f".join(parts).encode("utf-8")).hexdigest()
    return digest[:16]


@dataclass(frozen=True)
class CaptionRecord:
    id: str
    prefix: Prefix
    subject: Subject
    attr1: AttributeValue
    attr2: AttributeValue
    text: str


@dataclass(frozen=True)
class CounterfactualSet:
    """All captions for one (prefix, subject) across a category cross-product."""

    id: str
    prefix: Prefix
    subject: Subject
    category_pair: tuple[str, str]
    members: tuple[CaptionRecord, ...]


def caption_id(prefix: Prefix, subject: Subject, attr1: AttributeValue, attr2: AttributeValue) -> str:
    return _content_id(
        "caption", prefix.text, subject.kind, subject.label,
        attr1.category, attr1.label, attr2.category, attr2.label,
    )


def set_id(prefix: Prefix, subject: Subject, cat_a: str, cat_b: str) -> str:
    return _content_id("set", prefix.text, subject.kind, subject.label, cat_a, cat_b)


def neutral_prompt_id(prefix: Prefix, subject: Subject) -> str:
    return _content_id("neutral", prefix.text, subject.kind, subject.label)


def caption_text(prefix: Prefix, attr1: AttributeValue, attr2: AttributeValue, subject: Subject) -> str:
    return " ".join((prefix.text, attr1.label, attr2.label, subject.label))


def neutral_prompt(prefix: Prefix, subject: Subject) -> str:
    """The attribute-free query text for one (prefix, subject)."""
    return " ".join((prefix.text, subject.label))


def enumerate_captions(
    prefixes: Sequence[Prefix],
    subjects: Sequence[Subject],
    cat_a_values: Sequence[AttributeValue],
    cat_b_values: Sequence[AttributeValue],
) -> list[CounterfactualSet]:
    """Enumerate |prefixes| x |subjects| counterfactual sets for one category pair.

    Ordering is deterministic: prefix order, then subject order, then
    cat A order, then cat B order.
    """
    if not prefixes or not subjects or not cat_a_values or not cat_b_values:
        raise ConfigurationError("enumerate_captions requires non-empty inputs")
    cat_a = _sole_category(cat_a_values)
    cat_b = _sole_category(cat_b_values)
    if cat_a == cat_b:
        raise ConfigurationError(f"attribute sets must come from distinct categories, both are {cat_a!r}")
    _check_unique("prefix", [p.text for p in prefixes])
    _check_unique("subject", [(s.kind, s.label) for s in subjects])
    _check_unique("attribute", [a.label for a in cat_a_values])
    _check_unique("attribute", [a.label for a in cat_b_values])

    sets = []
    for prefix in prefixes:
        for subject in subjects:
            members = tuple(
                CaptionRecord(
                    id=caption_id(prefix, subject, a1, a2),
                    prefix=prefix,
                    subject=subject,
                    attr1=a1,
                    attr2=a2,
                    text=caption_text(prefix, a1, a2, subject),
                )
                for a1 in cat_a_values
                for a2 in cat_b_values
            )
            sets.append(CounterfactualSet(
                id=set_id(prefix, subject, cat_a, cat_b),
                prefix=prefix,
                subject=subject,
                category_pair=(cat_a, cat_b),
                members=members,
            ))
    return sets


def enumerate_plan(config: ProbeConfig) -> Iterator[CounterfactualSet]:
    """Enumerate every counterfactual set in the configuration's plan, lazily."""
    for kind, (cat_a, cat_b) in config.plan:
        yield from enumerate_captions(
            config.prefixes,
            config.subjects_of(kind),
            config.attribute_values(cat_a),
            config.attribute_values(cat_b),
        )


def _sole_category(values: Sequence[AttributeValue]) -> str:
    categories = {v.category for v in values}
    if len(categories) != 1:
        raise ConfigurationError(f"attribute set mixes categories: {sorted(categories)}")
    return next(iter(categories))


def _check_unique(what: str, items: Sequence) -> None:
    if len(set(items)) != len(items):
        dupes = sorted({i for i in items if items.count(i) > 1})
        raise ConfigurationError(f"duplicate {what} label(s): {dupes}")


@dataclass(frozen=True)
class CensusRow:
    subject_kind: str
    cat_a: str
    cat_b: str
    sets: int
    images_per_set: int
    total_images: int


@dataclass(frozen=True)
class Census:
    rows: tuple[CensusRow, ...]

    @property
    def total_sets(self) -> int:
        return sum(r.sets for r in self.rows)

    @property
    def total_captions(self) -> int:
        return sum(r.sets * r.images_per_set for r in self.rows)

    @property
    def total_images(self) -> int:
        return sum(r.total_images for r in self.rows)


def dataset_census(config: ProbeConfig, samples_per_set: int = DEFAULT_SAMPLES_PER_SET) -> Census:
    """Set/caption/image counts per (subject kind, category pair) in the plan.

    total_images counts planned generations: sets x images-per-set x samples.
    """
    rows = []
    n_prefixes = len(config.prefixes)
    for kind, (cat_a, cat_b) in config.plan:
        n_sets = n_prefixes * len(config.subjects_of(kind))
        per_set = len(config.attribute_values(cat_a)) * len(config.attribute_values(cat_b))
        rows.append(CensusRow(
            subject_kind=kind,
            cat_a=cat_a,
            cat_b=cat_b,
            sets=n_sets,
            images_per_set=per_set,
            total_images=n_sets * per_set * samples_per_set,
        ))
    return Census(tuple(rows))


def write_census_csv(census: Census, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CENSUS_HEADER)
        for r in census.rows:
            writer.writerow([r.subject_kind, r.cat_a, r.cat_b, r.sets, r.images_per_set, r.total_images])


def write_caption_manifest(sets: Iterable[CounterfactualSet], path: str | Path) -> int:
    """Write one row per caption; returns the caption count."""
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CAPTION_HEADER)
        for cf_set in sets:
            for m in cf_set.members:
                writer.writerow([
                    m.id, cf_set.id, m.prefix.text, m.subject.kind, m.subject.label,
                    m.attr1.category, m.attr1.label, m.attr2.category, m.attr2.label, m.text,
                ])
                count += 1
    return count


def write_set_manifest(sets: Iterable[CounterfactualSet], path: str | Path) -> int:
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SET_HEADER)
        for cf_set in sets:
            writer.writerow([
                cf_set.id, cf_set.prefix.text, cf_set.subject.kind, cf_set.subject.label,
                cf_set.category_pair[0], cf_set.category_pair[1], len(cf_set.members),
            ])
            count += 1
    return count


def write_neutral_prompts(config: ProbeConfig, path: str | Path) -> int:
    """One neutral prompt per (prefix, subject); the query side of retrieval."""
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(NEUTRAL_PROMPT_HEADER)
        for prefix in config.prefixes:
            for subject in config.subjects:
                writer.writerow([
                    neutral_prompt_id(prefix, subject), prefix.text,
                    subject.kind, subject.label, neutral_prompt(prefix, subject),
                ])
                count += 1
    return count
