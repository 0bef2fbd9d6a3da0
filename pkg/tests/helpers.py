"""Shared fixture builders: synthetic pipelines driven by the mock embedder."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from cfprobe.captions import (
    enumerate_plan,
    neutral_prompt,
    neutral_prompt_id,
    write_caption_manifest,
    write_neutral_prompts,
    write_set_manifest,
)
from cfprobe.config import AttributeValue, Prefix, ProbeConfig, Subject, save_config
from cfprobe.embeddings import ImageAsset, mock_embed, normalize, write_asset_metadata, write_embeddings
from cfprobe.filtering import RETENTION_HEADER

DIM = 32

RACES = ("White", "Black", "Indian", "Asian", "Middle Eastern", "Latino")
GENDERS = ("male", "female")


def race_gender_config(subjects, prefixes=("A", "A photo of a"), races=RACES) -> ProbeConfig:
    return ProbeConfig(
        prefixes=tuple(Prefix(p) for p in prefixes),
        subjects=tuple(Subject("occupation", s) for s in subjects),
        attributes=tuple(AttributeValue("race", r) for r in races)
        + tuple(AttributeValue("gender", g) for g in GENDERS),
    )


def image_with_cosine(caption_vec: np.ndarray, target: float, noise_token: str) -> np.ndarray:
    """A unit vector whose cosine with caption_vec is exactly `target`."""
    noise = mock_embed(noise_token, caption_vec.shape[0])
    orth = normalize(noise - float(noise @ caption_vec) * caption_vec)
    return target * caption_vec + np.sqrt(1.0 - target * target) * orth


def asset_id_for(caption_id: str, sample_index: int) -> str:
    return f"{caption_id}-{sample_index:03d}"


def write_retention(path: Path, rows) -> None:
    """rows: iterable of (set_id, sample_index, retained, min_cosine, score)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RETENTION_HEADER)
        for set_id, sample_index, retained, min_cos, score in rows:
            writer.writerow([set_id, sample_index,
                             "true" if retained else "false", repr(min_cos), repr(score)])


@dataclass
class PlantedPipeline:
    """File layout of a synthetic pipeline with controlled retrieval pools."""

    config_path: Path
    captions_path: Path
    sets_path: Path
    prompts_path: Path
    assets_path: Path
    retention_path: Path
    image_emb_path: Path
    prompt_emb_path: Path
    planted_subject: str
    subjects: tuple[str, ...]


def build_planted_pipeline(
    root: Path,
    subjects=("doctor", "pilot", "teacher", "farmer", "chef"),
    planted_subject="doctor",
    planted_multiplicity=3,
) -> PlantedPipeline:
    """A race x gender fixture where one subject's pool over-represents
    (White, male) `planted_multiplicity` times and every other subject's pool
    covers each attribute pair exactly once.

    Pools are exactly K = 12 assets, so top-12 retrieval returns the whole
    pool and the skew values are fully determined by the planted pair counts.
    """
    root.mkdir(parents=True, exist_ok=True)
    config = race_gender_config(subjects)
    paths = PlantedPipeline(
        config_path=root / "config.csv",
        captions_path=root / "captions.csv",
        sets_path=root / "sets.csv",
        prompts_path=root / "neutral_prompts.csv",
        assets_path=root / "assets.csv",
        retention_path=root / "retention.csv",
        image_emb_path=root / "images.cfeb",
        prompt_emb_path=root / "prompts.cfeb",
        planted_subject=planted_subject,
        subjects=tuple(subjects),
    )
    save_config(config, paths.config_path)

    sets = list(enumerate_plan(config))
    write_caption_manifest(sets, paths.captions_path)
    write_set_manifest(sets, paths.sets_path)
    write_neutral_prompts(config, paths.prompts_path)

    # One retained generation sample per (prefix="A", subject) set; the
    # planted subject additionally retains two partial samples holding only
    # its over-represented (White, male) caption.
    assets: list[ImageAsset] = []
    retention_rows = []
    first_prefix_sets = [s for s in sets if s.prefix.text == "A"]
    for cf_set in first_prefix_sets:
        planted = cf_set.subject.label == planted_subject
        skip_pairs = set()
        if planted:
            # drop as many trailing pairs as the extra copies added
            tail = [(m.attr1.label, m.attr2.label) for m in cf_set.members][-(planted_multiplicity - 1):]
            skip_pairs = set(tail)
        for member in cf_set.members:
            if (member.attr1.label, member.attr2.label) in skip_pairs:
                continue
            assets.append(ImageAsset(
                asset_id_for(member.id, 0), member.id, cf_set.id, 0, asset_id_for(member.id, 0)))
        retention_rows.append((cf_set.id, 0, True, 0.9, 0.9))
        if planted:
            white_male = next(
                m for m in cf_set.members
                if (m.attr1.label, m.attr2.label) == ("White", "male"))
            for extra_sample in (1, 2)[: planted_multiplicity - 1]:
                assets.append(ImageAsset(
                    asset_id_for(white_male.id, extra_sample), white_male.id,
                    cf_set.id, extra_sample, asset_id_for(white_male.id, extra_sample)))
                retention_rows.append((cf_set.id, extra_sample, True, 0.9, 0.9))
    write_asset_metadata(assets, paths.assets_path)
    write_retention(paths.retention_path, retention_rows)

    write_embeddings(
        paths.image_emb_path,
        [a.id for a in assets],
        np.array([mock_embed(a.id, DIM) for a in assets]),
    )

    prompt_ids, prompt_vecs = [], []
    for prefix in config.prefixes:
        for subject in config.subjects:
            prompt_ids.append(neutral_prompt_id(prefix, subject))
            prompt_vecs.append(mock_embed(neutral_prompt(prefix, subject), DIM))
    write_embeddings(paths.prompt_emb_path, prompt_ids, np.array(prompt_vecs))
    return paths
