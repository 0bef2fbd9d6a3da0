"""Command-line pipeline wiring every stage to files on disk.

Subcommands: captions, plan, ingest, filter, evaluate, audit. Every flag can
also be supplied through an environment variable named CFPROBE_<FLAG>
(dashes become underscores); explicit flags win. Each run writes its outputs
plus a run_manifest.json with content hashes into --out, and identical
inputs with an identical seed reproduce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import audit as audit_mod
from . import captions as captions_mod
from . import filtering, metrics, planner, plotting, retrieval
from .config import Prefix, ProbeConfig, Subject, default_config, load_config, save_config
from .embeddings import (
    EmbeddingStore,
    ImageAsset,
    ingest,
    read_asset_metadata,
    write_store,
)
from .errors import StageError

ENV_PREFIX = "CFPROBE_"


def _env_default(flag: str, fallback=None):
    return os.environ.get(ENV_PREFIX + flag.upper().replace("-", "_"), fallback)


def _add_flag(parser: argparse.ArgumentParser, flag: str, **kwargs) -> None:
    fallback = kwargs.pop("default", None)
    env_value = _env_default(flag, None)
    if env_value is not None:
        caster = kwargs.get("type", str)
        kwargs["default"] = caster(env_value)
    else:
        kwargs["default"] = fallback
    parser.add_argument(f"--{flag}", **kwargs)


def _add_common(parser: argparse.ArgumentParser) -> None:
    _add_flag(parser, "config", help="probe configuration CSV (defaults to the shipped inventories)")
    _add_flag(parser, "out", required=_env_default("out") is None, help="output directory")
    _add_flag(parser, "seed", type=int, default=0, help="master seed for seeded stages")
    _add_flag(parser, "workers", type=int, default=1, help="parallel workers within a stage")


def _load_config(args) -> ProbeConfig:
    if args.config is None:
        return default_config()
    path = Path(args.config)
    if not path.exists():
        raise StageError(f"config file not found: {path}")
    return load_config(path)


def _require(path_str: str | None, what: str) -> Path:
    if path_str is None:
        raise StageError(f"missing required input: {what}")
    path = Path(path_str)
    if not path.exists():
        raise StageError(f"{what} not found: {path}")
    return path


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_run_manifest(out_dir: Path, command: str, params: Mapping, inputs: Iterable[Path], notes: Sequence[str] = ()) -> None:
    manifest = {
        "command": command,
        "parameters": {k: v for k, v in sorted(params.items())},
        "inputs": {str(p): _sha256(Path(p)) for p in sorted(set(map(str, inputs)))},
        "outputs": {
            p.name: _sha256(p)
            for p in sorted(out_dir.iterdir())
            if p.name != "run_manifest.json" and p.is_file()
        },
        "notes": list(notes),
    }
    with open(out_dir / "run_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------- captions


def cmd_captions(args) -> int:
    config = _load_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    census = captions_mod.dataset_census(config, args.samples_per_set)
    captions_mod.write_census_csv(census, out_dir / "census.csv")
    with open(out_dir / "census.csv", "a", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerow(
            ["total", "", "", census.total_sets, "", census.total_images])

    n_captions = 0
    n_sets = 0
    with open(out_dir / "captions.csv", "w", newline="", encoding="utf-8") as cap_fh, \
         open(out_dir / "sets.csv", "w", newline="", encoding="utf-8") as set_fh:
        cap_writer = csv.writer(cap_fh, lineterminator="\n")
        set_writer = csv.writer(set_fh, lineterminator="\n")
        cap_writer.writerow(captions_mod.CAPTION_HEADER)
        set_writer.writerow(captions_mod.SET_HEADER)
        for cf_set in captions_mod.enumerate_plan(config):
            set_writer.writerow([
                cf_set.id, cf_set.prefix.text, cf_set.subject.kind, cf_set.subject.label,
                cf_set.category_pair[0], cf_set.category_pair[1], len(cf_set.members),
            ])
            n_sets += 1
            for m in cf_set.members:
                cap_writer.writerow([
                    m.id, cf_set.id, m.prefix.text, m.subject.kind, m.subject.label,
                    m.attr1.category, m.attr1.label, m.attr2.category, m.attr2.label, m.text,
                ])
                n_captions += 1

    if n_captions != census.total_captions or n_sets != census.total_sets:
        raise StageError(
            f"enumeration disagrees with census: {n_captions} captions / {n_sets} sets "
            f"vs census {census.total_captions} / {census.total_sets}")

    captions_mod.write_neutral_prompts(config, out_dir / "neutral_prompts.csv")
    save_config(config, out_dir / "config.csv")

    inputs = [Path(args.config)] if args.config else []
    _write_run_manifest(out_dir, "captions", {
        "samples_per_set": args.samples_per_set, "seed": args.seed,
    }, inputs)
    print(f"captions={n_captions} sets={n_sets} planned_images={census.total_images}")
    return 0


# ---------------------------------------------------------------- plan


def cmd_plan(args) -> int:
    sets_path = _require(args.sets, "set manifest (--sets)")
    out_dir = Path(args.out)

    set_ids = []
    with open(sets_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        for row in reader:
            if row:
                set_ids.append(row[0])
    if not set_ids:
        raise StageError(f"set manifest is empty: {sets_path}")

    jobs = planner.plan_jobs(set_ids, args.samples_per_set, args.seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    planner.write_job_manifest(jobs, out_dir / "jobs.csv")
    _write_run_manifest(out_dir, "plan", {
        "samples_per_set": args.samples_per_set, "seed": args.seed,
    }, [sets_path])
    print(f"jobs={len(jobs)} sets={len(set_ids)}")
    return 0


# ---------------------------------------------------------------- ingest


def cmd_ingest(args) -> int:
    emb_path = _require(args.embeddings, "embedding file (--embeddings)")
    store = ingest(emb_path, kind=args.kind)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_store(store, out_dir / "validated.cfeb")
    _write_run_manifest(out_dir, "ingest", {"kind": args.kind, "seed": args.seed}, [emb_path])
    print(f"records={len(store)} dimension={store.dimension}")
    return 0


# ---------------------------------------------------------------- filter


@dataclass(frozen=True)
class CaptionRow:
    caption_id: str
    set_id: str
    prefix: str
    subject_kind: str
    subject: str
    cat_a: str
    attr_a: str
    cat_b: str
    attr_b: str
    text: str


def read_caption_manifest(path: str | Path) -> list[CaptionRow]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != captions_mod.CAPTION_HEADER:
            raise StageError(f"{path}: not a caption manifest")
        for row in reader:
            if row:
                rows.append(CaptionRow(*row))
    return rows


def cmd_filter(args) -> int:
    captions_path = _require(args.captions, "caption manifest (--captions)")
    assets_path = _require(args.assets, "asset metadata (--assets)")
    text_path = _require(args.text_embeddings, "caption embeddings (--text-embeddings)")
    image_path = _require(args.image_embeddings, "image embeddings (--image-embeddings)")

    caption_rows = read_caption_manifest(captions_path)
    assets = read_asset_metadata(assets_path)
    text_store = ingest(text_path, kind="text")
    image_store = ingest(image_path, kind="image")

    members_by_set: dict[str, list[CaptionRow]] = {}
    for row in caption_rows:
        members_by_set.setdefault(row.set_id, []).append(row)

    assets_by_sample: dict[tuple[str, int], dict[str, ImageAsset]] = {}
    for asset in assets:
        assets_by_sample.setdefault((asset.set_id, asset.sample_index), {})[asset.caption_id] = asset

    notes = []
    samples = []
    for (set_id, sample_index), by_caption in sorted(assets_by_sample.items()):
        members = members_by_set.get(set_id)
        if members is None:
            raise StageError(f"asset references unknown set {set_id!r}")
        missing = [m.caption_id for m in members if m.caption_id not in by_caption]
        if missing:
            notes.append(f"skipped incomplete sample ({set_id}, {sample_index}): "
                         f"{len(missing)} member(s) missing")
            continue
        caption_embs = [text_store.vector(m.caption_id) for m in members]
        image_embs = [image_store.vector(by_caption[m.caption_id].id) for m in members]
        samples.append(filtering.score_sample(set_id, sample_index, caption_embs, image_embs))

    decisions = filtering.select_and_filter(samples, args.min_cosine, args.keep)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    filtering.write_retention_report(decisions, out_dir / "retention.csv")
    _write_run_manifest(out_dir, "filter", {
        "min_cosine": args.min_cosine, "keep": args.keep, "seed": args.seed,
    }, [captions_path, assets_path, text_path, image_path], notes)
    retained = sum(1 for d in decisions if d.retained)
    print(f"samples={len(decisions)} retained={retained}")
    return 0


# ---------------------------------------------------------------- evaluate


def _read_desired_override(path: Path) -> metrics.DesiredDistribution:
    proportions = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for row in reader:
            if row:
                proportions[(row[0], row[1])] = float(row[2])
    return metrics.DesiredDistribution(proportions)


def _subject_report(
    subject: str,
    kind: str,
    combo: tuple[str, str],
    pool_ids: list[str],
    caption_of_asset: Mapping[str, CaptionRow],
    prefixes: Sequence[str],
    text_store: EmbeddingStore,
    image_store: EmbeddingStore,
    k: int,
    desired: metrics.DesiredDistribution,
) -> tuple[metrics.SkewReport, retrieval.RetrievalResult, metrics.ProportionBreakdown]:
    prompt_ids = [
        captions_mod.neutral_prompt_id(Prefix(p), Subject(kind, subject)) for p in prefixes
    ]
    missing = [pid for pid in prompt_ids if pid not in text_store]
    if missing:
        raise StageError(f"neutral prompt embedding(s) missing for subject {subject!r}")
    query = retrieval.average_text_embedding([text_store.vector(pid) for pid in prompt_ids])
    pool = image_store.subset(pool_ids)
    result = retrieval.top_k(query, pool, k, subject=subject, query_embedding_id=prompt_ids[0])
    pair_of_asset = {
        aid: (caption_of_asset[aid].attr_a, caption_of_asset[aid].attr_b) for aid in pool_ids
    }
    report = metrics.skew_report(result, desired, pair_of_asset, category_pair=combo)
    breakdown = metrics.proportion_breakdown(result, pair_of_asset, categories=combo)
    return report, result, breakdown


def cmd_evaluate(args) -> int:
    config = _load_config(args)
    captions_path = _require(args.captions, "caption manifest (--captions)")
    assets_path = _require(args.assets, "asset metadata (--assets)")
    retention_path = _require(args.retention, "retention report (--retention)")
    text_path = _require(args.text_embeddings, "neutral prompt embeddings (--text-embeddings)")
    image_path = _require(args.image_embeddings, "image embeddings (--image-embeddings)")
    desired_override = None
    if args.desired is not None:
        desired_override = _read_desired_override(_require(args.desired, "desired distribution (--desired)"))

    caption_rows = read_caption_manifest(captions_path)
    assets = read_asset_metadata(assets_path)
    retained = filtering.read_retained_keys(retention_path)
    text_store = ingest(text_path, kind="text")
    image_store = ingest(image_path, kind="image")

    rows_by_caption = {row.caption_id: row for row in caption_rows}
    caption_of_asset: dict[str, CaptionRow] = {}
    for asset in assets:
        row = rows_by_caption.get(asset.caption_id)
        if row is None:
            raise StageError(f"asset {asset.id!r} references unknown caption {asset.caption_id!r}")
        caption_of_asset[asset.id] = row

    # Evaluation combos in manifest order; prefixes as enumerated in the manifest.
    combos: list[tuple[str, str, str]] = []
    prefixes: list[str] = []
    for row in caption_rows:
        combo = (row.subject_kind, row.cat_a, row.cat_b)
        if combo not in combos:
            combos.append(combo)
        if row.prefix not in prefixes:
            prefixes.append(row.prefix)

    pools: dict[tuple[str, str, str], dict[str, list[str]]] = {c: {} for c in combos}
    for asset in assets:
        if (asset.set_id, asset.sample_index) not in retained:
            continue
        if asset.id not in image_store:
            raise StageError(f"retained asset {asset.id!r} has no image embedding")
        row = caption_of_asset[asset.id]
        combo_pools = pools[(row.subject_kind, row.cat_a, row.cat_b)]
        combo_pools.setdefault(row.subject, []).append(asset.id)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    notes = []
    summaries = []
    for kind, cat_a, cat_b in combos:
        labels_a = [v.label for v in config.attribute_values(cat_a)]
        labels_b = [v.label for v in config.attribute_values(cat_b)]
        k = args.k if args.k is not None else retrieval.default_k(labels_a, labels_b)
        desired = desired_override or metrics.DesiredDistribution.uniform_cross_product(labels_a, labels_b)

        combo_pools = pools[(kind, cat_a, cat_b)]
        subjects = [s for s in _ordered_subjects(caption_rows, kind, cat_a, cat_b)]
        jobs = []
        for subject in subjects:
            pool_ids = combo_pools.get(subject)
            if not pool_ids:
                notes.append(f"no retained images for {kind} {subject!r} ({cat_a} x {cat_b})")
                continue
            jobs.append((subject, pool_ids))

        def run(job):
            subject, pool_ids = job
            return _subject_report(
                subject, kind, (cat_a, cat_b), pool_ids, caption_of_asset,
                prefixes, text_store, image_store, k, desired,
            )
        if args.workers > 1:
            with ThreadPoolExecutor(max_workers=args.workers) as pool:
                outcomes = list(pool.map(run, jobs))
        else:
            outcomes = [run(job) for job in jobs]
        if not outcomes:
            notes.append(f"combo {kind} {cat_a} x {cat_b}: nothing to evaluate")
            continue

        reports = [r for r, _, _ in outcomes]
        tag = f"{kind}_{cat_a}_{cat_b}"
        metrics.write_skew_csv(reports, out_dir / f"skew_{tag}.csv")
        metrics.write_maxskew_csv(reports, out_dir / f"maxskew_{tag}.csv")
        metrics.write_proportions_csv(
            [(r.subject, b) for r, _, b in outcomes], out_dir / f"proportions_{tag}.csv")
        retrieval.write_retrieval_dump([res for _, res, _ in outcomes], out_dir / f"retrieval_{tag}.csv")
        summaries.append(metrics.aggregate_across_subjects(reports, group=f"{kind}|{cat_a}|{cat_b}"))
        plotting.save_maxskew_boxplot(
            reports, out_dir / f"maxskew_{tag}.svg", title=f"{kind}: {cat_a} x {cat_b}")

    if not summaries:
        raise StageError("no combo produced any evaluation")
    metrics.write_aggregate_csv(summaries, out_dir / "aggregate.csv")

    inputs = [captions_path, assets_path, retention_path, text_path, image_path]
    if args.config:
        inputs.append(Path(args.config))
    if args.desired:
        inputs.append(Path(args.desired))
    _write_run_manifest(out_dir, "evaluate", {
        "k": args.k, "seed": args.seed, "workers": args.workers,
    }, inputs, notes)
    print(f"combos={len(summaries)} subjects={sum(s.count for s in summaries)}")
    return 0


def _ordered_subjects(caption_rows: Sequence[CaptionRow], kind: str, cat_a: str, cat_b: str) -> list[str]:
    subjects = []
    for row in caption_rows:
        if row.subject_kind == kind and row.cat_a == cat_a and row.cat_b == cat_b:
            if row.subject not in subjects:
                subjects.append(row.subject)
    return subjects


# ---------------------------------------------------------------- audit


def cmd_audit(args) -> int:
    annotations_path = _require(args.annotations, "annotation file (--annotations)")
    annotations = audit_mod.read_annotations(annotations_path)
    out_dir = Path(args.out)
    inputs = [annotations_path]

    attrs_of_asset = None
    if args.captions is not None and args.assets is not None:
        captions_path = _require(args.captions, "caption manifest (--captions)")
        assets_path = _require(args.assets, "asset metadata (--assets)")
        inputs += [captions_path, assets_path]
        rows_by_caption = {row.caption_id: row for row in read_caption_manifest(captions_path)}
        attrs_of_asset = {}
        for asset in read_asset_metadata(assets_path):
            row = rows_by_caption.get(asset.caption_id)
            if row is not None:
                attrs_of_asset[asset.id] = {row.cat_a: row.attr_a, row.cat_b: row.attr_b}

    confusion = None
    if args.image_embeddings is not None and args.query_embeddings is not None:
        image_path = _require(args.image_embeddings, "image embeddings (--image-embeddings)")
        query_path = _require(args.query_embeddings, "query embeddings (--query-embeddings)")
        inputs += [image_path, query_path]
        image_store = ingest(image_path, kind="image")
        query_store = ingest(query_path, kind="text")
        queries = {label: query_store.vector(label) for label in query_store.ids}
        predictions = {}
        for a in annotations:
            if a.category not in audit_mod.DISCERNIBLE_CATEGORIES:
                continue
            if a.asset_id not in image_store:
                raise StageError(f"annotated asset {a.asset_id!r} has no image embedding")
            predictions[a.asset_id] = audit_mod.predict_attribute(
                image_store.vector(a.asset_id), queries)
        confusion = audit_mod.confusion_stats(predictions, annotations, classes=tuple(query_store.ids))

    census = audit_mod.error_census(annotations, attrs_of_asset)
    out_dir.mkdir(parents=True, exist_ok=True)
    audit_mod.write_error_census_csv(
        census, out_dir / "error_census.csv",
        out_dir / "error_breakdown.csv" if census.breakdown is not None else None)
    if confusion is not None:
        audit_mod.write_confusion_csv(confusion, out_dir / "confusion.csv")

    _write_run_manifest(out_dir, "audit", {"seed": args.seed}, inputs)
    good = census.percentages.get("good", 0.0)
    print(f"annotations={len(annotations)} good_percent={good:.1f}")
    return 0


# ---------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfprobe",
        description="Counterfactual caption sets and retrieval-bias measurement.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("captions", help="enumerate captions, sets, neutral prompts, census")
    _add_common(p)
    _add_flag(p, "samples-per-set", type=int, default=captions_mod.DEFAULT_SAMPLES_PER_SET,
              help="planned generation attempts per set")
    p.set_defaults(func=cmd_captions)

    p = sub.add_parser("plan", help="emit the generation-job manifest")
    _add_common(p)
    _add_flag(p, "sets", help="set manifest from the captions stage")
    _add_flag(p, "samples-per-set", type=int, default=captions_mod.DEFAULT_SAMPLES_PER_SET)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("ingest", help="validate an embedding file and write a canonical copy")
    _add_common(p)
    _add_flag(p, "embeddings", help="embedding file to validate")
    _add_flag(p, "kind", choices=["text", "image"], default="image")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("filter", help="score samples and write the retention report")
    _add_common(p)
    _add_flag(p, "captions", help="caption manifest CSV")
    _add_flag(p, "assets", help="asset metadata CSV")
    _add_flag(p, "text-embeddings", help="caption embedding file")
    _add_flag(p, "image-embeddings", help="image embedding file")
    _add_flag(p, "min-cosine", type=float, default=filtering.MIN_COSINE)
    _add_flag(p, "keep", type=int, default=filtering.KEEP_PER_GROUP)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("evaluate", help="retrieve with neutral prompts and compute skew metrics")
    _add_common(p)
    _add_flag(p, "captions", help="caption manifest CSV")
    _add_flag(p, "assets", help="asset metadata CSV")
    _add_flag(p, "retention", help="retention report from the filter stage")
    _add_flag(p, "text-embeddings", help="neutral prompt embedding file")
    _add_flag(p, "image-embeddings", help="image embedding file")
    _add_flag(p, "k", type=int, help="override K (default: |A1| x |A2| per combo)")
    _add_flag(p, "desired", help="desired-distribution override CSV (labelA,labelB,proportion)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("audit", help="error census and embedding-based confusion stats")
    _add_common(p)
    _add_flag(p, "annotations", help="annotation CSV (assetId,category,annotatedGender)")
    _add_flag(p, "captions", help="caption manifest CSV (enables the race/gender breakdown)")
    _add_flag(p, "assets", help="asset metadata CSV (enables the race/gender breakdown)")
    _add_flag(p, "image-embeddings", help="image embedding file (enables confusion stats)")
    _add_flag(p, "query-embeddings", help="query embedding file keyed by class label")
    p.set_defaults(func=cmd_audit)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single exit point with a stage name
        print(f"cfprobe {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
