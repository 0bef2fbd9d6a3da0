"""Deterministic generation-job manifests for the over-generation protocol.

Each counterfactual set gets `samples_per_set` jobs (default 100). A job
carries the attention-share fraction p, drawn uniformly from [0.1, 0.9], and
a 64-bit seed. Both come from a counter-based scheme (SHA-256 over
master seed, set id, sample index, scheme tag) so manifests are reproducible
bit-for-bit across machines; no RNG state is threaded through the plan.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .captions import CounterfactualSet

P_LOW = 0.1
P_HIGH = 0.9

# Bump if the derivation below ever changes; frozen manifests depend on it.
SCHEME = "cfprobe-plan-v1"


@dataclass(frozen=True)
class GenerationJob:
    set_id: str
    sample_index: int
    p: float
    seed: int


def _job_digest(master_seed: int, set_id: str, sample_index: int) -> bytes:
    key = f"{SCHEME}\x1f{master_seed}\x1f{set_id}\x1f{sample_index}"
    return hashlib.sha256(key.encode("utf-8")).digest()


def job_for(master_seed: int, set_id: str, sample_index: int) -> GenerationJob:
    """The (p, seed) assignment for one (set, sample); pure in its arguments."""
    digest = _job_digest(master_seed, set_id, sample_index)
    # 53 bits so the uniform variate is exactly representable in a double.
    u = (int.from_bytes(digest[:8], "little") >> 11) / float(1 << 53)
    seed = int.from_bytes(digest[8:16], "little")
    return GenerationJob(set_id, sample_index, P_LOW + (P_HIGH - P_LOW) * u, seed)


def plan_jobs(
    sets: Sequence[CounterfactualSet | str],
    samples_per_set: int = 100,
    master_seed: int = 0,
) -> list[GenerationJob]:
    """One manifest entry per (set, sample index); identical inputs, identical plan."""
    if samples_per_set < 1:
        raise ValueError(f"samples_per_set must be >= 1, got {samples_per_set}")
    jobs = []
    for s in sets:
        sid = s if isinstance(s, str) else s.id
        for i in range(samples_per_set):
            jobs.append(job_for(master_seed, sid, i))
    return jobs


def write_job_manifest(jobs: Iterable[GenerationJob], path: str | Path) -> int:
    """Headerless CSV rows: setId, sampleIndex, p (6 decimal places), seed."""
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for job in jobs:
            writer.writerow([job.set_id, job.sample_index, f"{job.p:.6f}", job.seed])
            count += 1
    return count


def read_job_manifest(path: str | Path) -> list[GenerationJob]:
    jobs = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            jobs.append(GenerationJob(row[0], int(row[1]), float(row[2]), int(row[3])))
    return jobs
