"""Drive the probe toolkit through its installed CLI; no imports of it here."""

from __future__ import annotations

import csv
import subprocess
import sys
from pathlib import Path

PROBE = [sys.executable, "-m", "cfprobe"]


def probe(*args) -> subprocess.CompletedProcess:
    return subprocess.run(
        PROBE + [str(a) for a in args], capture_output=True, text=True, check=False)


def probe_ingest(embedding_path: Path, out_dir: Path) -> subprocess.CompletedProcess:
    return probe("ingest", "--embeddings", embedding_path, "--out", out_dir)


def write_probe_config(path: Path, subjects, prefixes=("A", "A photo of a"),
                       races=("White", "Black"), genders=("male", "female")) -> None:
    """A probe configuration CSV in its documented (kind, category, label) format."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for prefix in prefixes:
            writer.writerow(["prefix", "", prefix])
        for subject in subjects:
            writer.writerow(["subject", "occupation", subject])
        for race in races:
            writer.writerow(["attribute", "race", race])
        for gender in genders:
            writer.writerow(["attribute", "gender", gender])
