"""cfprobe-adapter: runs generation/encoding jobs for the probe pipeline.

Consumes the probe's job and caption manifests, produces images plus
embedding files in its bit-exact format, and reports per-job status.
"""

from .backends import AdapterConfig, AdapterError, resolve, resolve_encoder, resolve_generator
from .formats import (
    read_caption_manifest,
    read_job_manifest,
    write_asset_metadata,
    write_embedding_file,
    write_status,
)
from .runner import run_job, run_manifest
from .synthetic import SyntheticEncoder, SyntheticGenerator

__version__ = "0.1.0"
