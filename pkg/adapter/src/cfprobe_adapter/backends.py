"""Backend resolution: encoder and generator checkpoints to live objects.

Checkpoints are resolved up front, before any job runs, so a bad id fails the
whole run immediately. The synthetic backend ("synthetic-<dim>") is always
available and fully offline; "clip:<model id>" wraps a transformers CLIP
checkpoint for encoding. Real diffusion generators plug in through
GENERATOR_FACTORIES.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .synthetic import SyntheticEncoder, SyntheticGenerator


class AdapterError(RuntimeError):
    """Configuration or checkpoint resolution failure."""


@dataclass(frozen=True)
class AdapterConfig:
    encoder_checkpoint: str = "synthetic-64"
    generator_checkpoint: str = "synthetic-64"
    device: str = "cpu"
    batch_size: int = 8
    sampler: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.batch_size < 1:
            raise AdapterError(f"batch size must be >= 1, got {self.batch_size}")


def _synthetic_dim(checkpoint: str) -> int:
    suffix = checkpoint.split("-", 1)[1] if "-" in checkpoint else ""
    try:
        dim = int(suffix)
    except ValueError:
        raise AdapterError(
            f"synthetic checkpoint must look like 'synthetic-<dim>', got {checkpoint!r}") from None
    if dim < 8:
        raise AdapterError(f"synthetic dimension must be >= 8, got {dim}")
    return dim


def resolve_encoder(config: AdapterConfig):
    checkpoint = config.encoder_checkpoint
    if checkpoint.startswith("synthetic"):
        return SyntheticEncoder(dim=_synthetic_dim(checkpoint))
    if checkpoint.startswith("clip:"):
        from .clip_encoder import ClipEncoder

        return ClipEncoder(checkpoint.split(":", 1)[1], device=config.device)
    raise AdapterError(f"unknown encoder checkpoint {checkpoint!r}")


GENERATOR_FACTORIES = {
    "synthetic": lambda config: SyntheticGenerator(),
}


def resolve_generator(config: AdapterConfig):
    checkpoint = config.generator_checkpoint
    family = checkpoint.split("-", 1)[0].split(":", 1)[0]
    factory = GENERATOR_FACTORIES.get(family)
    if factory is None:
        raise AdapterError(
            f"no generator backend for {checkpoint!r}; register one in "
            f"GENERATOR_FACTORIES (available: {sorted(GENERATOR_FACTORIES)})")
    return factory(config)


def resolve(config: AdapterConfig):
    """Both backends, resolved before any job runs."""
    return resolve_encoder(config), resolve_generator(config)
