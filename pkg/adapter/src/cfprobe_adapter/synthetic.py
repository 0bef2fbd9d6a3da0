"""A self-contained joint encoder and set generator for offline runs.

The two towers meet in a shared concept space keyed by per-token colors: the
generator renders each caption token as a colored band in the image's top
strip, and the image encoder reads the bands back. The rest of the image is a
background blend of a set-wide pattern and per-member noise, weighted by the
attention-share parameter p, so larger p produces visually tighter sets —
mirroring how shared cross-attention behaves in a real generator.

Everything derives from SHA-256 of the inputs, so outputs are reproducible
bit-for-bit for a given (captions, p, seed).
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from PIL import Image

IMAGE_SIZE = 128
STRIP_ROWS = 32
POOL_GRID = 16          # background downsample resolution
BACKGROUND_WEIGHT = 0.35


def _hash_rng(*parts) -> random.Random:
    key = "\x1f".join(str(p) for p in parts)
    return random.Random(int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest(), "big"))


def _unit_gaussian(rng: random.Random, dim: int) -> np.ndarray:
    vec = np.array([rng.gauss(0.0, 1.0) for _ in range(dim)])
    return vec / np.linalg.norm(vec)


def token_color(token: str) -> tuple[int, int, int]:
    digest = hashlib.sha256(f"band-color\x1f{token}".encode("utf-8")).digest()
    return digest[0], digest[1], digest[2]


_CONCEPT_CACHE: dict[tuple, np.ndarray] = {}
_PROJECTION_CACHE: dict[int, np.ndarray] = {}


def _band_widths(n_tokens: int, width: int = IMAGE_SIZE) -> list[int]:
    base, extra = divmod(width, n_tokens)
    return [base + (1 if i < extra else 0) for i in range(n_tokens)]


@dataclass(frozen=True)
class SyntheticEncoder:
    """Joint text/image encoder over the band-color concept space."""

    dim: int = 64

    def _concept(self, color: tuple[int, int, int]) -> np.ndarray:
        key = (self.dim, color)
        if key not in _CONCEPT_CACHE:
            _CONCEPT_CACHE[key] = _unit_gaussian(_hash_rng("concept", self.dim, *color), self.dim)
        return _CONCEPT_CACHE[key]

    def _background_projection(self) -> np.ndarray:
        if self.dim not in _PROJECTION_CACHE:
            rng = _hash_rng("background-projection", self.dim)
            matrix = np.array([
                [rng.gauss(0.0, 1.0) for _ in range(POOL_GRID * POOL_GRID)]
                for _ in range(self.dim)
            ])
            _PROJECTION_CACHE[self.dim] = matrix / np.sqrt(POOL_GRID * POOL_GRID)
        return _PROJECTION_CACHE[self.dim]

    def _strip_vector(self, colors_and_weights) -> np.ndarray:
        vec = np.zeros(self.dim)
        for color, weight in colors_and_weights:
            vec += weight * self._concept(color)
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise ValueError("caption produced an empty concept vector")
        return vec / norm

    def encode_text(self, text: str) -> np.ndarray:
        tokens = text.split()
        if not tokens:
            raise ValueError("cannot encode empty text")
        widths = _band_widths(len(tokens))
        pairs = [(token_color(t), w / IMAGE_SIZE) for t, w in zip(tokens, widths)]
        return self._strip_vector(pairs)

    def encode_texts(self, texts: Sequence[str]) -> np.ndarray:
        return np.array([self.encode_text(t) for t in texts])

    def encode_image(self, image: Image.Image) -> np.ndarray:
        pixels = np.asarray(image.convert("RGB"), dtype=np.uint8)
        if pixels.shape[0] <= STRIP_ROWS:
            raise ValueError("image too short to carry a band strip")
        strip_row = pixels[0]
        runs = []
        start = 0
        for col in range(1, strip_row.shape[0] + 1):
            if col == strip_row.shape[0] or not np.array_equal(strip_row[col], strip_row[start]):
                color = tuple(int(c) for c in strip_row[start])
                runs.append((color, (col - start) / strip_row.shape[0]))
                start = col
        strip_vec = self._strip_vector(runs)

        background = pixels[STRIP_ROWS:].astype(np.float64).mean(axis=2) / 255.0
        pooled = _mean_pool(background, POOL_GRID)
        pooled -= pooled.mean()  # drop global brightness; keep the pattern
        bg_vec = self._background_projection() @ pooled.ravel()
        bg_norm = np.linalg.norm(bg_vec)
        if bg_norm > 0.0:
            strip_vec = strip_vec + BACKGROUND_WEIGHT * bg_vec / bg_norm
        return strip_vec / np.linalg.norm(strip_vec)

    def encode_images(self, images: Sequence[Image.Image]) -> np.ndarray:
        return np.array([self.encode_image(img) for img in images])


def _mean_pool(field: np.ndarray, grid: int) -> np.ndarray:
    rows = np.array_split(field, grid, axis=0)
    return np.array([[block.mean() for block in np.array_split(r, grid, axis=1)] for r in rows])


@dataclass(frozen=True)
class SyntheticGenerator:
    """Renders one image per caption with a p-weighted shared background."""

    size: int = IMAGE_SIZE

    def generate_set(self, captions: Sequence[str], p: float, seed: int) -> list[Image.Image]:
        if not captions:
            raise ValueError("cannot generate an empty set")
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"attention share p must be in [0, 1], got {p}")
        body_rows = self.size - STRIP_ROWS
        shared_rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
        shared = shared_rng.uniform(0.0, 1.0, size=(body_rows, self.size))

        images = []
        for member_index, caption in enumerate(captions):
            tokens = caption.split()
            if not tokens:
                raise ValueError(f"member {member_index} has an empty caption")
            if len(tokens) > self.size:
                raise ValueError(f"caption has more tokens than pixel columns: {caption!r}")
            pixels = np.zeros((self.size, self.size, 3), dtype=np.uint8)

            col = 0
            for token, width in zip(tokens, _band_widths(len(tokens), self.size)):
                pixels[:STRIP_ROWS, col : col + width] = token_color(token)
                col += width

            member_seed = int.from_bytes(
                hashlib.sha256(f"member-bg\x1f{seed}\x1f{member_index}".encode()).digest()[:8],
                "little")
            independent = np.random.default_rng(member_seed).uniform(
                0.0, 1.0, size=(body_rows, self.size))
            background = p * shared + (1.0 - p) * independent
            gray = np.round(background * 255.0).astype(np.uint8)
            pixels[STRIP_ROWS:] = gray[:, :, None]
            images.append(Image.fromarray(pixels, mode="RGB"))
        return images
