"""CLIP text/image encoding through transformers, in deterministic eval mode.

Imports are lazy and checkpoint loading happens at construction, so callers
without torch/transformers (or without the checkpoint available locally) fail
fast with a clear message instead of mid-run.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .backends import AdapterError


class ClipEncoder:
    def __init__(self, checkpoint: str, device: str = "cpu"):
        try:
            import torch
            from transformers import CLIPModel, CLIPProcessor
        except ImportError as exc:
            raise AdapterError(
                f"clip backend needs torch and transformers installed: {exc}") from exc
        try:
            self._model = CLIPModel.from_pretrained(checkpoint).to(device).eval()
            self._processor = CLIPProcessor.from_pretrained(checkpoint)
        except Exception as exc:
            raise AdapterError(f"cannot resolve CLIP checkpoint {checkpoint!r}: {exc}") from exc
        self._torch = torch
        self._device = device
        self.checkpoint = checkpoint
        self.dim = int(self._model.config.projection_dim)

    def encode_texts(self, texts: Sequence[str]) -> np.ndarray:
        inputs = self._processor(
            text=list(texts), return_tensors="pt", padding=True, truncation=True)
        inputs = {k: v.to(self._device) for k, v in inputs.items()}
        with self._torch.no_grad():
            features = self._model.get_text_features(**inputs)
        return features.cpu().numpy().astype(np.float64)

    def encode_images(self, images) -> np.ndarray:
        inputs = self._processor(images=list(images), return_tensors="pt")
        inputs = {k: v.to(self._device) for k, v in inputs.items()}
        with self._torch.no_grad():
            features = self._model.get_image_features(**inputs)
        return features.cpu().numpy().astype(np.float64)
