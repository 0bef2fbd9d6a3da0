"""CLIP encoder wiring; skipped wherever the checkpoint cannot be loaded."""

import numpy as np
import pytest

from cfprobe_adapter.backends import AdapterConfig, AdapterError, resolve_encoder

CHECKPOINT = "clip:openai/clip-vit-base-patch32"


@pytest.fixture(scope="module")
def clip_encoder():
    pytest.importorskip("transformers")
    pytest.importorskip("torch")
    try:
        return resolve_encoder(AdapterConfig(encoder_checkpoint=CHECKPOINT))
    except AdapterError as exc:
        pytest.skip(f"checkpoint unavailable: {exc}")


def test_clip_text_encoding_deterministic(clip_encoder):
    a = clip_encoder.encode_texts(["a photo of a dog"])
    b = clip_encoder.encode_texts(["a photo of a dog"])
    assert np.allclose(a, b)
    assert a.shape == (1, clip_encoder.dim)


def test_clip_sanity_ordering(clip_encoder):
    def unit(v):
        return v / np.linalg.norm(v)

    dog, cat, sheet = (
        unit(v) for v in clip_encoder.encode_texts([
            "a photo of a dog", "a photo of a cat", "a spreadsheet of quarterly earnings"])
    )
    assert float(dog @ cat) > float(dog @ sheet)


def test_clip_image_encoding(clip_encoder):
    from PIL import Image

    image = Image.new("RGB", (224, 224), color=(128, 60, 20))
    features = clip_encoder.encode_images([image])
    assert features.shape == (1, clip_encoder.dim)
