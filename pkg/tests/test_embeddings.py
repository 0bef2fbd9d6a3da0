import struct

import numpy as np
import pytest

from cfprobe.embeddings import (
    ingest,
    mock_embed,
    normalize,
    read_asset_metadata,
    write_asset_metadata,
    write_embeddings,
    write_store,
    ImageAsset,
)
from cfprobe.errors import DegenerateVectorError, IngestError


def test_normalize_three_four_five():
    assert np.allclose(normalize([3.0, 4.0]), [0.6, 0.8], atol=1e-12)


def test_normalize_idempotent():
    v = normalize([1.0, 2.0, -2.0])
    assert np.allclose(normalize(v), v, atol=1e-12)
    assert abs(np.linalg.norm(v) - 1.0) < 1e-9


def test_normalize_rejects_zero_and_nonfinite():
    with pytest.raises(DegenerateVectorError):
        normalize([0.0, 0.0])
    with pytest.raises(DegenerateVectorError):
        normalize([1.0, float("nan")])


def test_mock_embed_deterministic():
    assert np.array_equal(mock_embed("a", 8), mock_embed("a", 8))


def test_mock_embed_distinct_tokens():
    assert not np.allclose(mock_embed("a", 8), mock_embed("b", 8))


def test_mock_embed_unit_norm():
    v = mock_embed("anything", 16)
    assert abs(float(v @ v) - 1.0) < 1e-9


def test_mock_embed_dimension_floor():
    with pytest.raises(ValueError):
        mock_embed("a", 1)


def _random_file(path, rng, n=5, dim=8, ids=None):
    ids = ids or [f"id-{i}" for i in range(n)]
    vectors = rng.normal(size=(len(ids), dim))
    write_embeddings(path, ids, vectors)
    return ids, vectors


def test_write_ingest_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    for trial in range(20):
        path = tmp_path / f"t{trial}.cfeb"
        ids, vectors = _random_file(path, rng, n=int(rng.integers(1, 30)))
        store = ingest(path)
        assert store.ids == tuple(ids)
        for rid, vec in zip(ids, vectors):
            expected = vec / np.linalg.norm(vec)
            assert np.allclose(store.vector(rid), expected, atol=1e-6)


def test_round_trip_preserves_bytes_of_normalized_file(tmp_path):
    rng = np.random.default_rng(1)
    raw = rng.normal(size=(4, 6))
    ids = ["a", "b", "c", "d"]
    first = tmp_path / "first.cfeb"
    write_embeddings(first, ids, raw)
    second = tmp_path / "second.cfeb"
    write_store(ingest(first), second)
    third = tmp_path / "third.cfeb"
    write_store(ingest(second), third)
    assert second.read_bytes() == third.read_bytes()


def test_vectors_normalized_on_load(tmp_path):
    path = tmp_path / "f.cfeb"
    write_embeddings(path, ["big"], np.array([[30.0, 40.0]]))
    store = ingest(path)
    assert np.allclose(store.vector("big"), [0.6, 0.8], atol=1e-6)


def test_store_is_sealed(tmp_path):
    path = tmp_path / "f.cfeb"
    _random_file(path, np.random.default_rng(2))
    store = ingest(path)
    with pytest.raises(ValueError):
        store.matrix[0, 0] = 5.0


def test_cosine_bound(tmp_path):
    path = tmp_path / "f.cfeb"
    ids, _ = _random_file(path, np.random.default_rng(3), n=20, dim=4)
    store = ingest(path)
    gram = store.matrix @ store.matrix.T
    assert np.all(np.abs(gram) <= 1.0 + 1e-9)


def test_truncated_payload(tmp_path):
    path = tmp_path / "f.cfeb"
    _random_file(path, np.random.default_rng(4))
    data = path.read_bytes()
    path.write_bytes(data[:-3])
    with pytest.raises(IngestError, match="truncated"):
        ingest(path)


def test_count_mismatch(tmp_path):
    path = tmp_path / "f.cfeb"
    write_embeddings(path, ["x", "y"], np.eye(2))
    data = bytearray(path.read_bytes())
    # header count field is the u64 at offset 10
    struct.pack_into("<Q", data, 10, 3)
    path.write_bytes(bytes(data))
    with pytest.raises(IngestError, match="truncated"):
        ingest(path)
    struct.pack_into("<Q", data, 10, 1)
    path.write_bytes(bytes(data))
    with pytest.raises(IngestError, match="trailing"):
        ingest(path)


def test_unsupported_version(tmp_path):
    path = tmp_path / "f.cfeb"
    write_embeddings(path, ["x"], np.eye(1, 3), version=2)
    with pytest.raises(IngestError, match="version"):
        ingest(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "f.cfeb"
    write_embeddings(path, ["x"], np.eye(1, 3))
    data = bytearray(path.read_bytes())
    data[:4] = b"NOPE"
    path.write_bytes(bytes(data))
    with pytest.raises(IngestError, match="magic"):
        ingest(path)


def test_duplicate_id_named(tmp_path):
    path = tmp_path / "f.cfeb"
    write_embeddings(path, ["same", "same"], np.eye(2, 4))
    with pytest.raises(IngestError, match="same"):
        ingest(path)


def test_nonfinite_component_named(tmp_path):
    path = tmp_path / "f.cfeb"
    vectors = np.array([[1.0, 0.0], [np.nan, 1.0]], dtype=np.float32)
    write_embeddings(path, ["ok", "bad"], vectors)
    with pytest.raises(IngestError, match="bad"):
        ingest(path)


def test_zero_vector_named(tmp_path):
    path = tmp_path / "f.cfeb"
    write_embeddings(path, ["ok", "null"], np.array([[1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(IngestError, match="null"):
        ingest(path)


def test_subset_preserves_order_and_vectors(tmp_path):
    path = tmp_path / "f.cfeb"
    ids, _ = _random_file(path, np.random.default_rng(5), n=6)
    store = ingest(path)
    sub = store.subset(["id-4", "id-1"])
    assert sub.ids == ("id-4", "id-1")
    assert np.array_equal(sub.vector("id-1"), store.vector("id-1"))


def test_asset_metadata_round_trip(tmp_path):
    assets = [
        ImageAsset("a1", "c1", "s1", 0, "a1"),
        ImageAsset("a2", "c1", "s1", 1, "a2"),
    ]
    path = tmp_path / "assets.csv"
    write_asset_metadata(assets, path)
    assert read_asset_metadata(path) == assets


def test_asset_metadata_duplicate_id(tmp_path):
    path = tmp_path / "assets.csv"
    path.write_text("a1,c1,s1,0\na1,c2,s1,1\n")
    with pytest.raises(IngestError, match="a1"):
        read_asset_metadata(path)
