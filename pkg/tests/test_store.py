import json
import struct

import numpy as np
import pytest

from causalfsl.errors import (
    BadMagicError,
    SizeOverflowError,
    TruncatedPayloadError,
    UnknownItemError,
    UnsupportedVersionError,
)
from causalfsl.store import (
    Manifest,
    ManifestItem,
    build_onehot,
    load_unit_rows,
    read_embeddings,
    write_embeddings,
)


@pytest.fixture
def manifest():
    return Manifest(
        "toy",
        ["a", "b", "c"],
        [
            ManifestItem("i0", 0, 0),
            ManifestItem("i1", 2, 1),
            ManifestItem("i2", 1, 2),
        ],
    )


class TestEmbeddingFile:
    def test_round_trip_small(self, tmp_path):
        m = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
        path = tmp_path / "m.fseb"
        write_embeddings(path, m)
        assert np.array_equal(read_embeddings(path), m)

    @pytest.mark.parametrize("dtype", ["f4", "f8"])
    def test_round_trip_100_seeded(self, tmp_path, dtype):
        path = tmp_path / "m.fseb"
        for seed in range(100):
            rng = np.random.Generator(np.random.Philox(seed))
            m = rng.standard_normal((rng.integers(1, 8), rng.integers(1, 8)))
            if dtype == "f4":
                m = m.astype(np.float32).astype(np.float64)
            write_embeddings(path, m, dtype=dtype)
            assert np.array_equal(read_embeddings(path), m)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.fseb"
        path.write_bytes(b"XXXX" + b"\0" * 24)
        with pytest.raises(BadMagicError):
            read_embeddings(path)

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / "v9.fseb"
        path.write_bytes(struct.pack("<4sIIQQ", b"FSEB", 9, 2, 0, 0))
        with pytest.raises(UnsupportedVersionError):
            read_embeddings(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "trunc.fseb"
        write_embeddings(path, np.ones((10, 2)))
        data = path.read_bytes()
        path.write_bytes(data[: len(data) - 16])  # drop the last row
        with pytest.raises(TruncatedPayloadError):
            read_embeddings(path)

    def test_size_overflow(self, tmp_path):
        path = tmp_path / "huge.fseb"
        path.write_bytes(struct.pack("<4sIIQQ", b"FSEB", 1, 2, 1 << 40, 1 << 20))
        with pytest.raises(SizeOverflowError):
            read_embeddings(path)

    def test_load_unit_rows_renormalizes(self, tmp_path):
        path = tmp_path / "off.fseb"
        m = np.array([[2.0, 0.0], [0.0, 1.0]])
        write_embeddings(path, m)
        loaded, count = load_unit_rows(path)
        assert count == 1
        assert np.allclose(np.linalg.norm(loaded, axis=1), 1.0, atol=1e-12)

    def test_load_unit_rows_keeps_near_unit(self, tmp_path):
        path = tmp_path / "ok.fseb"
        m = np.array([[1.0 + 5e-5, 0.0]])
        write_embeddings(path, m)
        loaded, count = load_unit_rows(path)
        assert count == 0
        assert np.array_equal(loaded, m)


class TestManifest:
    def test_json_round_trip(self, manifest, tmp_path):
        path = tmp_path / "m.json"
        manifest.save(path)
        loaded = Manifest.load(path)
        assert loaded == manifest

    def test_unknown_fields_ignored(self, manifest):
        obj = manifest.to_json()
        obj["future_field"] = {"x": 1}
        obj["items"][0]["note"] = "extra"
        loaded = Manifest.from_json(obj)
        assert loaded.class_names == manifest.class_names

    def test_duplicate_row_index_rejected(self):
        with pytest.raises(ValueError):
            Manifest("d", ["a"], [ManifestItem("x", 0, 0), ManifestItem("y", 0, 0)])

    def test_bad_class_index_rejected(self):
        with pytest.raises(Exception):
            Manifest("d", ["a"], [ManifestItem("x", 1, 0)])


class TestBuildOnehot:
    def test_three_items(self, manifest):
        out = build_onehot(manifest, ["i0", "i1", "i2"])
        assert np.array_equal(out, [[1, 0, 0], [0, 0, 1], [0, 1, 0]])

    def test_empty_subset(self, manifest):
        out = build_onehot(manifest, [])
        assert out.shape == (0, 3)

    def test_unknown_item(self, manifest):
        with pytest.raises(UnknownItemError):
            build_onehot(manifest, ["nope"])

    def test_row_and_column_sums(self):
        rng = np.random.Generator(np.random.Philox(3))
        classes = [f"c{i}" for i in range(5)]
        items = [
            ManifestItem(f"i{j}", int(rng.integers(0, 5)), j) for j in range(40)
        ]
        man = Manifest("d", classes, items)
        out = build_onehot(man, [it.item_id for it in items])
        assert np.array_equal(np.sum(out, axis=1), np.ones(40))
        counts = np.zeros(5)
        for it in items:
            counts[it.class_index] += 1
        assert np.array_equal(np.sum(out, axis=0), counts)
