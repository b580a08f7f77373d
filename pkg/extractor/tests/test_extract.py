import json

import numpy as np
import pytest
from PIL import Image

from fseb_extract.encoders import ToyEncoder
from fseb_extract.extract import ExtractJob, extract_text, extract_visual

CLASSES = ["cat", "dog", "bird"]
COLORS = {"cat": (200, 40, 40), "dog": (40, 200, 40), "bird": (40, 40, 200)}


def make_images(root, per_class=4, seed=0):
    rng = np.random.Generator(np.random.Philox(seed))
    for name in CLASSES:
        d = root / name
        d.mkdir(parents=True)
        base = np.array(COLORS[name], dtype=np.float64)
        for i in range(per_class):
            noise = rng.integers(-30, 30, size=(16, 16, 3))
            pixels = np.clip(base[None, None, :] + noise, 0, 255).astype(np.uint8)
            Image.fromarray(pixels).save(d / f"img{i}.png")


@pytest.fixture
def image_root(tmp_path):
    root = tmp_path / "images"
    make_images(root)
    return root


class TestExtractVisual:
    def test_two_images(self, tmp_path):
        root = tmp_path / "imgs"
        (root / "cat").mkdir(parents=True)
        for i in range(2):
            Image.new("RGB", (8, 8), (100 + i, 0, 0)).save(root / "cat" / f"{i}.png")
        job = ExtractJob(str(root), ["cat"], str(tmp_path / "v.fseb"),
                         str(tmp_path / "m.json"))
        summary = extract_visual(job, ToyEncoder())
        assert summary == {"rows": 2, "skipped": 0}

    def test_manifest_rows_align(self, image_root, tmp_path):
        job = ExtractJob(str(image_root), CLASSES, str(tmp_path / "v.fseb"),
                         str(tmp_path / "m.json"))
        summary = extract_visual(job, ToyEncoder())
        manifest = json.loads((tmp_path / "m.json").read_text())
        assert manifest["class_names"] == CLASSES
        rows = [it["row_index"] for it in manifest["items"]]
        assert rows == list(range(summary["rows"]))

    def test_duplicate_image_identical_rows(self, tmp_path):
        root = tmp_path / "imgs"
        (root / "cat").mkdir(parents=True)
        img = Image.new("RGB", (8, 8), (120, 60, 30))
        img.save(root / "cat" / "a.png")
        img.save(root / "cat" / "b.png")
        out = tmp_path / "v.fseb"
        job = ExtractJob(str(root), ["cat"], str(out))
        extract_visual(job, ToyEncoder())
        payload = np.frombuffer(out.read_bytes()[28:], dtype="<f4").reshape(2, 64)
        assert np.array_equal(payload[0], payload[1])

    def test_corrupt_image_skipped(self, image_root, tmp_path):
        (image_root / "cat" / "broken.png").write_bytes(b"not an image")
        job = ExtractJob(str(image_root), CLASSES, str(tmp_path / "v.fseb"),
                         str(tmp_path / "m.json"))
        summary = extract_visual(job, ToyEncoder())
        assert summary["skipped"] == 1
        manifest = json.loads((tmp_path / "m.json").read_text())
        assert len(manifest["items"]) == summary["rows"] == 12


class TestExtractText:
    def test_three_classes(self, tmp_path):
        out = tmp_path / "t.fseb"
        job = ExtractJob(None, CLASSES, str(out))
        summary = extract_text(job, ToyEncoder(dims=32))
        assert summary == {"rows": 3}
        payload = np.frombuffer(out.read_bytes()[28:], dtype="<f4")
        assert payload.shape == (96,)

    def test_repeated_class_name_identical_rows(self, tmp_path):
        out = tmp_path / "t.fseb"
        job = ExtractJob(None, ["cat", "cat"], str(out))
        extract_text(job, ToyEncoder())
        payload = np.frombuffer(out.read_bytes()[28:], dtype="<f4").reshape(2, -1)
        assert np.array_equal(payload[0], payload[1])

    def test_empty_class_list_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            ExtractJob(None, [], str(tmp_path / "t.fseb"))


class TestToyEncoder:
    def test_deterministic(self, image_root):
        paths = sorted((image_root / "cat").iterdir())
        a = ToyEncoder(seed=3).encode_images(paths)
        b = ToyEncoder(seed=3).encode_images(paths)
        assert np.array_equal(a, b)

    def test_unit_rows(self, image_root):
        paths = sorted((image_root / "dog").iterdir())
        m = ToyEncoder().encode_images(paths)
        assert np.max(np.abs(np.linalg.norm(m, axis=1) - 1.0)) < 1e-12
        t = ToyEncoder().encode_texts(["a photo of a dog"])
        assert np.linalg.norm(t[0]) == pytest.approx(1.0, abs=1e-12)
