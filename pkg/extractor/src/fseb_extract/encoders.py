"""Encoder backends: a pretrained contrastive vision-language model via
transformers, and a deterministic weight-free backend for smoke tests.

Every backend returns L2-normalized float64 rows; the writer narrows to
float32 on disk.
"""

from __future__ import annotations

import hashlib

import numpy as np
from PIL import Image


def _l2(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("cannot normalize a zero embedding row")
    return m / norms


class ToyEncoder:
    """Deterministic encoder with no pretrained weights.

    Images embed as a bilinearly-downscaled RGB thumbnail projected to
    ``dims`` through a seeded random matrix; texts embed as a bag of
    seeded per-token vectors. Only suitable for plumbing tests and smoke
    datasets: there is no learned vision-language alignment.
    """

    THUMB = 8  # thumbnail side; raw feature is THUMB*THUMB*3 values

    def __init__(self, dims: int = 64, seed: int = 0):
        self.dims = dims
        rng = np.random.Generator(np.random.Philox(seed))
        raw_dim = self.THUMB * self.THUMB * 3
        self._proj = rng.standard_normal((raw_dim, dims)) / np.sqrt(raw_dim)
        self._text_seed = seed

    def encode_images(self, paths) -> np.ndarray:
        rows = []
        for path in paths:
            with Image.open(path) as img:
                thumb = img.convert("RGB").resize(
                    (self.THUMB, self.THUMB), Image.BILINEAR
                )
            raw = np.asarray(thumb, dtype=np.float64).ravel() / 255.0
            rows.append((raw - raw.mean()) @ self._proj + 1e-6)
        return _l2(np.stack(rows))

    def _token_vector(self, token: str) -> np.ndarray:
        digest = hashlib.sha256(f"{self._text_seed}:{token}".encode()).digest()
        seed = int.from_bytes(digest[:8], "little")
        rng = np.random.Generator(np.random.Philox(seed))
        return rng.standard_normal(self.dims)

    def encode_texts(self, texts) -> np.ndarray:
        rows = [
            sum(self._token_vector(tok) for tok in text.lower().split())
            for text in texts
        ]
        return _l2(np.stack(rows))


class HFClipEncoder:
    """Contrastive vision-language model loaded through transformers.

    ``model_name`` may be a hub id or a local checkpoint directory. Both
    towers share the model; projections are L2-normalized as usual.
    """

    def __init__(self, model_name: str, device: str = "cpu", batch_size: int = 32):
        import torch
        from transformers import CLIPModel, CLIPProcessor

        self._torch = torch
        self.device = device
        self.batch_size = batch_size
        self.model = CLIPModel.from_pretrained(model_name).to(device).eval()
        self.processor = CLIPProcessor.from_pretrained(model_name)

    def encode_images(self, paths) -> np.ndarray:
        torch = self._torch
        rows = []
        for start in range(0, len(paths), self.batch_size):
            images = [
                Image.open(p).convert("RGB")
                for p in paths[start : start + self.batch_size]
            ]
            inputs = self.processor(images=images, return_tensors="pt").to(self.device)
            with torch.no_grad():
                feats = self.model.get_image_features(**inputs)
            rows.append(feats.double().cpu().numpy())
        return _l2(np.concatenate(rows))

    def encode_texts(self, texts) -> np.ndarray:
        torch = self._torch
        inputs = self.processor(
            text=list(texts), return_tensors="pt", padding=True
        ).to(self.device)
        with torch.no_grad():
            feats = self.model.get_text_features(**inputs)
        return _l2(feats.double().cpu().numpy())


def make_encoder(name: str, **kwargs):
    if name == "toy":
        return ToyEncoder(
            dims=kwargs.get("dims", 64), seed=kwargs.get("seed", 0)
        )
    if name == "hf-clip":
        return HFClipEncoder(
            model_name=kwargs["model_name"],
            device=kwargs.get("device", "cpu"),
            batch_size=kwargs.get("batch_size", 32),
        )
    raise ValueError(f"unknown encoder {name!r}")
