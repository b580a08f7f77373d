"""Synthetic embedding generator: class means on the unit sphere, noisy
items, and two decorrelated "encoders" (A and B) plus per-encoder text
heads. Lets the full pipeline and ablations run with no pretrained models.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .episodes import rng_for
from .numerics import l2_normalize_rows
from .store import Manifest, ManifestItem, write_embeddings


@dataclass
class SynthSpec:
    n_classes: int = 10
    dims: int = 64
    train_per_class: int = 16
    test_per_class: int = 20
    visual_noise: float = 0.35
    text_noise_a: float = 0.2
    text_noise_b: float = 0.2
    seed: int = 42

    def __post_init__(self):
        if self.dims < 2:
            raise ValueError("dims must be >= 2")
        for name in ("visual_noise", "text_noise_a", "text_noise_b"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass
class SynthDataset:
    """In-memory result of a generation run; all rows unit-norm."""

    train_manifest: Manifest
    test_manifest: Manifest
    train_a: np.ndarray
    train_b: np.ndarray
    test_a: np.ndarray
    test_b: np.ndarray
    text_a: np.ndarray
    text_b: np.ndarray


def _noisy_copies(rng, means, per_class, noise):
    d = means.shape[1]
    rows = []
    for mean in means:
        pts = mean[None, :] + noise * rng.standard_normal((per_class, d))
        rows.append(pts)
    return l2_normalize_rows(np.concatenate(rows, axis=0))


def _manifest(name, n_classes, per_class, prefix):
    items = [
        ManifestItem(f"{prefix}-{c:03d}-{i:03d}", c, c * per_class + i)
        for c in range(n_classes)
        for i in range(per_class)
    ]
    classes = [f"class-{c:03d}" for c in range(n_classes)]
    return Manifest(name, classes, items)


def generate(spec: SynthSpec) -> SynthDataset:
    """Deterministic per seed. Encoders A and B share class means but draw
    independent item noise, so their mistakes decorrelate."""
    rng = rng_for(spec.seed)
    means = l2_normalize_rows(rng.standard_normal((spec.n_classes, spec.dims)))

    train_a = _noisy_copies(rng, means, spec.train_per_class, spec.visual_noise)
    train_b = _noisy_copies(rng, means, spec.train_per_class, spec.visual_noise)
    test_a = _noisy_copies(rng, means, spec.test_per_class, spec.visual_noise)
    test_b = _noisy_copies(rng, means, spec.test_per_class, spec.visual_noise)
    text_a = _noisy_copies(rng, means, 1, spec.text_noise_a)
    text_b = _noisy_copies(rng, means, 1, spec.text_noise_b)

    return SynthDataset(
        train_manifest=_manifest("synth-train", spec.n_classes, spec.train_per_class, "tr"),
        test_manifest=_manifest("synth-test", spec.n_classes, spec.test_per_class, "te"),
        train_a=train_a,
        train_b=train_b,
        test_a=test_a,
        test_b=test_b,
        text_a=text_a,
        text_b=text_b,
    )


FILES = {
    "train_a": "train_a.fseb",
    "train_b": "train_b.fseb",
    "test_a": "test_a.fseb",
    "test_b": "test_b.fseb",
    "text_a": "text_a.fseb",
    "text_b": "text_b.fseb",
}


def write_dataset(ds: SynthDataset, outdir) -> None:
    """Write the standard directory layout consumed by the CLI."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ds.train_manifest.save(outdir / "train_manifest.json")
    ds.test_manifest.save(outdir / "test_manifest.json")
    for attr, fname in FILES.items():
        write_embeddings(outdir / fname, getattr(ds, attr))
