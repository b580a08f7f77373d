"""Deterministic N-way K-shot episode construction.

All randomness comes from numpy's Philox counter-based generator seeded
directly from the caller's integer seed, so selections reproduce across
platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ClassListMismatchError,
    InsufficientClassesError,
    InsufficientItemsError,
)
from .store import Manifest


def rng_for(seed: int) -> np.random.Generator:
    """The one RNG construction used across the engine (Philox, fixed seed)."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass
class Episode:
    """One few-shot task: support cache plus a disjoint query set.

    ``support_labels`` columns follow ``class_indices`` order; query labels
    are positions in that same order. ``*_alt`` fields hold second-encoder
    query/support features when a second representation is in play.
    """

    n_way: int
    k_shot: int | None
    support_features: np.ndarray      # NK x D, unit rows
    support_labels: np.ndarray        # NK x N one-hot
    query_features: np.ndarray        # Q x D
    query_labels: np.ndarray          # Q, ints in [0, N)
    class_indices: list[int]
    support_features_alt: np.ndarray | None = None
    query_features_alt: np.ndarray | None = None

    @property
    def n_queries(self) -> int:
        return self.query_features.shape[0]


def sample_episode(
    manifest: Manifest,
    features: np.ndarray,
    n: int,
    k: int,
    q: int,
    seed: int,
    alt_features: np.ndarray | None = None,
) -> Episode:
    """Sample an N-way K-shot episode with q queries per class.

    Deterministic for fixed (manifest, n, k, q, seed). Classes are drawn
    without replacement; per class, items are shuffled (manifest order as
    the pre-shuffle order), the first k become support and the next q
    become queries, so the two sets are disjoint by construction.
    """
    if n > manifest.n_classes:
        raise InsufficientClassesError(
            f"need {n} classes, manifest has {manifest.n_classes}"
        )
    rng = rng_for(seed)
    groups = manifest.items_by_class()
    chosen = rng.permutation(manifest.n_classes)[:n]

    support_rows, query_rows, query_labels = [], [], []
    for pos, c in enumerate(chosen):
        items = groups[c]
        if len(items) < k + q:
            raise InsufficientItemsError(
                f"class {manifest.class_names[c]!r} has {len(items)} items, "
                f"need {k + q}"
            )
        order = rng.permutation(len(items))
        support_rows.extend(items[i].row_index for i in order[:k])
        query_rows.extend(items[i].row_index for i in order[k : k + q])
        query_labels.extend([pos] * q)

    labels = np.zeros((n * k, n), dtype=np.float64)
    for i in range(n * k):
        labels[i, i // k] = 1.0

    return Episode(
        n_way=n,
        k_shot=k,
        support_features=features[support_rows],
        support_labels=labels,
        query_features=features[query_rows],
        query_labels=np.asarray(query_labels, dtype=np.int64),
        class_indices=[int(c) for c in chosen],
        support_features_alt=None if alt_features is None else alt_features[support_rows],
        query_features_alt=None if alt_features is None else alt_features[query_rows],
    )


def full_split_episode(
    train_manifest: Manifest,
    test_manifest: Manifest,
    train_features: np.ndarray,
    test_features: np.ndarray,
    train_features_alt: np.ndarray | None = None,
    test_features_alt: np.ndarray | None = None,
) -> Episode:
    """Episode using every train item as support and every test item as query.

    This is the fixed-shots-per-class evaluation regime; both manifests must
    agree on the ordered class-name list.
    """
    if train_manifest.class_names != test_manifest.class_names:
        raise ClassListMismatchError(
            "train and test manifests disagree on class names"
        )
    n = train_manifest.n_classes
    support_rows = [it.row_index for it in train_manifest.items]
    labels = np.zeros((len(support_rows), n), dtype=np.float64)
    for i, it in enumerate(train_manifest.items):
        labels[i, it.class_index] = 1.0

    query_rows = [it.row_index for it in test_manifest.items]
    query_labels = np.asarray(
        [it.class_index for it in test_manifest.items], dtype=np.int64
    )

    counts = np.sum(labels, axis=0)
    uniform = len(set(counts.tolist())) == 1 and len(support_rows) > 0
    k_shot = int(counts[0]) if uniform else None

    return Episode(
        n_way=n,
        k_shot=k_shot,
        support_features=train_features[support_rows],
        support_labels=labels,
        query_features=test_features[query_rows],
        query_labels=query_labels,
        class_indices=list(range(n)),
        support_features_alt=(
            None if train_features_alt is None else train_features_alt[support_rows]
        ),
        query_features_alt=(
            None if test_features_alt is None else test_features_alt[query_rows]
        ),
    )


def subsample_shots(manifest: Manifest, k: int, seed: int) -> Manifest:
    """Deterministically keep k items per class (for shot-count sweeps)."""
    rng = rng_for(seed)
    kept = []
    for items in manifest.items_by_class():
        if len(items) < k:
            raise InsufficientItemsError(
                f"class has {len(items)} items, need {k} shots"
            )
        order = rng.permutation(len(items))
        kept.extend(items[i] for i in sorted(order[:k]))
    return Manifest(manifest.dataset_name, list(manifest.class_names), kept)
