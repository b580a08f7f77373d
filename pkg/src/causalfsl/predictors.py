"""Prediction heads and the evaluator.

The cache head scores a query against support features with the kernel
exp(-(1 - cos)) and aggregates per class through one-hot labels; the two
zero-shot heads are plain cosine similarities against per-class text
embeddings; the final score is a fixed linear combination of the three.
Matching/prototypical baselines and the cache+text baseline share the
same metric geometry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .episodes import Episode
from .errors import (
    EmptyClassError,
    EmptyQuerySetError,
    EmptySupportError,
    ShapeMismatchError,
)
from .numerics import l2_normalize_rows, softmax

METHODS = ("mn", "pn", "tip", "zs-clip", "zs-blip", "ours", "ours-f")


@dataclass
class HyperParams:
    alpha: float = 100.0
    beta: float = 0.6
    tip_alpha: float = 1.0

    def __post_init__(self):
        if self.alpha < 0 or self.tip_alpha < 0:
            raise ValueError("alpha values must be nonnegative")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must be in [0, 1]")


@dataclass
class PredictionBreakdown:
    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray
    combined: np.ndarray


def _check_support(query, support_features, support_labels):
    query = np.asarray(query, dtype=np.float64)
    f = np.asarray(support_features, dtype=np.float64)
    l = np.asarray(support_labels, dtype=np.float64)
    if f.ndim != 2 or l.ndim != 2 or f.shape[0] != l.shape[0]:
        raise ShapeMismatchError(
            f"support features {f.shape} vs labels {l.shape}"
        )
    if query.shape[-1] != f.shape[1]:
        raise ShapeMismatchError(
            f"query dim {query.shape[-1]} vs support dim {f.shape[1]}"
        )
    return query, f, l


def attention_p1(query, support_features, support_labels) -> np.ndarray:
    """Cache-attention logits: exp(-(1 - cos)) kernel summed per class."""
    query, f, l = _check_support(query, support_features, support_labels)
    w = np.exp(query @ f.T - 1.0)
    return w @ l


def zero_shot_logits(query, text_heads) -> np.ndarray:
    """Cosine similarity of a query against per-class text embeddings."""
    query = np.asarray(query, dtype=np.float64)
    heads = np.asarray(text_heads, dtype=np.float64)
    if query.shape[-1] != heads.shape[1]:
        raise ShapeMismatchError(
            f"query dim {query.shape[-1]} vs head dim {heads.shape[1]}"
        )
    return query @ heads.T


def combine(p1, p2, p3, hp: HyperParams) -> np.ndarray:
    """p1 + alpha * (beta * p2 + (1 - beta) * p3)."""
    p1, p2, p3 = (np.asarray(p, dtype=np.float64) for p in (p1, p2, p3))
    if not p1.shape == p2.shape == p3.shape:
        raise ShapeMismatchError(
            f"logit shapes differ: {p1.shape}, {p2.shape}, {p3.shape}"
        )
    return p1 + hp.alpha * (hp.beta * p2 + (1.0 - hp.beta) * p3)


def argmax_class(logits) -> int:
    """Deterministic argmax: ties break to the lowest class index."""
    return int(np.argmax(logits))


def matching_networks(query, support_features, support_labels) -> np.ndarray:
    """Softmax-attention over support cosine similarities; valid distribution."""
    query, f, l = _check_support(query, support_features, support_labels)
    if f.shape[0] == 0:
        raise EmptySupportError("matching networks needs at least one support")
    a = softmax(query @ f.T)
    return a @ l


def prototypical_networks(query, support_features, support_labels) -> np.ndarray:
    """Scores against re-normalized class-mean prototypes, cache kernel."""
    query, f, l = _check_support(query, support_features, support_labels)
    counts = np.sum(l, axis=0)
    if np.any(counts == 0):
        raise EmptyClassError(
            f"class {int(np.argmin(counts))} has no support examples"
        )
    protos = l2_normalize_rows((l.T @ f) / counts[:, None])
    return np.exp(query @ protos.T - 1.0)


def tip_adapter_logits(
    query, support_features, support_labels, text_heads, tip_alpha: float
) -> np.ndarray:
    """Cache attention scaled by tip_alpha plus zero-shot cosine logits."""
    return tip_alpha * attention_p1(
        query, support_features, support_labels
    ) + zero_shot_logits(query, text_heads)


def breakdown(
    query,
    query_alt,
    support_features,
    support_labels,
    text_heads,
    text_heads_alt,
    hp: HyperParams,
) -> PredictionBreakdown:
    """All intermediate logits plus the combined score for one query."""
    p1 = attention_p1(query, support_features, support_labels)
    p2 = zero_shot_logits(query, text_heads)
    p3 = zero_shot_logits(query_alt, text_heads_alt)
    return PredictionBreakdown(p1, p2, p3, combine(p1, p2, p3, hp))


def _method_logits(episode: Episode, method: str, hp, text_heads, text_heads_alt):
    """Batch logits for every query under one method (rows = queries)."""
    q = episode.query_features
    f, l = episode.support_features, episode.support_labels
    if method == "mn":
        return np.stack([matching_networks(z, f, l) for z in q])
    if method == "pn":
        return np.stack([prototypical_networks(z, f, l) for z in q])
    if method == "tip":
        return np.stack(
            [tip_adapter_logits(z, f, l, text_heads, hp.tip_alpha) for z in q]
        )
    if method == "zs-clip":
        return q @ np.asarray(text_heads, dtype=np.float64).T
    if method == "zs-blip":
        if episode.query_features_alt is None:
            raise ShapeMismatchError("zs-blip needs second-encoder query features")
        return episode.query_features_alt @ np.asarray(text_heads_alt, dtype=np.float64).T
    if method in ("ours", "ours-f"):
        if episode.query_features_alt is None:
            raise ShapeMismatchError("ours needs second-encoder query features")
        p1 = np.exp(q @ f.T - 1.0) @ l
        p2 = q @ np.asarray(text_heads, dtype=np.float64).T
        p3 = episode.query_features_alt @ np.asarray(text_heads_alt, dtype=np.float64).T
        return combine(p1, p2, p3, hp)
    raise ValueError(f"unknown method {method!r}")


def evaluate(
    episode: Episode,
    method: str,
    hp: HyperParams,
    text_heads=None,
    text_heads_alt=None,
) -> dict:
    """Accuracy of one method on an episode's query set.

    Returns a report dict: method, accuracy, counts, and the episode shape.
    """
    if episode.n_queries == 0:
        raise EmptyQuerySetError("episode has no queries")
    logits = _method_logits(episode, method, hp, text_heads, text_heads_alt)
    predicted = np.argmax(logits, axis=1)
    correct = int(np.sum(predicted == episode.query_labels))
    return {
        "method": method,
        "accuracy": correct / episode.n_queries,
        "correct": correct,
        "n_queries": int(episode.n_queries),
        "n_way": int(episode.n_way),
        "k_shot": episode.k_shot,
    }


TOGGLE_ROWS = (
    (True, False, False),
    (False, True, False),
    (False, False, True),
    (True, True, False),
    (True, False, True),
    (False, True, True),
    (True, True, True),
)


def ablation_toggles(
    episode: Episode, hp: HyperParams, text_heads, text_heads_alt
) -> list[dict]:
    """Accuracy for each on/off combination of the three intermediate heads.

    Disabled heads contribute zero logits; enabled heads keep their usual
    coefficients (1, alpha*beta, alpha*(1-beta)).
    """
    if episode.n_queries == 0:
        raise EmptyQuerySetError("episode has no queries")
    q, f, l = episode.query_features, episode.support_features, episode.support_labels
    p1 = np.exp(q @ f.T - 1.0) @ l
    p2 = q @ np.asarray(text_heads, dtype=np.float64).T
    p3 = episode.query_features_alt @ np.asarray(text_heads_alt, dtype=np.float64).T
    zero = np.zeros_like(p1)

    rows = []
    for use1, use2, use3 in TOGGLE_ROWS:
        logits = combine(p1 if use1 else zero, p2 if use2 else zero, p3 if use3 else zero, hp)
        predicted = np.argmax(logits, axis=1)
        rows.append(
            {
                "p1": use1,
                "p2": use2,
                "p3": use3,
                "accuracy": float(np.mean(predicted == episode.query_labels)),
            }
        )
    return rows
