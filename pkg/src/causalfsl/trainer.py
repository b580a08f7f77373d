"""Fine-tuning of the support cache with hand-derived gradients.

Only the cache matrix F is learnable. With s_j = z . F_j and kernel
w_j = exp(s_j - 1), the cache logit for class c is p1_c = sum_j L_jc w_j,
so d p1_c / d F_j = L_jc w_j z. The text-head terms do not depend on F,
so chaining through softmax cross-entropy gives, per query z,

    dLoss/dF_j = (g . L_j) * w_j * z,   g = softmax(logits) - onehot(y).

``grad_check`` verifies this against central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .episodes import Episode, rng_for
from .errors import EmptySupportError, ShapeMismatchError
from .numerics import OptimizerState, adamw_step, softmax_rows
from .predictors import HyperParams


@dataclass
class TrainConfig:
    epochs: int = 20
    lr: float = 1e-3
    batch_size: int = 256
    hp: HyperParams = field(default_factory=HyperParams)
    seed: int = 0
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 0.01


@dataclass(frozen=True)
class TrainBatch:
    """Queries with integer labels plus the frozen non-cache inputs."""

    queries: np.ndarray                 # B x D, unit rows
    labels: np.ndarray                  # B ints
    support_labels: np.ndarray          # NK x N one-hot, frozen
    text_heads: np.ndarray | None       # N x D or None
    text_heads_alt: np.ndarray | None   # N x D or None
    queries_alt: np.ndarray | None = None  # B x D for the second encoder


def _combined_logits(cache: np.ndarray, batch: TrainBatch, hp: HyperParams):
    """(logits, kernel weights) for a batch against the current cache."""
    w = np.exp(batch.queries @ cache.T - 1.0)
    logits = w @ batch.support_labels
    if batch.text_heads is not None:
        logits = logits + hp.alpha * hp.beta * (batch.queries @ batch.text_heads.T)
    if batch.text_heads_alt is not None:
        qa = batch.queries if batch.queries_alt is None else batch.queries_alt
        logits = logits + hp.alpha * (1.0 - hp.beta) * (qa @ batch.text_heads_alt.T)
    return logits, w


def loss_and_grad(cache, batch: TrainBatch, hp: HyperParams):
    """Mean cross-entropy over the batch and its gradient w.r.t. the cache."""
    cache = np.asarray(cache, dtype=np.float64)
    if batch.queries.shape[1] != cache.shape[1]:
        raise ShapeMismatchError(
            f"query dim {batch.queries.shape[1]} vs cache dim {cache.shape[1]}"
        )
    if batch.support_labels.shape[0] != cache.shape[0]:
        raise ShapeMismatchError("support label rows do not match cache rows")

    b = batch.queries.shape[0]
    logits, w = _combined_logits(cache, batch, hp)
    probs = softmax_rows(logits)
    lp = np.log(probs[np.arange(b), batch.labels])
    loss = float(-np.mean(lp))

    g = probs.copy()
    g[np.arange(b), batch.labels] -= 1.0
    # coeff[b, j] = (g_b . L_j) * w_bj; grad_F = coeff^T @ Z / B
    coeff = (g @ batch.support_labels.T) * w
    grad = coeff.T @ batch.queries / b
    return loss, grad


def grad_check(cache, batch: TrainBatch, hp: HyperParams, h: float = 1e-6) -> float:
    """Max relative error between analytic and central-difference gradients."""
    if not 1e-8 <= h <= 1e-4:
        raise ValueError("finite-difference step must lie in [1e-8, 1e-4]")
    cache = np.asarray(cache, dtype=np.float64)
    _, analytic = loss_and_grad(cache, batch, hp)
    numeric = np.zeros_like(cache)
    for i in range(cache.shape[0]):
        for j in range(cache.shape[1]):
            plus = cache.copy()
            plus[i, j] += h
            minus = cache.copy()
            minus[i, j] -= h
            lp, _ = loss_and_grad(plus, batch, hp)
            lm, _ = loss_and_grad(minus, batch, hp)
            numeric[i, j] = (lp - lm) / (2.0 * h)
    denom = np.maximum(1.0, np.abs(numeric))
    return float(np.max(np.abs(analytic - numeric) / denom))


def train_cache(
    episode: Episode,
    cfg: TrainConfig,
    text_heads=None,
    text_heads_alt=None,
):
    """Fine-tune the support cache on the support examples themselves.

    The queries are the (fixed, unit-norm) support features; the cache is
    initialized from them and then updated freely without re-normalization.
    Returns (adapted cache, per-epoch mean-loss trace).
    """
    support = episode.support_features
    if support.shape[0] == 0:
        raise EmptySupportError("cannot train on an empty support set")
    labels = np.argmax(episode.support_labels, axis=1)
    nk = support.shape[0]
    batch_size = min(cfg.batch_size, nk)

    cache = support.copy()
    state = OptimizerState.init(
        cache,
        lr=cfg.lr,
        betas=cfg.betas,
        eps=cfg.eps,
        weight_decay=cfg.weight_decay,
    )
    rng = rng_for(cfg.seed)
    heads = None if text_heads is None else np.asarray(text_heads, dtype=np.float64)
    heads_alt = (
        None if text_heads_alt is None else np.asarray(text_heads_alt, dtype=np.float64)
    )
    support_alt = episode.support_features_alt

    trace = []
    for _ in range(cfg.epochs):
        order = rng.permutation(nk)
        epoch_losses = []
        for start in range(0, nk, batch_size):
            idx = order[start : start + batch_size]
            batch = TrainBatch(
                queries=support[idx],
                labels=labels[idx],
                support_labels=episode.support_labels,
                text_heads=heads,
                text_heads_alt=heads_alt,
                queries_alt=None if support_alt is None else support_alt[idx],
            )
            loss, grad = loss_and_grad(cache, batch, cfg.hp)
            cache, state = adamw_step(cache, grad, state)
            epoch_losses.append(loss)
        trace.append(float(np.mean(epoch_losses)))
    return cache, trace
