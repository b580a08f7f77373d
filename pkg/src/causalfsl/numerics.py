"""Dense float64 kernels: row normalization, softmax, cross-entropy, AdamW.

Everything here works on plain numpy arrays in 64-bit precision. Functions
are pure; ``adamw_step`` returns fresh arrays instead of mutating state.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import IndexOutOfRangeError, ShapeMismatchError, ZeroRowError

ZERO_NORM_FLOOR = 1e-300


def as_matrix(a) -> np.ndarray:
    """Coerce to a contiguous 2-D float64 array and check finiteness."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeMismatchError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    return m


def l2_normalize_rows(m) -> np.ndarray:
    """Scale each row to unit Euclidean norm.

    Raises ZeroRowError if any row norm is below 1e-300 (direction undefined).
    """
    m = as_matrix(m)
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms < ZERO_NORM_FLOOR):
        bad = int(np.argmin(norms))
        raise ZeroRowError(f"row {bad} has norm {norms[bad]:.3e}, cannot normalize")
    return m / norms[:, None]


def softmax(v) -> np.ndarray:
    """Numerically stable softmax of a 1-D logit vector (max-subtraction)."""
    v = np.asarray(v, dtype=np.float64)
    z = v - np.max(v)
    e = np.exp(z)
    return e / np.sum(e)


def softmax_rows(m) -> np.ndarray:
    """Row-wise stable softmax of a 2-D logit matrix."""
    m = np.asarray(m, dtype=np.float64)
    z = m - np.max(m, axis=1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=1, keepdims=True)


def log_softmax(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    z = v - np.max(v)
    return z - np.log(np.sum(np.exp(z)))


def cross_entropy(logits, label: int) -> float:
    """-log softmax(logits)[label], computed in log-space."""
    logits = np.asarray(logits, dtype=np.float64)
    if not 0 <= label < logits.shape[-1]:
        raise IndexOutOfRangeError(
            f"label {label} out of range for {logits.shape[-1]} logits"
        )
    return float(-log_softmax(logits)[label])


@dataclass(frozen=True)
class OptimizerState:
    """Decoupled-weight-decay Adam state for a single parameter matrix."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr: float = 1e-3
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 0.01

    @classmethod
    def init(cls, param, lr=1e-3, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.01):
        param = np.asarray(param, dtype=np.float64)
        return cls(
            m=np.zeros_like(param),
            v=np.zeros_like(param),
            step=0,
            lr=lr,
            betas=betas,
            eps=eps,
            weight_decay=weight_decay,
        )


def adamw_step(param, grad, state: OptimizerState):
    """One AdamW update with bias correction; returns (new_param, new_state)."""
    param = np.asarray(param, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if param.shape != grad.shape:
        raise ShapeMismatchError(f"param {param.shape} vs grad {grad.shape}")
    if state.m.shape != param.shape or state.v.shape != param.shape:
        raise ShapeMismatchError("optimizer moments do not match parameter shape")

    b1, b2 = state.betas
    t = state.step + 1
    m = b1 * state.m + (1.0 - b1) * grad
    v = b2 * state.v + (1.0 - b2) * grad * grad
    m_hat = m / (1.0 - b1**t)
    v_hat = v / (1.0 - b2**t)
    new_param = (
        param
        - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        - state.lr * state.weight_decay * param
    )
    return new_param, replace(state, m=m, v=v, step=t)
