"""Logistic-regression baseline with no fairness constraint.

Full-batch gradient descent on the mean logistic loss plus an L2 penalty on
the weights (not the bias).  A step that would increase the loss halves the
learning rate and retries, so the training loss is non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Example
from .policy import NumericError

_MAX_HALVINGS = 60


@dataclass
class LrParameters:
    weights: np.ndarray
    bias: float


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def logistic_loss(weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray,
                  l2: float) -> float:
    """Mean logistic loss + l2 * ||w||^2 / 2, computed in log-space for stability."""
    z = X @ weights + bias
    nll = np.logaddexp(0.0, z) - y * z
    return float(np.mean(nll) + 0.5 * l2 * np.dot(weights, weights))


def logistic_gradient(weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray,
                      l2: float) -> tuple[np.ndarray, float]:
    residual = _sigmoid(X @ weights + bias) - y
    grad_w = X.T @ residual / len(y) + l2 * weights
    grad_b = float(np.mean(residual))
    return grad_w, grad_b


def fit_logistic(train: list[Example], epochs: int = 500, lr: float = 1.0,
                 l2: float = 1e-4, seed: int = 0,
                 loss_history: list[float] | None = None) -> LrParameters:
    """Fit by full-batch gradient descent with step-halving on loss increase.

    ``loss_history``, when given, receives the accepted loss after every
    epoch (a non-increasing sequence by construction).
    """
    if not train:
        raise ValueError("training split is empty")
    X = np.stack([e.features for e in train])
    y = np.array([e.label for e in train], dtype=np.float64)

    rng = np.random.default_rng(seed)
    w = rng.uniform(-1e-3, 1e-3, size=X.shape[1])
    b = 0.0
    loss = logistic_loss(w, b, X, y, l2)
    if not np.isfinite(loss):
        raise NumericError("non-finite initial loss")

    for _ in range(epochs):
        grad_w, grad_b = logistic_gradient(w, b, X, y, l2)
        halvings = 0
        while True:
            w_new = w - lr * grad_w
            b_new = b - lr * grad_b
            loss_new = logistic_loss(w_new, b_new, X, y, l2)
            if not np.isfinite(loss_new):
                raise NumericError("non-finite loss during logistic fit")
            if loss_new <= loss:
                w, b, loss = w_new, b_new, loss_new
                break
            lr *= 0.5
            halvings += 1
            if halvings >= _MAX_HALVINGS:
                return LrParameters(weights=w, bias=b)  # step size exhausted
        if loss_history is not None:
            loss_history.append(loss)
    return LrParameters(weights=w, bias=b)


def predict_logistic(params: LrParameters, x: np.ndarray) -> tuple[float, int]:
    """Probability sigmoid(w.x + b) and the thresholded action (>= 0.5 maps to 1)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != params.weights.shape:
        raise ValueError(f"context has shape {x.shape}, expected {params.weights.shape}")
    prob = float(_sigmoid(np.array(np.dot(params.weights, x) + params.bias)))
    return prob, int(prob >= 0.5)


def predict_logistic_split(params: LrParameters, examples: list[Example]) -> np.ndarray:
    X = np.stack([e.features for e in examples])
    probs = _sigmoid(X @ params.weights + params.bias)
    return (probs >= 0.5).astype(np.int64)


# ---------------------------------------------------------------------------
# checkpoint file (same deterministic container style as the policy module)
# ---------------------------------------------------------------------------

_LR_MAGIC = b"FBLR1\n"


def save_lr(path, params: LrParameters) -> None:
    import json
    from pathlib import Path

    header = {"dim": len(params.weights), "dtype": "<f8"}
    blob = np.ascontiguousarray(params.weights, dtype="<f8").tobytes()
    blob += np.float64(params.bias).tobytes()
    Path(path).write_bytes(_LR_MAGIC + json.dumps(header, separators=(",", ":")).encode()
                           + b"\n" + blob)


def load_lr(path) -> LrParameters:
    import json
    from pathlib import Path

    data = Path(path).read_bytes()
    if not data.startswith(_LR_MAGIC):
        raise ValueError(f"{path}: not an LR checkpoint")
    header_line, blob = data[len(_LR_MAGIC):].split(b"\n", 1)
    dim = json.loads(header_line)["dim"]
    weights = np.frombuffer(blob, dtype="<f8", count=dim).copy()
    bias = float(np.frombuffer(blob, dtype="<f8", count=1, offset=dim * 8)[0])
    return LrParameters(weights=weights, bias=bias)
