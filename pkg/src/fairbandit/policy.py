"""Gradient contextual bandit policy: ReLU scorer, softmax head, score-function updates.

The policy maps a context vector x through one hidden ReLU layer to a
preference score per action; the softmax of the scores is the action
distribution pi(a|x).  Training follows stochastic gradient ascent on the
per-step objective, theta <- theta + alpha * r * grad log pi(a|x).

Served distributions are clamped to [PROB_CLAMP, 1 - PROB_CLAMP] and
renormalized, which bounds |log pi| and therefore every divergence-based
reward built on top of them.  Gradients are computed through the exact
(unclamped) softmax.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

PROB_CLAMP = 1e-6
NUM_ACTIONS = 2


class NumericError(RuntimeError):
    """Non-finite value detected in parameters or rewards."""


@dataclass
class PolicyParameters:
    """Weights of the one-hidden-layer ReLU scorer (two output scores)."""

    W1: np.ndarray  # (hidden_dim, input_dim)
    b1: np.ndarray  # (hidden_dim,)
    W2: np.ndarray  # (NUM_ACTIONS, hidden_dim)
    b2: np.ndarray  # (NUM_ACTIONS,)

    @property
    def input_dim(self) -> int:
        return self.W1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.W1.shape[0]

    def copy(self) -> "PolicyParameters":
        return PolicyParameters(self.W1.copy(), self.b1.copy(), self.W2.copy(), self.b2.copy())

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.W1, self.b1, self.W2, self.b2


Gradient = PolicyParameters  # same shapes, reused container


def init_policy(input_dim: int, hidden_dim: int, seed: int) -> PolicyParameters:
    """Seeded uniform init with per-layer bound sqrt(6 / (fan_in + fan_out)); zero biases."""
    if input_dim < 1 or hidden_dim < 1:
        raise ValueError(f"dimensions must be >= 1, got input {input_dim}, hidden {hidden_dim}")
    rng = np.random.default_rng(seed)
    lim1 = np.sqrt(6.0 / (input_dim + hidden_dim))
    lim2 = np.sqrt(6.0 / (hidden_dim + NUM_ACTIONS))
    return PolicyParameters(
        W1=rng.uniform(-lim1, lim1, size=(hidden_dim, input_dim)),
        b1=np.zeros(hidden_dim),
        W2=rng.uniform(-lim2, lim2, size=(NUM_ACTIONS, hidden_dim)),
        b2=np.zeros(NUM_ACTIONS),
    )


def _forward(params: PolicyParameters, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (pre-activation z1, hidden h, raw softmax probs)."""
    z1 = params.W1 @ x + params.b1
    h = np.maximum(z1, 0.0)
    logits = params.W2 @ h + params.b2
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return z1, h, e / e.sum()


def _check_input(params: PolicyParameters, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.input_dim,):
        raise ValueError(f"context has shape {x.shape}, expected ({params.input_dim},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("context vector contains non-finite entries")
    return x


def clamp_distribution(probs: np.ndarray) -> np.ndarray:
    """Clip probabilities into [PROB_CLAMP, 1 - PROB_CLAMP] and renormalize to sum 1."""
    if probs.shape == (2,):  # scalar fast path for the binary-action case
        p0 = float(probs[0]) / (float(probs[0]) + float(probs[1]))
        p0 = min(max(p0, PROB_CLAMP), 1.0 - PROB_CLAMP)
        return np.array([p0, 1.0 - p0])
    p = np.clip(probs, PROB_CLAMP, 1.0 - PROB_CLAMP)
    p = p / p.sum()
    p = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    p[np.argmax(p)] += 1.0 - p.sum()
    return p


def action_distribution(params: PolicyParameters, x: np.ndarray) -> np.ndarray:
    """Clamped softmax over the two preference scores for context x."""
    x = _check_input(params, x)
    _, _, probs = _forward(params, x)
    return clamp_distribution(probs)


def sample_action(dist: np.ndarray, rng: np.random.Generator) -> int:
    """Draw an action index from the distribution using one uniform variate."""
    u = rng.random()
    acc = 0.0
    for a, p in enumerate(dist):
        acc += p
        if u < acc:
            return a
    return len(dist) - 1


def greedy_action(params: PolicyParameters, x: np.ndarray) -> int:
    """Argmax action; an exact tie resolves to action 0."""
    dist = action_distribution(params, x)
    return int(dist[1] > dist[0])


def greedy_actions(params: PolicyParameters, X: np.ndarray) -> np.ndarray:
    """Vectorized greedy actions for a batch of contexts (rows of X)."""
    H = np.maximum(X @ params.W1.T + params.b1, 0.0)
    logits = H @ params.W2.T + params.b2
    return (logits[:, 1] > logits[:, 0]).astype(np.int64)


def log_prob(params: PolicyParameters, x: np.ndarray, a: int) -> float:
    """log pi(a|x) under the exact softmax (the quantity the gradient differentiates)."""
    x = _check_input(params, x)
    _, _, probs = _forward(params, x)
    return float(np.log(probs[a]))


def _backprop(params: PolicyParameters, x: np.ndarray, a: int, z1: np.ndarray,
              h: np.ndarray, probs: np.ndarray) -> Gradient:
    dlogits = -probs
    dlogits[a] += 1.0
    dW2 = np.outer(dlogits, h)
    db2 = dlogits
    dh = params.W2.T @ dlogits
    dz1 = np.where(z1 > 0.0, dh, 0.0)
    dW1 = np.outer(dz1, x)
    db1 = dz1
    return PolicyParameters(W1=dW1, b1=db1, W2=dW2, b2=db2)


def log_prob_gradient(params: PolicyParameters, x: np.ndarray, a: int) -> Gradient:
    """Exact gradient of log pi(a|x) w.r.t. every parameter, by backpropagation.

    The output-layer logit rows receive (indicator(a) - pi(.|x)) times the
    hidden activations; the error is pushed back through the ReLU (exact-zero
    pre-activations get subgradient 0) into the first layer.
    """
    x = _check_input(params, x)
    z1, h, probs = _forward(params, x)
    return _backprop(params, x, a, z1, h, probs)


def apply_update(params: PolicyParameters, grad: Gradient, scale: float) -> PolicyParameters:
    """New parameters = params + scale * grad, verified finite."""
    new = PolicyParameters(
        W1=params.W1 + scale * grad.W1,
        b1=params.b1 + scale * grad.b1,
        W2=params.W2 + scale * grad.W2,
        b2=params.b2 + scale * grad.b2,
    )
    # nan/inf anywhere makes the grand total non-finite
    total = new.W1.sum() + new.b1.sum() + new.W2.sum() + new.b2.sum()
    if not np.isfinite(total):
        raise NumericError("non-finite policy parameters after update")
    return new


def policy_gradient_step(params: PolicyParameters, x: np.ndarray, a: int, r: float,
                         alpha: float) -> PolicyParameters:
    """One stochastic gradient ascent step on r * log pi(a|x); inputs untouched.

    alpha = 0 or r = 0 leave the parameters numerically unchanged.
    """
    if alpha < 0:
        raise ValueError(f"learning rate must be >= 0, got {alpha}")
    if not np.isfinite(r):
        raise NumericError(f"non-finite reward {r!r} passed to policy update")
    return apply_update(params, log_prob_gradient(params, x, a), alpha * r)


# ---------------------------------------------------------------------------
# checkpoint serialization (deterministic bytes, no timestamps)
# ---------------------------------------------------------------------------

_CKPT_MAGIC = b"FBPOLICY1\n"


def policy_to_bytes(params: PolicyParameters, seed: int | None = None) -> bytes:
    header = {
        "input_dim": params.input_dim,
        "hidden_dim": params.hidden_dim,
        "num_actions": NUM_ACTIONS,
        "seed": seed,
        "dtype": "<f8",
        "order": ["W1", "b1", "W2", "b2"],
    }
    blob = b"".join(np.ascontiguousarray(arr, dtype="<f8").tobytes() for arr in params.arrays())
    return _CKPT_MAGIC + json.dumps(header, separators=(",", ":")).encode() + b"\n" + blob


def policy_from_bytes(data: bytes) -> PolicyParameters:
    if not data.startswith(_CKPT_MAGIC):
        raise ValueError("not a policy checkpoint (bad magic)")
    rest = data[len(_CKPT_MAGIC):]
    header_line, blob = rest.split(b"\n", 1)
    header = json.loads(header_line)
    d, hdim = header["input_dim"], header["hidden_dim"]
    shapes = {"W1": (hdim, d), "b1": (hdim,), "W2": (NUM_ACTIONS, hdim), "b2": (NUM_ACTIONS,)}
    arrays = {}
    offset = 0
    for name in header["order"]:
        count = int(np.prod(shapes[name]))
        arrays[name] = np.frombuffer(blob, dtype="<f8", count=count, offset=offset).reshape(shapes[name]).copy()
        offset += count * 8
    return PolicyParameters(**arrays)
