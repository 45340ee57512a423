"""Cooperative contextual bandits: one policy per sensitive-attribute value.

Both policies score every context; the policy matching the example's
sensitive attribute samples the action and is the only one updated.  The
reward mixes prediction correctness with a divergence penalty,

    reward = 1[action == label] - fairness_weight * KL(own_dist, other_dist)

where the KL direction puts the acting group's distribution first.  The
divergence enters the update only as a scalar inside the reward, so the
fairness pressure needs no gradient of its own.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Example, SplitDataset
from .policy import (
    PROB_CLAMP,
    PolicyParameters,
    _backprop,
    _forward,
    action_distribution,
    apply_update,
    clamp_distribution,
    greedy_action,
    init_policy,
    policy_from_bytes,
    policy_to_bytes,
    sample_action,
)

PREDICT_MODES = ("original", "reversed", "model0", "model1")

#: |reward| can never exceed 1 + fairness_weight * log(1 / PROB_CLAMP).
MAX_ABS_LOG_PROB = -float(np.log(PROB_CLAMP))

REWARD_CSV_HEADER = "step,sensitive,action,acc_reward,kl,reward,accumulated"


@dataclass
class TrainingConfig:
    """Hyperparameters of one cooperative training run."""

    fairness_weight: float
    steps: int
    learning_rate: float = 1e-2
    hidden_dim: int = 20
    seed: int = 0
    checkpoint_every: int = 0  # 0 means max(steps // 100, 1)

    def __post_init__(self) -> None:
        if self.fairness_weight < 0:
            raise ValueError(f"fairness_weight must be >= 0, got {self.fairness_weight}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.hidden_dim < 1:
            raise ValueError(f"hidden_dim must be >= 1, got {self.hidden_dim}")
        if self.checkpoint_every == 0:
            self.checkpoint_every = max(self.steps // 100, 1)
        if not (1 <= self.checkpoint_every <= self.steps):
            raise ValueError(
                f"checkpoint_every must be in [1, steps], got {self.checkpoint_every}"
            )

    def reward_bound(self) -> float:
        return 1.0 + self.fairness_weight * MAX_ABS_LOG_PROB


@dataclass
class CcbModel:
    """A pair of policies (index = sensitive-attribute value) plus their config."""

    policy0: PolicyParameters
    policy1: PolicyParameters
    config: TrainingConfig
    step: int = 0

    def policy_for(self, sensitive: int) -> PolicyParameters:
        return self.policy1 if sensitive == 1 else self.policy0

    def snapshot(self) -> "CcbModel":
        return CcbModel(self.policy0.copy(), self.policy1.copy(), self.config, self.step)


@dataclass
class StepRecord:
    """Everything logged for a single training step."""

    step: int
    sensitive: int
    action: int
    acc_reward: int
    kl: float
    reward: float
    grad_sq_norm: float


@dataclass
class RewardLog:
    """Column-wise log of a full training run.

    ``accumulated[t]`` is the running sum of ``reward`` up to and including
    step t.  ``grad_sq_norm`` (squared norm of the applied update direction,
    before the learning rate) is kept for convergence diagnostics and is not
    part of the CSV interchange format.
    """

    step: np.ndarray
    sensitive: np.ndarray
    action: np.ndarray
    acc_reward: np.ndarray
    kl: np.ndarray
    reward: np.ndarray
    accumulated: np.ndarray
    grad_sq_norm: np.ndarray

    def __len__(self) -> int:
        return len(self.step)

    def to_csv(self, path: str | Path) -> None:
        buf = io.StringIO()
        buf.write(REWARD_CSV_HEADER + "\n")
        for i in range(len(self.step)):
            buf.write(
                f"{self.step[i]},{self.sensitive[i]},{self.action[i]},{self.acc_reward[i]},"
                f"{self.kl[i]!r},{self.reward[i]!r},{self.accumulated[i]!r}\n"
            )
        Path(path).write_text(buf.getvalue(), encoding="utf-8")


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p || q) between two clamped action distributions (zeros cannot occur)."""
    if len(p) == 2:  # scalar fast path for the binary-action case
        p0, p1 = float(p[0]), float(p[1])
        q0, q1 = float(q[0]), float(q[1])
        return p0 * math.log(p0 / q0) + p1 * math.log(p1 / q1)
    return float(np.sum(p * (np.log(p) - np.log(q))))


def compute_reward(action: int, label: int, own: np.ndarray, other: np.ndarray,
                   fairness_weight: float) -> tuple[int, float, float]:
    """Returns (accuracy part, divergence, total reward) for one step."""
    acc = int(action == label)
    kl = kl_divergence(own, other)
    return acc, kl, acc - fairness_weight * kl


def new_model(input_dim: int, config: TrainingConfig) -> CcbModel:
    """Fresh model with per-policy seeds derived from the config seed."""
    seed0, seed1 = (int(s) for s in np.random.SeedSequence(config.seed).generate_state(2))
    return CcbModel(
        policy0=init_policy(input_dim, config.hidden_dim, seed0),
        policy1=init_policy(input_dim, config.hidden_dim, seed1),
        config=config,
        step=0,
    )


def train_step(model: CcbModel, example: Example, rng: np.random.Generator) -> tuple[CcbModel, StepRecord]:
    """One cooperative step: act with the matching policy, update only it.

    The non-matching policy object is returned unchanged (same object, no
    copy), so its parameters are bitwise identical before and after.
    """
    x = example.features
    s = example.sensitive
    acting, other_params = (model.policy1, model.policy0) if s == 1 else (model.policy0, model.policy1)
    z1, h, raw_probs = _forward(acting, x)
    own = clamp_distribution(raw_probs)
    other = clamp_distribution(_forward(other_params, x)[2])

    action = sample_action(own, rng)
    acc, kl, reward = compute_reward(action, example.label, own, other, model.config.fairness_weight)

    grad = _backprop(acting, x, action, z1, h, raw_probs)
    g = grad.arrays()
    grad_sq = reward * reward * (
        float(np.dot(g[0].ravel(), g[0].ravel())) + float(np.dot(g[1], g[1]))
        + float(np.dot(g[2].ravel(), g[2].ravel())) + float(np.dot(g[3], g[3]))
    )
    updated = apply_update(acting, grad, model.config.learning_rate * reward)

    next_model = CcbModel(
        policy0=updated if s == 0 else model.policy0,
        policy1=updated if s == 1 else model.policy1,
        config=model.config,
        step=model.step + 1,
    )
    record = StepRecord(
        step=next_model.step, sensitive=s, action=action,
        acc_reward=acc, kl=kl, reward=reward, grad_sq_norm=grad_sq,
    )
    return next_model, record


def train(dataset: SplitDataset, config: TrainingConfig) -> tuple[list[CcbModel], RewardLog]:
    """Run the full cooperative loop over `config.steps` uniform draws.

    Each step draws a training example uniformly at random with
    replacement.  A frozen snapshot is kept every ``checkpoint_every``
    steps and at the final step.  Fully deterministic given the seed: the
    two policy inits and the single sampling stream all derive from it.
    """
    examples = dataset.train
    if not examples:
        raise ValueError("training split is empty")
    input_dim = examples[0].features.shape[0]

    seeds = np.random.SeedSequence(config.seed).generate_state(3)
    rng = np.random.default_rng(int(seeds[2]))
    model = CcbModel(
        policy0=init_policy(input_dim, config.hidden_dim, int(seeds[0])),
        policy1=init_policy(input_dim, config.hidden_dim, int(seeds[1])),
        config=config,
        step=0,
    )

    T = config.steps
    step_col = np.arange(1, T + 1, dtype=np.int64)
    sens_col = np.zeros(T, dtype=np.int8)
    act_col = np.zeros(T, dtype=np.int8)
    acc_col = np.zeros(T, dtype=np.int8)
    kl_col = np.zeros(T, dtype=np.float64)
    rew_col = np.zeros(T, dtype=np.float64)
    cum_col = np.zeros(T, dtype=np.float64)
    grad_col = np.zeros(T, dtype=np.float64)

    checkpoints: list[CcbModel] = []
    running = 0.0
    n = len(examples)
    draw = rng.integers(0, n, size=T)  # one bulk draw; actions then share the stream
    for t in range(T):
        model, rec = train_step(model, examples[draw[t]], rng)
        sens_col[t] = rec.sensitive
        act_col[t] = rec.action
        acc_col[t] = rec.acc_reward
        kl_col[t] = rec.kl
        rew_col[t] = rec.reward
        running += rec.reward
        cum_col[t] = running
        grad_col[t] = rec.grad_sq_norm
        if (t + 1) % config.checkpoint_every == 0 or (t + 1) == T:
            checkpoints.append(model.snapshot())

    log = RewardLog(
        step=step_col, sensitive=sens_col, action=act_col, acc_reward=acc_col,
        kl=kl_col, reward=rew_col, accumulated=cum_col, grad_sq_norm=grad_col,
    )
    return checkpoints, log


def predict(model: CcbModel, x: np.ndarray, sensitive: int, mode: str = "original") -> tuple[int, np.ndarray]:
    """Greedy prediction under one of the four sub-model modes.

    original: the policy matching the sensitive attribute; reversed: the
    opposite policy; model0/model1: a fixed policy regardless of attribute.
    """
    if mode == "original":
        params = model.policy_for(sensitive)
    elif mode == "reversed":
        params = model.policy_for(1 - sensitive)
    elif mode == "model0":
        params = model.policy0
    elif mode == "model1":
        params = model.policy1
    else:
        raise ValueError(f"invalid mode {mode!r}, expected one of {PREDICT_MODES}")
    dist = action_distribution(params, x)
    return greedy_action(params, x), dist


def predict_split(model: CcbModel, examples: list[Example], mode: str = "original") -> np.ndarray:
    """Greedy predictions for a whole split (vectorized per policy)."""
    if mode not in PREDICT_MODES:
        raise ValueError(f"invalid mode {mode!r}, expected one of {PREDICT_MODES}")
    from .policy import greedy_actions

    X = np.stack([e.features for e in examples])
    s = np.array([e.sensitive for e in examples])
    preds0 = greedy_actions(model.policy0, X)
    preds1 = greedy_actions(model.policy1, X)
    if mode == "model0":
        return preds0
    if mode == "model1":
        return preds1
    use1 = s == (1 if mode == "original" else 0)
    return np.where(use1, preds1, preds0)


# ---------------------------------------------------------------------------
# checkpoint files: both policies plus the config, deterministic bytes
# ---------------------------------------------------------------------------

_MODEL_MAGIC = b"FBCCB1\n"


def save_checkpoint(path: str | Path, model: CcbModel) -> None:
    cfg = model.config
    header = {
        "step": model.step,
        "config": {
            "fairness_weight": cfg.fairness_weight,
            "steps": cfg.steps,
            "learning_rate": cfg.learning_rate,
            "hidden_dim": cfg.hidden_dim,
            "seed": cfg.seed,
            "checkpoint_every": cfg.checkpoint_every,
        },
    }
    blob0 = policy_to_bytes(model.policy0, seed=cfg.seed)
    blob1 = policy_to_bytes(model.policy1, seed=cfg.seed)
    with Path(path).open("wb") as fh:
        fh.write(_MODEL_MAGIC)
        fh.write(json.dumps(header, separators=(",", ":")).encode() + b"\n")
        fh.write(len(blob0).to_bytes(8, "little"))
        fh.write(blob0)
        fh.write(len(blob1).to_bytes(8, "little"))
        fh.write(blob1)


def load_checkpoint(path: str | Path) -> CcbModel:
    data = Path(path).read_bytes()
    if not data.startswith(_MODEL_MAGIC):
        raise ValueError(f"{path}: not a cooperative-model checkpoint")
    rest = data[len(_MODEL_MAGIC):]
    header_line, rest = rest.split(b"\n", 1)
    header = json.loads(header_line)
    n0 = int.from_bytes(rest[:8], "little")
    blob0 = rest[8:8 + n0]
    rest = rest[8 + n0:]
    n1 = int.from_bytes(rest[:8], "little")
    blob1 = rest[8:8 + n1]
    config = TrainingConfig(**header["config"])
    return CcbModel(
        policy0=policy_from_bytes(blob0),
        policy1=policy_from_bytes(blob1),
        config=config,
        step=header["step"],
    )
