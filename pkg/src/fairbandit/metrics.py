"""Accuracy and fairness metrics over encoded splits.

discrimination is the absolute gap between the two groups' positive-
prediction rates.  consistency compares each prediction with the mean
prediction of the k nearest neighbors under Gower similarity, computed on
the raw (pre-encoding) feature values so categorical and continuous columns
both contribute on a [0, 1] scale.  delta is accuracy - discrimination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Example, FeatureSchema, SchemaError

DEFAULT_NEIGHBORS = 5

_BLOCK = 512  # query rows per pairwise-similarity block


@dataclass
class EvaluationReport:
    """The four headline numbers for one set of predictions on one split."""

    accuracy: float
    discrimination: float
    consistency: float
    delta: float
    split_name: str = ""
    n: int = 0

    def row(self) -> dict:
        return {
            "split": self.split_name,
            "n": self.n,
            "accuracy": self.accuracy,
            "discrimination": self.discrimination,
            "consistency": self.consistency,
            "delta": self.delta,
        }


@dataclass
class NeighborIndex:
    """For each example in a split, the indices of its k most similar peers."""

    indices: np.ndarray  # (n, k) int64
    k: int


def _feature_ranges(schema: FeatureSchema) -> dict[str, float]:
    """Per continuous column, the training-split range max - min."""
    return {name: stats[3] - stats[2] for name, stats in schema.continuous_stats.items()}


def gower_similarity(raw_i: tuple, raw_j: tuple, schema: FeatureSchema) -> float:
    """Mean per-feature similarity between two raw rows, in [0, 1].

    Continuous columns contribute 1 - |a - b| / range (clamped to [0, 1];
    a zero range contributes 1); categorical columns contribute the
    equality indicator.  Sensitive and label columns are excluded: the
    similarity reflects task features, not the protected attribute.
    """
    feats = schema.feature_columns
    if len(raw_i) != len(feats) or len(raw_j) != len(feats):
        raise SchemaError(
            f"raw feature tuples of lengths {len(raw_i)}/{len(raw_j)} do not match "
            f"the schema's {len(feats)} feature columns"
        )
    if not feats:
        raise SchemaError("schema has no feature columns to compare")
    ranges = _feature_ranges(schema)
    total = 0.0
    for (name, kind), a, b in zip(feats, raw_i, raw_j):
        if kind == "categorical":
            total += 1.0 if a == b else 0.0
        else:
            r = ranges[name]
            if r == 0.0:
                total += 1.0
            else:
                total += min(max(1.0 - abs(float(a) - float(b)) / r, 0.0), 1.0)
    return total / len(feats)


def _split_columns(split: list[Example], schema: FeatureSchema) -> list[tuple]:
    """Raw feature columns as arrays, in schema order.

    Each entry is ("continuous", values, range) or ("categorical", codes).
    Keeping schema order makes the vectorized accumulation bit-identical to
    a scalar per-pair evaluation, so tie-breaking is consistent.
    """
    ranges = _feature_ranges(schema)
    columns: list[tuple] = []
    for j, (name, kind) in enumerate(schema.feature_columns):
        column = [e.raw_features[j] for e in split]
        if kind == "continuous":
            columns.append(("continuous", np.asarray(column, dtype=np.float64), ranges[name]))
        else:
            codes: dict[str, int] = {}
            coded = np.array([codes.setdefault(v, len(codes)) for v in column], dtype=np.int64)
            columns.append(("categorical", coded))
    return columns


def _similarity_block(q: slice, columns: list[tuple]) -> np.ndarray:
    """Mean per-feature similarity of rows q against all rows."""
    n = len(columns[0][1])
    acc = np.zeros((q.stop - q.start, n))
    for entry in columns:
        if entry[0] == "continuous":
            _, col, r = entry
            if r == 0.0:
                acc += 1.0
            else:
                acc += np.clip(1.0 - np.abs(col[q, None] - col[None, :]) / r, 0.0, 1.0)
        else:
            col = entry[1]
            acc += col[q, None] == col[None, :]
    return acc / len(columns)


def k_nearest(split: list[Example], k: int, schema: FeatureSchema) -> NeighborIndex:
    """Exact k-nearest-neighbor lists under Gower similarity within a split.

    An example is never its own neighbor.  Ties are broken toward the lower
    index (stable sort on descending similarity).
    """
    n = len(split)
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < split size, got k={k}, n={n}")
    columns = _split_columns(split, schema)
    out = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        sims = _similarity_block(slice(start, stop), columns)
        for i in range(start, stop):
            row = sims[i - start]
            row[i] = -np.inf  # exclude self
            order = np.argsort(-row, kind="stable")
            out[i] = order[:k]
    return NeighborIndex(indices=out, k=k)


def accuracy(predictions, labels) -> float:
    """Fraction of exact matches."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ValueError(f"length mismatch: {predictions.shape} vs {labels.shape}")
    return float(np.mean(predictions == labels))


def discrimination(predictions, sensitive) -> float:
    """Absolute gap between the groups' positive-prediction rates."""
    predictions = np.asarray(predictions, dtype=np.float64)
    sensitive = np.asarray(sensitive)
    if predictions.shape != sensitive.shape:
        raise ValueError(f"length mismatch: {predictions.shape} vs {sensitive.shape}")
    mask1 = sensitive == 1
    mask0 = sensitive == 0
    if not mask0.any() or not mask1.any():
        raise ValueError("discrimination is undefined when a group is empty")
    return float(abs(predictions[mask0].mean() - predictions[mask1].mean()))


def consistency(predictions, neighbors: NeighborIndex) -> float:
    """1 - mean |prediction - mean prediction of the k nearest neighbors|."""
    predictions = np.asarray(predictions, dtype=np.float64)
    if len(predictions) != len(neighbors.indices):
        raise ValueError(
            f"length mismatch: {len(predictions)} predictions vs "
            f"{len(neighbors.indices)} neighbor lists"
        )
    neighbor_means = predictions[neighbors.indices].mean(axis=1)
    return float(1.0 - np.mean(np.abs(predictions - neighbor_means)))


def evaluate(predictions, split: list[Example], schema: FeatureSchema,
             k: int = DEFAULT_NEIGHBORS, neighbors: NeighborIndex | None = None,
             split_name: str = "") -> EvaluationReport:
    """Assemble the full report; the neighbor index may be precomputed and reused."""
    predictions = np.asarray(predictions)
    if len(predictions) != len(split):
        raise ValueError(f"length mismatch: {len(predictions)} predictions vs {len(split)} examples")
    labels = np.array([e.label for e in split])
    sens = np.array([e.sensitive for e in split])
    if neighbors is None:
        neighbors = k_nearest(split, k, schema)
    acc = accuracy(predictions, labels)
    discr = discrimination(predictions, sens)
    return EvaluationReport(
        accuracy=acc,
        discrimination=discr,
        consistency=consistency(predictions, neighbors),
        delta=acc - discr,
        split_name=split_name,
        n=len(split),
    )
