"""Schema-driven ingestion of tabular CSV data: parse, encode, split.

A dataset is described by a plain-text schema assigning each CSV column one
of four kinds: ``categorical``, ``continuous``, ``sensitive`` or ``label``.
Categorical feature columns are one-hot encoded, continuous ones z-scored
with statistics fitted on the training split only.  The sensitive attribute
and the label are binarized and kept out of the feature vector.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

VALID_KINDS = ("categorical", "continuous", "sensitive", "label")
SPLIT_RATIOS = (0.70, 0.15, 0.15)

_RESERVED_KEYS = ("positive_label", "sensitive_group_1")


class SchemaError(ValueError):
    """Schema file or data/schema mismatch problem."""


@dataclass
class FeatureSchema:
    """Column kinds plus the encoding statistics fitted on a training split.

    ``categorical_levels`` maps a categorical column to its observed levels
    in first-appearance order; ``continuous_stats`` maps a continuous column
    to ``(mean, stddev, min, max)``.  ``stddev`` is the population standard
    deviation.  Columns with zero variance are listed in
    ``constant_columns`` and later encode to 0.
    """

    columns: list[tuple[str, str]]
    positive_label: str
    sensitive_group_1: str
    categorical_levels: dict[str, list[str]] = field(default_factory=dict)
    continuous_stats: dict[str, tuple[float, float, float, float]] = field(default_factory=dict)
    constant_columns: list[str] = field(default_factory=list)
    fitted: bool = False

    @property
    def sensitive_column(self) -> str:
        return next(n for n, k in self.columns if k == "sensitive")

    @property
    def label_column(self) -> str:
        return next(n for n, k in self.columns if k == "label")

    @property
    def feature_columns(self) -> list[tuple[str, str]]:
        """Columns entering the feature vector and the similarity metric."""
        return [(n, k) for n, k in self.columns if k in ("categorical", "continuous")]

    @property
    def encoded_dim(self) -> int:
        if not self.fitted:
            raise SchemaError("schema statistics not fitted yet")
        dim = 0
        for name, kind in self.feature_columns:
            dim += len(self.categorical_levels[name]) if kind == "categorical" else 1
        return dim


@dataclass
class Example:
    """One individual: encoded features, binary sensitive attribute, binary label.

    ``raw_features`` keeps the pre-encoding feature-column values (strings
    for categorical, floats for continuous) for the mixed-type similarity
    metric.
    """

    features: np.ndarray
    sensitive: int
    label: int
    raw_features: tuple


@dataclass
class SplitDataset:
    """70/15/15 split of encoded examples, with the row indices that produced it."""

    train: list[Example]
    validation: list[Example]
    test: list[Example]
    split_seed: int
    ratios: tuple[float, float, float] = SPLIT_RATIOS
    indices: dict[str, list[int]] = field(default_factory=dict)


def parse_schema(schema_text: str) -> FeatureSchema:
    """Parse the ``column = kind`` schema format into an unfitted schema.

    Blank lines and ``#`` comments are ignored.  Exactly one ``sensitive``
    and one ``label`` column must be present, along with the
    ``positive_label`` and ``sensitive_group_1`` binarization rules.
    """
    columns: list[tuple[str, str]] = []
    extras: dict[str, str] = {}
    for lineno, raw_line in enumerate(schema_text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SchemaError(f"line {lineno}: expected 'name = kind', got {raw_line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise SchemaError(f"line {lineno}: empty name or value")
        if key in _RESERVED_KEYS:
            if key in extras:
                raise SchemaError(f"duplicate setting {key!r}")
            extras[key] = value
            continue
        if value not in VALID_KINDS:
            raise SchemaError(f"line {lineno}: unknown kind {value!r} for column {key!r}")
        if any(name == key for name, _ in columns):
            raise SchemaError(f"duplicate column name {key!r}")
        columns.append((key, value))

    n_sensitive = sum(1 for _, k in columns if k == "sensitive")
    n_label = sum(1 for _, k in columns if k == "label")
    if n_sensitive != 1:
        word = "multiple" if n_sensitive else "no"
        raise SchemaError(f"{word} sensitive columns (need exactly one)")
    if n_label != 1:
        word = "multiple" if n_label else "no"
        raise SchemaError(f"{word} label columns (need exactly one)")
    for key in _RESERVED_KEYS:
        if key not in extras:
            raise SchemaError(f"schema is missing the {key!r} setting")

    return FeatureSchema(
        columns=columns,
        positive_label=extras["positive_label"],
        sensitive_group_1=extras["sensitive_group_1"],
    )


def load_rows(csv_path: str | Path, schema: FeatureSchema) -> tuple[list[dict[str, str]], int]:
    """Read a header CSV into row dicts, dropping rows with empty cells.

    Returns ``(rows, dropped_count)``.  The header must contain exactly the
    schema's columns (any order); values are whitespace-stripped.
    """
    csv_path = Path(csv_path)
    with csv_path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{csv_path}: empty file, no header row")
        header = [h.strip() for h in reader.fieldnames]
        expected = [name for name, _ in schema.columns]
        if sorted(header) != sorted(expected):
            missing = sorted(set(expected) - set(header))
            extra = sorted(set(header) - set(expected))
            raise SchemaError(
                f"{csv_path}: header does not match schema "
                f"(missing {missing}, unexpected {extra})"
            )
        rows: list[dict[str, str]] = []
        dropped = 0
        for record in reader:
            clean = {k.strip(): (v or "").strip() for k, v in record.items() if k is not None}
            if any(v == "" for v in clean.values()) or len(clean) != len(expected):
                dropped += 1
                continue
            rows.append(clean)
    return rows, dropped


def fit_encoding(raw_rows: list[dict[str, str]], schema: FeatureSchema) -> FeatureSchema:
    """Fit categorical levels and continuous statistics on training rows only.

    Levels are recorded in first-appearance order.  Continuous statistics
    are ``(mean, population stddev, min, max)``; a zero-variance column is
    flagged in ``constant_columns``.
    """
    if not raw_rows:
        raise SchemaError("cannot fit encoding on an empty training set")

    levels: dict[str, list[str]] = {}
    stats: dict[str, tuple[float, float, float, float]] = {}
    constant: list[str] = []
    for name, kind in schema.columns:
        if kind == "categorical":
            seen: list[str] = []
            present = set()
            for row in raw_rows:
                value = row[name]
                if value not in present:
                    present.add(value)
                    seen.append(value)
            levels[name] = seen
        elif kind == "continuous":
            try:
                values = np.array([float(row[name]) for row in raw_rows], dtype=np.float64)
            except ValueError as exc:
                raise SchemaError(f"non-numeric value in continuous column {name!r}: {exc}") from None
            std = float(np.std(values))
            stats[name] = (float(np.mean(values)), std, float(np.min(values)), float(np.max(values)))
            if std == 0.0:
                constant.append(name)

    return FeatureSchema(
        columns=list(schema.columns),
        positive_label=schema.positive_label,
        sensitive_group_1=schema.sensitive_group_1,
        categorical_levels=levels,
        continuous_stats=stats,
        constant_columns=constant,
        fitted=True,
    )


def encode(raw_row: dict[str, str], schema: FeatureSchema) -> Example:
    """Encode one raw row: one-hot categorical blocks, z-scored continuous values.

    A continuous value v becomes (v - mean) / stddev, or 0 for a
    zero-variance column.  An unseen categorical level is a hard error so
    schema drift fails loudly instead of silently distorting similarity.
    """
    if not schema.fitted:
        raise SchemaError("schema statistics not fitted yet")

    parts: list[np.ndarray] = []
    raw_feats: list = []
    for name, kind in schema.columns:
        if name not in raw_row:
            raise SchemaError(f"missing column {name!r} in row")
        value = raw_row[name]
        if kind == "categorical":
            level_list = schema.categorical_levels[name]
            if value not in level_list:
                raise SchemaError(f"unseen level {value!r} in categorical column {name!r}")
            block = np.zeros(len(level_list))
            block[level_list.index(value)] = 1.0
            parts.append(block)
            raw_feats.append(value)
        elif kind == "continuous":
            try:
                v = float(value)
            except ValueError:
                raise SchemaError(f"non-numeric value {value!r} in continuous column {name!r}") from None
            mean, std, _, _ = schema.continuous_stats[name]
            parts.append(np.array([(v - mean) / std if std > 0 else 0.0]))
            raw_feats.append(v)

    features = np.concatenate(parts) if parts else np.zeros(0)
    if not np.all(np.isfinite(features)):
        raise SchemaError("encoded feature vector contains non-finite entries")
    sensitive = int(raw_row[schema.sensitive_column] == schema.sensitive_group_1)
    label = int(raw_row[schema.label_column] == schema.positive_label)
    return Example(features=features, sensitive=sensitive, label=label, raw_features=tuple(raw_feats))


def split_indices(n: int, seed: int) -> tuple[list[int], list[int], list[int]]:
    """Seeded uniform permutation of range(n), cut contiguously at 70/15/15."""
    if n < 10:
        raise ValueError(f"need at least 10 examples to split, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(n * SPLIT_RATIOS[0] + 0.5)
    n_val = int(n * SPLIT_RATIOS[1] + 0.5)
    n_test = n - n_train - n_val
    if min(n_train, n_val, n_test) < 1:
        raise ValueError(f"too few examples ({n}) to populate all three parts")
    train = perm[:n_train]
    val = perm[n_train:n_train + n_val]
    test = perm[n_train + n_val:]
    return train.tolist(), val.tolist(), test.tolist()


def split(examples: list, seed: int) -> SplitDataset:
    """Split a list of examples into a 70/15/15 ``SplitDataset``, deterministically."""
    idx_train, idx_val, idx_test = split_indices(len(examples), seed)
    return SplitDataset(
        train=[examples[i] for i in idx_train],
        validation=[examples[i] for i in idx_val],
        test=[examples[i] for i in idx_test],
        split_seed=seed,
        indices={"train": idx_train, "validation": idx_val, "test": idx_test},
    )


def prepare_dataset(rows: list[dict[str, str]], schema: FeatureSchema, seed: int) -> tuple[SplitDataset, FeatureSchema]:
    """Split raw rows, fit the schema on the training part, encode everything.

    Splitting happens before fitting so validation/test rows never leak
    into the encoding statistics.
    """
    idx_train, idx_val, idx_test = split_indices(len(rows), seed)
    fitted = fit_encoding([rows[i] for i in idx_train], schema)
    dataset = SplitDataset(
        train=[encode(rows[i], fitted) for i in idx_train],
        validation=[encode(rows[i], fitted) for i in idx_val],
        test=[encode(rows[i], fitted) for i in idx_test],
        split_seed=seed,
        indices={"train": idx_train, "validation": idx_val, "test": idx_test},
    )
    return dataset, fitted


# ---------------------------------------------------------------------------
# on-disk artifacts: split manifest and fitted schema
# ---------------------------------------------------------------------------

def write_split_manifest(path: str | Path, dataset: SplitDataset) -> None:
    payload = {
        "seed": dataset.split_seed,
        "ratios": list(dataset.ratios),
        "train": dataset.indices["train"],
        "validation": dataset.indices["validation"],
        "test": dataset.indices["test"],
    }
    Path(path).write_text(json.dumps(payload, indent=None, separators=(",", ":")) + "\n", encoding="utf-8")


def read_split_manifest(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def schema_to_json(schema: FeatureSchema) -> str:
    payload = {
        "format": "fairbandit-schema-v1",
        "columns": [list(c) for c in schema.columns],
        "positive_label": schema.positive_label,
        "sensitive_group_1": schema.sensitive_group_1,
        "categorical_levels": schema.categorical_levels,
        "continuous_stats": {k: list(v) for k, v in schema.continuous_stats.items()},
        "constant_columns": schema.constant_columns,
        "fitted": schema.fitted,
    }
    return json.dumps(payload, indent=None, separators=(",", ":"))


def schema_from_json(text: str) -> FeatureSchema:
    payload = json.loads(text)
    if payload.get("format") != "fairbandit-schema-v1":
        raise SchemaError(f"unsupported schema format tag {payload.get('format')!r}")
    return FeatureSchema(
        columns=[tuple(c) for c in payload["columns"]],
        positive_label=payload["positive_label"],
        sensitive_group_1=payload["sensitive_group_1"],
        categorical_levels=payload["categorical_levels"],
        continuous_stats={k: tuple(v) for k, v in payload["continuous_stats"].items()},
        constant_columns=payload["constant_columns"],
        fitted=payload["fitted"],
    )
