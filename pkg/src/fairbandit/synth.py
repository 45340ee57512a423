"""Synthetic tabular generators with known ground-truth structure.

Two families:

* ``separable_rows`` — the label is a fixed linear rule of the features
  with a margin band removed, so a trained policy should approach perfect
  accuracy.
* ``independent_label_rows`` — the label depends only on feature f0 while
  the groups are shifted along f1, a direction the label ignores.  The
  label is therefore independent of the sensitive attribute, but the two
  group-specific policies train on visibly different input regions, which
  makes the divergence penalty do measurable work.

Rows come back in the CSV text format so they run through the standard
schema -> split -> fit -> encode pipeline.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .data import FeatureSchema, SplitDataset, parse_schema, prepare_dataset


def synth_schema_text(dim: int) -> str:
    lines = [f"f{j} = continuous" for j in range(dim)]
    lines += ["group = sensitive", "outcome = label",
              "positive_label = yes", "sensitive_group_1 = b"]
    return "\n".join(lines) + "\n"


def separable_rows(n: int, seed: int, dim: int = 4, margin: float = 0.3) -> list[dict[str, str]]:
    """Linearly separable rows: outcome = yes iff f0 > 0, with |f0| >= margin."""
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n):
        x = rng.normal(size=dim)
        while abs(x[0]) < margin:
            x[0] = rng.normal()
        s = int(rng.random() < 0.5)
        row = {f"f{j}": repr(float(x[j])) for j in range(dim)}
        row["group"] = "b" if s else "a"
        row["outcome"] = "yes" if x[0] > 0 else "no"
        rows.append(row)
    return rows


def independent_label_rows(n: int, seed: int, dim: int = 6, group_shift: float = 2.0,
                           margin: float = 0.3) -> list[dict[str, str]]:
    """Rows whose label is independent of the group.

    outcome = yes iff f0 > 0 (margin band removed); group membership shifts
    f1 by ``group_shift``, leaving f0 untouched.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n):
        x = rng.normal(size=dim)
        while abs(x[0]) < margin:
            x[0] = rng.normal()
        s = int(rng.random() < 0.5)
        x[1] += group_shift * s
        row = {f"f{j}": repr(float(x[j])) for j in range(dim)}
        row["group"] = "b" if s else "a"
        row["outcome"] = "yes" if x[0] > 0 else "no"
        rows.append(row)
    return rows


def build_dataset(rows: list[dict[str, str]], dim: int, split_seed: int) -> tuple[SplitDataset, FeatureSchema]:
    schema = parse_schema(synth_schema_text(dim))
    return prepare_dataset(rows, schema, split_seed)


def write_csv(path: str | Path, rows: list[dict[str, str]], dim: int) -> None:
    fieldnames = [f"f{j}" for j in range(dim)] + ["group", "outcome"]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def write_synthetic(csv_path: str | Path, schema_path: str | Path, n: int, seed: int,
                    dim: int = 6, kind: str = "independent") -> None:
    """Write a synthetic CSV plus its schema file (CLI `synth` entry point)."""
    if kind == "independent":
        rows = independent_label_rows(n, seed, dim=dim)
    elif kind == "separable":
        rows = separable_rows(n, seed, dim=dim)
    else:
        raise ValueError(f"unknown synthetic kind {kind!r}")
    write_csv(csv_path, rows, dim)
    Path(schema_path).write_text(synth_schema_text(dim), encoding="utf-8")
