"""Validation-driven model selection over checkpoints and hyperparameter grids.

Two criteria: ``discrimination`` picks the checkpoint with the smallest
validation discrimination, ``delta`` the one with the largest validation
accuracy - discrimination.  Ties go to the later training step (the
more-trained model).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ccb import CcbModel, TrainingConfig, predict_split, train
from .data import Example, FeatureSchema, SplitDataset
from .metrics import DEFAULT_NEIGHBORS, EvaluationReport, NeighborIndex, evaluate, k_nearest

CRITERIA = ("discrimination", "delta")


@dataclass
class GridPoint:
    """One trained grid configuration with its selected checkpoint's validation scores."""

    fairness_weight: float
    hidden_dim: int
    seed: int
    step: int
    val_accuracy: float
    val_discrimination: float
    val_delta: float
    selected: bool
    model: CcbModel


@dataclass
class SubmodelReport:
    """Test-split evaluations of the four prediction modes of one model."""

    model0: EvaluationReport
    model1: EvaluationReport
    reversed_mode: EvaluationReport
    original: EvaluationReport

    def rows(self) -> list[tuple[str, EvaluationReport]]:
        return [
            ("model0", self.model0),
            ("model1", self.model1),
            ("reversed", self.reversed_mode),
            ("original", self.original),
        ]


def _criterion_value(report: EvaluationReport, criterion: str) -> float:
    if criterion == "discrimination":
        return report.discrimination
    if criterion == "delta":
        return report.delta
    raise ValueError(f"unknown criterion {criterion!r}, expected one of {CRITERIA}")


def _better(value: float, best: float, criterion: str) -> bool:
    # <= / >= so that equal scores prefer the later (more-trained) checkpoint
    return value <= best if criterion == "discrimination" else value >= best


def select_checkpoint(checkpoints: list[CcbModel], validation: list[Example],
                      criterion: str, k: int = DEFAULT_NEIGHBORS,
                      schema: FeatureSchema | None = None,
                      neighbors: NeighborIndex | None = None) -> tuple[CcbModel, EvaluationReport]:
    """Evaluate every checkpoint on validation (greedy, original mode); keep the optimum."""
    if not checkpoints:
        raise ValueError("no checkpoints to select from")
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}, expected one of {CRITERIA}")
    if neighbors is None:
        if schema is None:
            raise ValueError("either a schema or a precomputed neighbor index is required")
        neighbors = k_nearest(validation, k, schema)

    best_model: CcbModel | None = None
    best_report: EvaluationReport | None = None
    best_value = 0.0
    for model in checkpoints:
        preds = predict_split(model, validation, mode="original")
        report = evaluate(preds, validation, schema, k=k, neighbors=neighbors,
                          split_name="validation")
        value = _criterion_value(report, criterion)
        if best_model is None or _better(value, best_value, criterion):
            best_model, best_report, best_value = model, report, value
    return best_model, best_report


def grid_search(dataset: SplitDataset, schema: FeatureSchema,
                fairness_weights: list[float], hidden_dims: list[int], seeds: list[int],
                criterion: str, steps: int, learning_rate: float = 1e-2,
                checkpoint_every: int = 0, k: int = DEFAULT_NEIGHBORS,
                jobs: int = 1) -> list[GridPoint]:
    """Train one model per (fairness_weight, hidden_dim, seed), rank by the criterion.

    Returns the points sorted best-first on their selected checkpoint's
    validation score; the winner carries ``selected=True``.  Results are
    independent of enumeration order and of ``jobs``.
    """
    if not fairness_weights or not hidden_dims or not seeds:
        raise ValueError("grids must be non-empty")
    configs = [
        TrainingConfig(fairness_weight=fw, steps=steps, learning_rate=learning_rate,
                       hidden_dim=h, seed=s, checkpoint_every=checkpoint_every)
        for fw in fairness_weights for h in hidden_dims for s in seeds
    ]
    neighbors = k_nearest(dataset.validation, k, schema)

    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                 initargs=(dataset, schema, criterion, k, neighbors)) as pool:
            points = list(pool.map(_train_point_worker, configs))
    else:
        points = [_train_point(cfg, dataset, schema, criterion, k, neighbors) for cfg in configs]

    reverse = criterion == "delta"
    values = [p.val_delta if reverse else p.val_discrimination for p in points]

    def sort_key(i: int):
        # secondary keys keep the ranking independent of enumeration order
        p = points[i]
        return (-values[i] if reverse else values[i],
                p.fairness_weight, p.hidden_dim, p.seed)

    ranked = [points[i] for i in sorted(range(len(points)), key=sort_key)]
    ranked[0].selected = True
    return ranked


def _train_point(config: TrainingConfig, dataset: SplitDataset, schema: FeatureSchema,
                 criterion: str, k: int, neighbors: NeighborIndex) -> GridPoint:
    checkpoints, _ = train(dataset, config)
    model, report = select_checkpoint(checkpoints, dataset.validation, criterion,
                                      k=k, schema=schema, neighbors=neighbors)
    return GridPoint(
        fairness_weight=config.fairness_weight,
        hidden_dim=config.hidden_dim,
        seed=config.seed,
        step=model.step,
        val_accuracy=report.accuracy,
        val_discrimination=report.discrimination,
        val_delta=report.delta,
        selected=False,
        model=model,
    )


_WORKER_CTX: dict = {}


def _init_worker(dataset, schema, criterion, k, neighbors) -> None:
    _WORKER_CTX.update(dataset=dataset, schema=schema, criterion=criterion,
                       k=k, neighbors=neighbors)


def _train_point_worker(config: TrainingConfig) -> GridPoint:
    c = _WORKER_CTX
    return _train_point(config, c["dataset"], c["schema"], c["criterion"], c["k"], c["neighbors"])


def submodel_report(model: CcbModel, test: list[Example], schema: FeatureSchema,
                    k: int = DEFAULT_NEIGHBORS) -> SubmodelReport:
    """Evaluate the identical test examples under all four prediction modes."""
    neighbors = k_nearest(test, k, schema)
    reports = {}
    for mode in ("model0", "model1", "reversed", "original"):
        preds = predict_split(model, test, mode=mode)
        reports[mode] = evaluate(preds, test, schema, k=k, neighbors=neighbors, split_name="test")
    return SubmodelReport(
        model0=reports["model0"],
        model1=reports["model1"],
        reversed_mode=reports["reversed"],
        original=reports["original"],
    )


def grid_table_rows(points: list[GridPoint]) -> list[dict]:
    """Rows for the grid CSV: lambda,hidden,seed,step,val_acc,val_discr,val_delta,selected."""
    return [
        {
            "lambda": p.fairness_weight,
            "hidden": p.hidden_dim,
            "seed": p.seed,
            "step": p.step,
            "val_acc": p.val_accuracy,
            "val_discr": p.val_discrimination,
            "val_delta": p.val_delta,
            "selected": int(p.selected),
        }
        for p in points
    ]
