"""Command-line pipeline: prepare -> train -> report, plus a synthetic-data helper.

Every stage is deterministic given its config and seed; timestamps are
confined to the run_meta.json files so reruns are byte-identical.
Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import baseline, ccb, plots, selection, synth
from .data import (
    SchemaError,
    SplitDataset,
    load_rows,
    parse_schema,
    prepare_dataset,
    read_split_manifest,
    schema_from_json,
    schema_to_json,
    encode,
    write_split_manifest,
)
from .metrics import DEFAULT_NEIGHBORS, evaluate, k_nearest
from .policy import NumericError

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

MAX_AUTO_STEPS = 2_000_000
CURVE_MAX_ROWS = 10_000


class ConfigError(ValueError):
    pass


def _fmt4(x: float) -> str:
    return f"{x:.4f}"


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    lines = [",".join(header)] + [",".join(r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise ConfigError(f"{what} not found: {path}")
    return path


# ---------------------------------------------------------------------------
# prepare
# ---------------------------------------------------------------------------

def cmd_prepare(args: argparse.Namespace) -> int:
    data_path = _require(Path(args.data), "data CSV")
    schema_path = _require(Path(args.schema), "schema file")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    schema = parse_schema(schema_path.read_text(encoding="utf-8"))
    rows, dropped = load_rows(data_path, schema)
    dataset, fitted = prepare_dataset(rows, schema, args.seed)

    (out / "schema_fitted.json").write_text(schema_to_json(fitted) + "\n", encoding="utf-8")
    write_split_manifest(out / "split_manifest.json", dataset)
    (out / "dataset_config.json").write_text(json.dumps({
        "data": str(data_path), "schema": str(schema_path), "seed": args.seed,
    }, separators=(",", ":")) + "\n", encoding="utf-8")
    (out / "prepare_meta.json").write_text(json.dumps({
        "timestamp": time.time(), "rows_kept": len(rows), "rows_dropped": dropped,
    }) + "\n", encoding="utf-8")

    print(f"prepared {len(rows)} rows ({dropped} dropped for missing values) "
          f"-> {len(dataset.train)}/{len(dataset.validation)}/{len(dataset.test)} "
          f"train/validation/test, encoded dim {fitted.encoded_dim}")
    return 0


def load_prepared(out: Path) -> tuple[SplitDataset, "object"]:
    """Rebuild the encoded SplitDataset from the prepare artifacts."""
    _require(out / "dataset_config.json", "prepared dataset (run `prepare` first);")
    cfg = json.loads((out / "dataset_config.json").read_text(encoding="utf-8"))
    fitted = schema_from_json((out / "schema_fitted.json").read_text(encoding="utf-8"))
    manifest = read_split_manifest(out / "split_manifest.json")
    rows, _ = load_rows(Path(cfg["data"]), fitted)
    n = len(manifest["train"]) + len(manifest["validation"]) + len(manifest["test"])
    if len(rows) != n:
        raise ConfigError(
            f"{cfg['data']} has {len(rows)} usable rows but the manifest covers {n}; "
            "re-run `prepare`"
        )
    dataset = SplitDataset(
        train=[encode(rows[i], fitted) for i in manifest["train"]],
        validation=[encode(rows[i], fitted) for i in manifest["validation"]],
        test=[encode(rows[i], fitted) for i in manifest["test"]],
        split_seed=manifest["seed"],
        indices={part: manifest[part] for part in ("train", "validation", "test")},
    )
    return dataset, fitted


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

def _parse_grid(text: str, cast) -> list:
    try:
        values = [cast(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad grid value in {text!r}: {exc}") from None
    if not values:
        raise ConfigError(f"empty grid {text!r}")
    return values


def _run_id(cfg: ccb.TrainingConfig) -> str:
    return f"ccb-lam{cfg.fairness_weight:g}-h{cfg.hidden_dim}-seed{cfg.seed}"


def _train_one_ccb(dataset: SplitDataset, cfg: ccb.TrainingConfig, runs_dir: Path) -> str:
    run_dir = runs_dir / _run_id(cfg)
    run_dir.mkdir(parents=True, exist_ok=True)
    checkpoints, log = ccb.train(dataset, cfg)
    for model in checkpoints:
        ccb.save_checkpoint(run_dir / f"step-{model.step}.ckpt", model)
    log.to_csv(run_dir / "rewards.csv")
    (run_dir / "config.json").write_text(json.dumps({
        "method": "ccb",
        "fairness_weight": cfg.fairness_weight,
        "steps": cfg.steps,
        "learning_rate": cfg.learning_rate,
        "hidden_dim": cfg.hidden_dim,
        "seed": cfg.seed,
        "checkpoint_every": cfg.checkpoint_every,
    }, separators=(",", ":")) + "\n", encoding="utf-8")
    return _run_id(cfg)


_POOL_DATASET: list = []


def _pool_init(dataset, runs_dir) -> None:
    _POOL_DATASET[:] = [dataset, runs_dir]


def _pool_train(cfg: ccb.TrainingConfig) -> str:
    return _train_one_ccb(_POOL_DATASET[0], cfg, _POOL_DATASET[1])


def cmd_train(args: argparse.Namespace) -> int:
    out = Path(args.out)
    dataset, _ = load_prepared(out)
    runs_dir = out / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)

    if args.method == "lr":
        params = baseline.fit_logistic(dataset.train, epochs=args.epochs, l2=args.l2,
                                       seed=args.seed)
        run_dir = runs_dir / f"lr-seed{args.seed}"
        run_dir.mkdir(parents=True, exist_ok=True)
        baseline.save_lr(run_dir / "lr.ckpt", params)
        (run_dir / "config.json").write_text(json.dumps({
            "method": "lr", "epochs": args.epochs, "l2": args.l2, "seed": args.seed,
        }, separators=(",", ":")) + "\n", encoding="utf-8")
        print(f"trained lr -> {run_dir}")
        return 0

    steps = args.steps or min(100 * len(dataset.train), MAX_AUTO_STEPS)
    configs = [
        ccb.TrainingConfig(fairness_weight=fw, steps=steps, learning_rate=args.alpha,
                           hidden_dim=h, seed=args.seed,
                           checkpoint_every=args.checkpoint_every)
        for fw in _parse_grid(args.fairness_weight, float)
        for h in _parse_grid(args.hidden, int)
    ]
    if args.jobs > 1 and len(configs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs, initializer=_pool_init,
                                 initargs=(dataset, runs_dir)) as pool:
            run_ids = list(pool.map(_pool_train, configs))
    else:
        run_ids = [_train_one_ccb(dataset, cfg, runs_dir) for cfg in configs]

    (runs_dir / "run_meta.json").write_text(json.dumps({"timestamp": time.time()}) + "\n",
                                            encoding="utf-8")
    print(f"trained {len(run_ids)} run(s): " + ", ".join(run_ids))
    return 0


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def _load_run(run_dir: Path) -> dict:
    cfg = json.loads((run_dir / "config.json").read_text(encoding="utf-8"))
    record = {"dir": run_dir, "config": cfg, "method": cfg["method"]}
    if cfg["method"] == "ccb":
        ckpts = sorted(run_dir.glob("step-*.ckpt"),
                       key=lambda p: int(p.stem.split("-")[1]))
        if not ckpts:
            raise ConfigError(f"{run_dir} has no checkpoints")
        record["checkpoints"] = [ccb.load_checkpoint(p) for p in ckpts]
    else:
        record["lr"] = baseline.load_lr(run_dir / "lr.ckpt")
    return record


def _report_header() -> list[str]:
    return ["method", "criterion", "split", "n", "k",
            "accuracy", "discrimination", "consistency", "delta"]


def _report_row(method: str, criterion: str, rep, k: int) -> list[str]:
    # delta is recomputed from the rounded cells so the CSV row itself
    # satisfies delta = accuracy - discrimination
    acc, discr = _fmt4(rep.accuracy), _fmt4(rep.discrimination)
    return [method, criterion, rep.split_name, str(rep.n), str(k),
            acc, discr, _fmt4(rep.consistency), _fmt4(float(acc) - float(discr))]


def cmd_report(args: argparse.Namespace) -> int:
    out = Path(args.out)
    dataset, schema = load_prepared(out)
    runs_dir = _require(out / "runs", "runs directory (run `train` first);")
    report_dir = out / "report"
    report_dir.mkdir(parents=True, exist_ok=True)

    runs = [_load_run(d) for d in sorted(runs_dir.iterdir())
            if d.is_dir() and (d / "config.json").exists()]
    if not runs:
        raise ConfigError(f"no trained runs under {runs_dir}")
    ccb_runs = [r for r in runs if r["method"] == "ccb"]
    lr_runs = [r for r in runs if r["method"] == "lr"]

    k = args.k
    val_neighbors = k_nearest(dataset.validation, k, schema) if ccb_runs else None
    test_neighbors = k_nearest(dataset.test, k, schema)

    result_rows: list[list[str]] = []
    for run in lr_runs:
        preds = baseline.predict_logistic_split(run["lr"], dataset.test)
        rep = evaluate(preds, dataset.test, schema, k=k, neighbors=test_neighbors,
                       split_name="test")
        result_rows.append(_report_row("lr", "none", rep, k))
        print(f"lr (seed {run['config']['seed']}): test acc {_fmt4(rep.accuracy)} "
              f"discr {_fmt4(rep.discrimination)} consist {_fmt4(rep.consistency)} "
              f"delta {_fmt4(rep.delta)}")

    winners: dict[str, dict] = {}
    for criterion in selection.CRITERIA:
        best = None
        grid_rows = []
        for run in ccb_runs:
            reports = [
                evaluate(ccb.predict_split(m, dataset.validation, mode="original"),
                         dataset.validation, schema, k=k, neighbors=val_neighbors,
                         split_name="validation")
                for m in run["checkpoints"]
            ]
            values = [selection._criterion_value(rep, criterion) for rep in reports]
            best_i = 0
            for i in range(1, len(values)):
                if selection._better(values[i], values[best_i], criterion):
                    best_i = i
            cfg = run["config"]
            entry = {
                "run": run, "model": run["checkpoints"][best_i],
                "val_report": reports[best_i], "value": values[best_i],
                "ckpt_steps": [m.step for m in run["checkpoints"]],
                "ckpt_values": values,
            }
            grid_rows.append([
                f"{cfg['fairness_weight']:g}", str(cfg["hidden_dim"]), str(cfg["seed"]),
                str(entry["model"].step), repr(reports[best_i].accuracy),
                repr(reports[best_i].discrimination), repr(reports[best_i].delta), "0",
            ])
            better = best is None or (
                entry["value"] <= best["value"] if criterion == "discrimination"
                else entry["value"] >= best["value"])
            if better:
                best = entry
                best_grid_idx = len(grid_rows) - 1
        if ccb_runs:
            grid_rows[best_grid_idx][-1] = "1"
            _write_csv(report_dir / f"grid_{criterion}.csv",
                       ["lambda", "hidden", "seed", "step", "val_acc", "val_discr",
                        "val_delta", "selected"], grid_rows)
            winners[criterion] = best
            preds = ccb.predict_split(best["model"], dataset.test, mode=args.mode)
            rep = evaluate(preds, dataset.test, schema, k=k, neighbors=test_neighbors,
                           split_name="test")
            result_rows.append(_report_row("ccb", criterion, rep, k))
            cfg = best["run"]["config"]
            print(f"ccb criterion={criterion}: lambda {cfg['fairness_weight']:g} "
                  f"hidden {cfg['hidden_dim']} step {best['model'].step} | test "
                  f"acc {_fmt4(rep.accuracy)} discr {_fmt4(rep.discrimination)} "
                  f"consist {_fmt4(rep.consistency)} delta {_fmt4(rep.delta)}")

    _write_csv(report_dir / "results.csv", _report_header(), result_rows)

    if ccb_runs:
        chosen = winners[args.criterion]
        sub = selection.submodel_report(chosen["model"], dataset.test, schema, k=k)
        sub_rows = [[name] + _report_row("ccb", args.criterion, rep, k)[2:]
                    for name, rep in sub.rows()]
        _write_csv(report_dir / "submodel.csv",
                   ["mode", "split", "n", "k", "accuracy", "discrimination",
                    "consistency", "delta"], sub_rows)
        for name, rep in sub.rows():
            print(f"submodel {name:<9}: acc {_fmt4(rep.accuracy)} "
                  f"discr {_fmt4(rep.discrimination)} consist {_fmt4(rep.consistency)}")

        curve = _load_curve(chosen["run"]["dir"] / "rewards.csv")
        _write_csv(report_dir / "reward_curve.csv", ["step", "accumulated"],
                   [[str(s), repr(v)] for s, v in curve])
        plots.render_convergence(np.array([s for s, _ in curve]),
                                 np.array([v for _, v in curve]),
                                 report_dir / "convergence.png")
        plots.render_selection_curve(chosen["ckpt_steps"], chosen["ckpt_values"],
                                     args.criterion, chosen["model"].step,
                                     report_dir / "selection.png")
        plots.render_submodel_bars([(name, rep.row()) for name, rep in sub.rows()],
                                   report_dir / "submodel.png")
    return 0


def _load_curve(rewards_csv: Path) -> list[tuple[int, float]]:
    lines = rewards_csv.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    i_step, i_acc = header.index("step"), header.index("accumulated")
    rows = lines[1:]
    if len(rows) > CURVE_MAX_ROWS:
        idx = np.linspace(0, len(rows) - 1, CURVE_MAX_ROWS).astype(int)
        rows = [rows[i] for i in idx]
    out = []
    for line in rows:
        parts = line.split(",")
        out.append((int(parts[i_step]), float(parts[i_acc])))
    return out


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

def cmd_synth(args: argparse.Namespace) -> int:
    synth.write_synthetic(args.data, args.schema, n=args.n, seed=args.seed,
                          dim=args.dim, kind=args.kind)
    print(f"wrote {args.n} synthetic rows to {args.data} (schema {args.schema})")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairbandit",
        description="Cooperative contextual bandits for fair binary classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="split, fit and encode a CSV dataset")
    p.add_argument("--data", required=True, help="input CSV with header row")
    p.add_argument("--schema", required=True, help="schema file (column = kind lines)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train cooperative bandits or the LR baseline")
    p.add_argument("--out", required=True, help="prepared dataset directory")
    p.add_argument("--method", choices=("ccb", "lr"), default="ccb")
    p.add_argument("--lambda", dest="fairness_weight", default="50",
                   help="fairness weight(s), comma-separated for a grid")
    p.add_argument("--hidden", default="20", help="hidden width(s), comma-separated")
    p.add_argument("--steps", type=int, default=0,
                   help="training steps (0 = min(100 * train size, 2e6))")
    p.add_argument("--alpha", type=float, default=1e-2, help="learning rate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoint-every", type=int, default=0,
                   help="checkpoint cadence (0 = steps / 100)")
    p.add_argument("--jobs", type=int, default=1, help="parallel grid workers")
    p.add_argument("--epochs", type=int, default=500, help="LR baseline epochs")
    p.add_argument("--l2", type=float, default=1e-4, help="LR baseline L2 penalty")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("report", help="select, evaluate and render report files")
    p.add_argument("--out", required=True, help="prepared dataset directory")
    p.add_argument("--criterion", choices=selection.CRITERIA, default="discrimination")
    p.add_argument("--k", type=int, default=DEFAULT_NEIGHBORS,
                   help="neighbors for the consistency metric")
    p.add_argument("--mode", choices=ccb.PREDICT_MODES, default="original",
                   help="prediction mode for the headline rows")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="write a synthetic CSV + schema")
    p.add_argument("--data", required=True, help="output CSV path")
    p.add_argument("--schema", required=True, help="output schema path")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=6)
    p.add_argument("--kind", choices=("independent", "separable"), default="independent")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
