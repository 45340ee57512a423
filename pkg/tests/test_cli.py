import json
from pathlib import Path

import pytest

from fairbandit.cli import main
from fairbandit import synth


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def synth_csv(tmp_path):
    csv_path = tmp_path / "toy.csv"
    schema_path = tmp_path / "toy.schema"
    synth.write_synthetic(csv_path, schema_path, n=400, seed=0, dim=4)
    return csv_path, schema_path


@pytest.fixture
def prepared(tmp_path, synth_csv):
    csv_path, schema_path = synth_csv
    out = tmp_path / "work"
    assert run("prepare", "--data", csv_path, "--schema", schema_path,
               "--seed", 3, "--out", out) == 0
    return out


class TestPrepare:
    def test_writes_manifest_schema_and_meta(self, prepared):
        assert (prepared / "split_manifest.json").exists()
        assert (prepared / "schema_fitted.json").exists()
        assert (prepared / "prepare_meta.json").exists()

    def test_rerun_with_same_seed_is_byte_identical(self, tmp_path, synth_csv):
        csv_path, schema_path = synth_csv
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            assert run("prepare", "--data", csv_path, "--schema", schema_path,
                       "--seed", 3, "--out", out) == 0
        for name in ("split_manifest.json", "schema_fitted.json"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_thousand_rows_split_700_150_150(self, tmp_path):
        csv_path = tmp_path / "g.csv"
        schema_path = tmp_path / "g.schema"
        synth.write_synthetic(csv_path, schema_path, n=1000, seed=1, dim=3)
        out = tmp_path / "work"
        assert run("prepare", "--data", csv_path, "--schema", schema_path,
                   "--seed", 0, "--out", out) == 0
        manifest = json.loads((out / "split_manifest.json").read_text())
        assert (len(manifest["train"]), len(manifest["validation"]), len(manifest["test"])) \
            == (700, 150, 150)

    def test_missing_schema_file_exits_2_naming_path(self, tmp_path, synth_csv, capsys):
        csv_path, _ = synth_csv
        missing = tmp_path / "nope.schema"
        code = run("prepare", "--data", csv_path, "--schema", missing,
                   "--out", tmp_path / "w")
        assert code == 2
        assert str(missing) in capsys.readouterr().err


class TestTrain:
    def test_single_run_writes_checkpoints_rewards_config(self, prepared):
        assert run("train", "--out", prepared, "--lambda", "2", "--hidden", "8",
                   "--steps", 300, "--seed", 5) == 0
        run_dir = prepared / "runs" / "ccb-lam2-h8-seed5"
        assert (run_dir / "rewards.csv").exists()
        assert (run_dir / "config.json").exists()
        assert len(list(run_dir.glob("step-*.ckpt"))) > 0

    def test_lambda_zero_rewards_are_binary(self, prepared):
        assert run("train", "--out", prepared, "--lambda", "0", "--hidden", "8",
                   "--steps", 200, "--seed", 1) == 0
        rewards = (prepared / "runs" / "ccb-lam0-h8-seed1" / "rewards.csv").read_text()
        values = {line.split(",")[5] for line in rewards.splitlines()[1:]}
        assert values <= {"0.0", "1.0", "0", "1"}

    def test_same_config_twice_gives_identical_reward_csv(self, tmp_path, synth_csv):
        csv_path, schema_path = synth_csv
        outputs = []
        for name in ("w1", "w2"):
            out = tmp_path / name
            assert run("prepare", "--data", csv_path, "--schema", schema_path,
                       "--seed", 3, "--out", out) == 0
            assert run("train", "--out", out, "--lambda", "5", "--hidden", "8",
                       "--steps", 250, "--seed", 2) == 0
            outputs.append((out / "runs" / "ccb-lam5-h8-seed2" / "rewards.csv").read_bytes())
        assert outputs[0] == outputs[1]

    def test_grid_fan_out_and_jobs_equivalence(self, tmp_path, synth_csv):
        csv_path, schema_path = synth_csv
        contents = {}
        for name, jobs in (("serial", 1), ("parallel", 2)):
            out = tmp_path / name
            assert run("prepare", "--data", csv_path, "--schema", schema_path,
                       "--seed", 3, "--out", out) == 0
            assert run("train", "--out", out, "--lambda", "0,5", "--hidden", "6,8",
                       "--steps", 120, "--seed", 1, "--jobs", jobs) == 0
            run_dirs = sorted(p.name for p in (out / "runs").iterdir() if p.is_dir())
            assert len(run_dirs) == 4
            contents[name] = {
                d: (out / "runs" / d / "rewards.csv").read_bytes() for d in run_dirs
            }
        assert contents["serial"] == contents["parallel"]

    def test_lr_method(self, prepared):
        assert run("train", "--out", prepared, "--method", "lr", "--seed", 4) == 0
        assert (prepared / "runs" / "lr-seed4" / "lr.ckpt").exists()

    def test_train_before_prepare_exits_2(self, tmp_path):
        assert run("train", "--out", tmp_path / "empty") == 2


class TestReport:
    @pytest.fixture
    def trained(self, prepared):
        assert run("train", "--out", prepared, "--lambda", "0,20", "--hidden", "8",
                   "--steps", 400, "--seed", 2) == 0
        assert run("train", "--out", prepared, "--method", "lr", "--seed", 2) == 0
        return prepared

    def test_report_writes_tables_and_figures(self, trained):
        assert run("report", "--out", trained, "--criterion", "discrimination",
                   "--k", 3) == 0
        report = trained / "report"
        for name in ("results.csv", "submodel.csv", "reward_curve.csv",
                     "grid_discrimination.csv", "grid_delta.csv",
                     "convergence.png", "selection.png", "submodel.png"):
            assert (report / name).exists(), name

    def test_results_rows_satisfy_delta_identity(self, trained):
        assert run("report", "--out", trained, "--k", 3) == 0
        lines = (trained / "report" / "results.csv").read_text().splitlines()
        header = lines[0].split(",")
        i_acc = header.index("accuracy")
        i_discr = header.index("discrimination")
        i_delta = header.index("delta")
        assert len(lines) >= 3  # lr row + ccb rows for both criteria
        for line in lines[1:]:
            parts = line.split(",")
            assert abs(float(parts[i_acc]) - float(parts[i_discr])
                       - float(parts[i_delta])) < 1e-9

    def test_submodel_report_has_exactly_four_rows(self, trained):
        assert run("report", "--out", trained, "--k", 3) == 0
        lines = (trained / "report" / "submodel.csv").read_text().splitlines()
        assert len(lines) == 5
        assert [line.split(",")[0] for line in lines[1:]] == \
            ["model0", "model1", "reversed", "original"]

    def test_report_before_train_exits_2(self, prepared):
        assert run("report", "--out", prepared) == 2

    def test_rerun_report_is_byte_identical(self, trained):
        assert run("report", "--out", trained, "--k", 3) == 0
        first = {p.name: p.read_bytes() for p in (trained / "report").iterdir()}
        assert run("report", "--out", trained, "--k", 3) == 0
        second = {p.name: p.read_bytes() for p in (trained / "report").iterdir()}
        assert first == second


class TestSynthCommand:
    def test_writes_csv_and_schema(self, tmp_path):
        csv_path = tmp_path / "s.csv"
        schema_path = tmp_path / "s.schema"
        assert run("synth", "--data", csv_path, "--schema", schema_path,
                   "--n", 50, "--seed", 1) == 0
        assert csv_path.exists() and schema_path.exists()


class TestExitCodes:
    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2
