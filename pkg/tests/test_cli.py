import csv
import json
import shutil
from pathlib import Path

import pytest

from firegrid.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def labeled(tmp_path, capsys):
    code, _, _ = run(capsys, "synth", "--task", "prevention", "--seed", 42, "--out", tmp_path / "data")
    assert code == 0
    return tmp_path / "data" / "labeled.csv"


def test_tune_writes_225_rows(tmp_path, capsys, labeled):
    code, out, _ = run(capsys, "tune", "--task", "prevention", "--data", labeled, "--seed", 42, "--out", tmp_path / "t")
    assert code == 0
    with open(tmp_path / "t" / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 225
    assert "best n_estimators=" in out and len(out.strip().splitlines()) == 1
    assert json.loads((tmp_path / "t" / "tuning.json").read_text())["seed"] == 42


def test_train_zero_estimators_exit_1(tmp_path, capsys, labeled):
    code, _, err = run(capsys, "train", "--n-estimators", 0, "--data", labeled, "--out", tmp_path)
    assert code == 1 and "n-estimators" in err


def test_extended_hyperparameters(tmp_path, capsys, labeled):
    code, _, err = run(capsys, "train", "--max-depth", 20, "--data", labeled, "--out", tmp_path / "a")
    assert code == 1 and "max-depth" in err
    code, _, _ = run(capsys, "train", "--max-depth", 20, "--allow-extended", "--data", labeled, "--out", tmp_path / "a")
    assert code == 0


def test_unknown_command_exit_1(capsys):
    assert run(capsys, "fly")[0] == 1


def test_unknown_config_key_named(tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps({"task": "prevention", "n_trees": 3}))
    code, _, err = run(capsys, "train", "--config", tmp_path / "c.json")
    assert code == 1 and "n_trees" in err


def test_toml_config_and_flag_precedence(tmp_path, capsys, labeled):
    (tmp_path / "c.toml").write_text(f'task = "prevention"\ndata = "{labeled}"\nn-estimators = 3\nseed = 5\n')
    code, out, _ = run(capsys, "train", "--config", tmp_path / "c.toml", "--seed", 9, "--print-config")
    cfg = json.loads(out)
    assert code == 0 and cfg["n-estimators"] == 3 and cfg["seed"] == 9


def test_train_evaluate_outputs(tmp_path, capsys, labeled):
    out = tmp_path / "o"
    assert run(capsys, "train", "--data", labeled, "--out", out)[0] == 0
    model = json.loads((out / "model.json").read_text())
    assert model["seed"] == 42 and model["hyperparameters"]["n_estimators"] == 7
    code, line, _ = run(capsys, "evaluate", "--data", labeled, "--model", out / "model.json", "--out", out)
    report = json.loads((out / "report.json").read_text())
    assert code == 0 and report["metadata"]["seed"] == 42
    assert len(report["cv_fold_accuracies"]) == 5
    assert set(report["confusion"]) == {"tp", "tn", "fp", "fn"}


def test_missing_data_file_exit_1(tmp_path, capsys):
    code, _, err = run(capsys, "train", "--data", tmp_path / "nope.csv", "--out", tmp_path)
    assert code == 1 and "--data" in err


def test_runtime_stage_error_exit_2(tmp_path, capsys, demo_run, labeled):
    root = demo_run.parent
    assert run(capsys, "train", "--data", labeled, "--out", root / "m")[0] == 0
    det = tmp_path / "det"
    from make_demo_run import make_demo

    det_cfg = make_demo(det, "detection", 1)
    code, _, err = run(capsys, "classify", "--config", det_cfg, "--model", root / "m" / "model.json")
    assert code == 2 and "classify" in err


def _files(d: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.is_file()}


def test_pipeline_equals_classify_then_dispatch(demo_run, capsys):
    root = demo_run.parent
    assert run(capsys, "pipeline", "--config", demo_run)[0] == 0
    produced = _files(root / "out")
    assert {"model.json", "targets.json", "targets.csv", "plan.json", "plan.csv", "events.csv"} <= set(produced)

    model = root / "model_copy.json"
    shutil.copy(root / "out" / "model.json", model)
    manual = root / "manual"
    for cmd in ("classify", "dispatch", "simulate"):
        assert run(capsys, cmd, "--config", demo_run, "--model", model, "--out", manual)[0] == 0
    for name in ("targets.json", "targets.csv", "plan.json", "plan.csv", "events.csv"):
        assert (manual / name).read_bytes() == produced[name], name


def test_pipeline_rerun_is_byte_identical_and_contained(demo_run, capsys):
    root = demo_run.parent
    before = {p for p in root.rglob("*")}
    assert run(capsys, "pipeline", "--config", demo_run)[0] == 0
    first = _files(root / "out")
    assert run(capsys, "pipeline", "--config", demo_run)[0] == 0
    assert _files(root / "out") == first
    new = {p for p in root.rglob("*")} - before
    assert all((root / "out") in p.parents or p == root / "out" for p in new)


def test_ingest_writes_grid(demo_run, capsys):
    code, out, _ = run(capsys, "ingest", "--config", demo_run)
    grid = json.loads((demo_run.parent / "out" / "grid.json").read_text())
    assert code == 0 and len(grid["cells"]) == 100
    assert sum(c["mask_reason"] == "water" for c in grid["cells"]) == 10
