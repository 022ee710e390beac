import json
from pathlib import Path

import pandas as pd
import pytest

from autocp.cli.main import main

TINY_SEARCH = {
    "search": {"models": ["constant", "ridge"], "calibrations": ["split"]},
    "budget": {"n_init": 2, "n_iter": 1, "n_candidates": 32, "n_local": 4, "hyper_restarts": 1, "hyper_steps": 10},
}


def last_record(capsys) -> dict:
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


@pytest.fixture
def out_dir(tmp_path) -> str:
    return str(tmp_path / "runs")


def _bench(out_dir, preset, *extra):
    return main(
        ["--log-level", "WARNING", "bench", "--synthetic", "gaussian", "--n-samples", "200",
         "--splits", "2", "--preset", preset, "--out", out_dir, *extra]
    )


def test_bench_writes_a_report(capsys, out_dir):
    assert _bench(out_dir, "SCP-Ridge") == 0
    record = last_record(capsys)
    report = Path(record["report"])
    assert report == Path(out_dir) / "gaussian" / "SCP-Ridge"
    assert (report / "records.jsonl").exists() and (report / "summary.csv").exists()
    assert 0.0 <= record["aggregate"]["mean_coverage"] <= 1.0


def test_train_fraction_flag_sets_the_split_sizes(capsys, out_dir):
    assert _bench(out_dir, "SCP-Ridge", "--train-frac", "0.5") == 0
    report = Path(last_record(capsys)["report"])
    rows = [json.loads(line) for line in (report / "records.jsonl").read_text(encoding="utf-8").splitlines()]
    assert [(row["n_train"], row["n_test"]) for row in rows] == [(100, 100), (100, 100)]

    assert _bench(out_dir, "SCP-Ridge") == 0
    rows = [json.loads(line) for line in (report / "records.jsonl").read_text(encoding="utf-8").splitlines()]
    assert {row["n_train"] for row in rows} == {160}


def test_plotdata_reads_bench_reports(capsys, out_dir):
    assert _bench(out_dir, "SCP-Ridge") == 0
    assert _bench(out_dir, "SCP-Ridge-Local") == 0
    capsys.readouterr()
    reports = [str(Path(out_dir) / "gaussian" / name) for name in ("SCP-Ridge", "SCP-Ridge-Local")]
    assert main(["plotdata", *reports, "--out", out_dir]) == 0
    frame = pd.read_csv(last_record(capsys)["plot_data"])
    assert set(frame["algorithm"]) == {"SCP-Ridge", "SCP-Ridge-Local"}
    assert frame["normalized_length"].max() == 1.0


def test_configuration_errors_exit_with_2(capsys, out_dir):
    assert main(["bench", "--synthetic", "gaussian", "--alpha", "1.5", "--out", out_dir]) == 2
    record = last_record(capsys)
    assert record["error"] == "ConfigError"
    assert "alpha" in record["message"]

    assert main(["bench", "--out", out_dir]) == 2
    assert "No dataset configured" in last_record(capsys)["message"]


def test_missing_backend_exits_with_2(capsys, out_dir, monkeypatch):
    monkeypatch.setattr("autocp.utils.backend_utils.find_spec", lambda name: None)
    assert _bench(out_dir, "SCP-NN") == 2
    record = last_record(capsys)
    assert record["error"] == "ConfigError"
    assert "pip install autocp[mlp]" in record["message"]


def test_runtime_failures_exit_with_1(capsys, tmp_path):
    assert main(["bench", "--data", str(tmp_path / "absent.csv"), "--out", str(tmp_path)]) == 1
    record = last_record(capsys)
    assert record["error"] == "DatasetError"
    assert "not found" in record["message"]


def test_cate_writes_the_effect_report(capsys, out_dir):
    code = main(
        ["cate", "--synthetic", "two_arm", "--n-samples", "600", "--alpha", "0.2", "--preset", "SCP-Ridge",
         "--y0", "y0", "--y1", "y1", "--out", out_dir]
    )
    assert code == 0
    record = last_record(capsys)
    report = json.loads(Path(record["report"]).read_text())
    assert report["component_alphas"] == [0.1, 0.1]
    assert record["cate_coverage"] == report["cate_coverage"]


def test_gain_writes_both_tables(capsys, tmp_path, out_dir):
    config = tmp_path / "gain.json"
    config.write_text(json.dumps(TINY_SEARCH))
    code = main(
        ["gain", "--config", str(config), "--synthetic", "gaussian", "--n-samples", "200", "--splits", "1",
         "--fixed-model", "ridge", "--out", out_dir]
    )
    assert code == 0
    record = last_record(capsys)
    assert set(record["lengths"]) == {"Model+Cal", "Estimator+Cal", "AutoCP"}
    assert Path(record["table"]).exists()
    assert (Path(out_dir) / "gaussian" / "source_of_gain_summary.csv").exists()
