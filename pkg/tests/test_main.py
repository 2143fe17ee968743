# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

import json
from pathlib import Path
from typing import Any, Callable, Dict, List

import numpy as np
import pytest

from coreason_hidldl.core.dataset import Dataset
from coreason_hidldl.main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, cli_main, main
from coreason_hidldl.utils.io import read_matrix, write_matrix

WriteCsv = Callable[[str, Any], Path]


@pytest.fixture  # type: ignore
def data_files(tmp_path: Path, small_dataset: Dataset) -> Dict[str, Path]:
    write_matrix(tmp_path / "x.csv", small_dataset.features)
    write_matrix(tmp_path / "y.csv", small_dataset.labels)
    return {"features": tmp_path / "x.csv", "labels": tmp_path / "y.csv"}


def _run(capsys: pytest.CaptureFixture[str], argv: List[str]) -> Any:
    assert cli_main(argv) == EXIT_OK
    return json.loads(capsys.readouterr().out)


def test_help_and_usage_errors(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli_main(["--help"]) == EXIT_OK
    assert cli_main([]) == EXIT_USAGE
    assert cli_main(["frobnicate"]) == EXIT_USAGE
    assert cli_main(["hide", "x.csv"]) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_hide_then_recover(tmp_path: Path, capsys: pytest.CaptureFixture[str], data_files: Dict[str, Path]) -> None:
    view_dir = tmp_path / "view"
    hidden = _run(capsys, ["hide", str(data_files["features"]), str(data_files["labels"]), "--out", str(view_dir)])

    assert hidden["hidden_fraction"] > 0.4
    assert len(hidden["mask_hash"]) == 64
    assert (view_dir / "observed.csv").exists() and (view_dir / "mask.csv").exists()

    out = tmp_path / "recovered.csv"
    trace = tmp_path / "trace.csv"
    recovered = _run(
        capsys,
        [
            "recover",
            str(data_files["features"]),
            str(view_dir),
            "--out",
            str(out),
            "--trace",
            str(trace),
            "--max-iterations",
            "20",
        ],
    )

    assert recovered["iterations"] <= 20
    np.testing.assert_allclose(read_matrix(out).sum(axis=1), 1.0, atol=1e-9)
    assert trace.read_text(encoding="utf-8").startswith("iteration,residual_da,residual_db,objective")


def test_graph_command(tmp_path: Path, capsys: pytest.CaptureFixture[str], data_files: Dict[str, Path]) -> None:
    summary = _run(
        capsys, ["graph", str(data_files["features"]), "--labels", str(data_files["labels"]), "--out", str(tmp_path)]
    )

    assert summary["k"] == 4
    assert read_matrix(tmp_path / "laplacian.csv").shape == (50, 50)
    assert cli_main(["graph", str(data_files["features"]), "--out", str(tmp_path)]) == EXIT_USAGE


def test_evaluate_truth_against_itself(
    tmp_path: Path, capsys: pytest.CaptureFixture[str], data_files: Dict[str, Path]
) -> None:
    labels = str(data_files["labels"])

    report = _run(capsys, ["evaluate", labels, labels, "--out", str(tmp_path / "metrics.json")])

    assert report["per_metric"]["canberra"]["mean"] == 0.0
    assert report["per_metric"]["intersection"]["mean"] == pytest.approx(1.0)
    assert (tmp_path / "metrics.json").exists()


def test_log_level_reconfigures_sinks(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str], data_files: Dict[str, Path]
) -> None:
    levels: List[str] = []
    monkeypatch.setattr("coreason_hidldl.main.configure_logging", levels.append)
    labels = str(data_files["labels"])

    _run(capsys, ["--log-level", "DEBUG", "evaluate", labels, labels])
    _run(capsys, ["evaluate", labels, labels])

    assert levels == ["DEBUG"]
    assert cli_main(["--log-level", "LOUD", "evaluate", labels, labels]) == EXIT_USAGE


def test_data_errors_exit_with_failure(
    capsys: pytest.CaptureFixture[str], write_csv: WriteCsv, data_files: Dict[str, Path]
) -> None:
    bad = write_csv("bad.csv", [[0.7, 0.2]])

    assert cli_main(["evaluate", str(bad), str(data_files["labels"])]) == EXIT_FAILURE
    assert cli_main(["evaluate", str(bad.parent / "missing.csv"), str(bad)]) == EXIT_FAILURE
    assert cli_main(["hide", str(data_files["features"]), str(bad), "--out", str(bad.parent)]) == EXIT_FAILURE
    assert "error:" in capsys.readouterr().err


def test_predict_fit_and_apply(
    tmp_path: Path, capsys: pytest.CaptureFixture[str], data_files: Dict[str, Path]
) -> None:
    model = tmp_path / "model.json"
    fitted = _run(
        capsys,
        ["predict", "fit", str(data_files["features"]), str(data_files["labels"]), "--model", str(model)],
    )
    assert fitted["iterations"] > 0

    assert cli_main(["predict", "apply", str(model), str(data_files["features"])]) == EXIT_OK
    rows = [line for line in capsys.readouterr().out.splitlines() if line]
    assert len(rows) == 50
    assert sum(float(x) for x in rows[0].split(",")) == pytest.approx(1.0)


def test_ttest_command(capsys: pytest.CaptureFixture[str], write_csv: WriteCsv) -> None:
    a = write_csv("a.csv", [[2.0], [1.8], [2.2], [1.9], [2.1]])
    b = write_csv("b.csv", [[3.0], [3.0], [3.0], [3.0], [3.0]])

    result = _run(capsys, ["ttest", str(a), str(b)])

    assert result["t_stat"] == pytest.approx(-14.142, abs=1e-3)
    assert result["significant"]


def test_experiment_reruns_match(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps(
            {
                "dataset": {"synthetic": {"n": 30, "d": 4, "m": 3, "seed": 1}},
                "repeats": 2,
                "max_iterations": 10,
            }
        ),
        encoding="utf-8",
    )
    reports = []
    for run in ("a", "b"):
        written = _run(
            capsys, ["experiment", str(config), "--output", str(tmp_path / run), "--missing-rate", "0.5", "--seed", "3"]
        )
        assert [Path(p).name for p in written["files"]] == ["report.json", "summary.csv"]
        payload = json.loads((tmp_path / run / "report.json").read_text(encoding="utf-8"))
        payload["provenance"].pop("created_at")
        reports.append(payload)

    assert reports[0] == reports[1]
    assert reports[0]["config"]["missing_rates"] == [0.5]
    assert reports[0]["provenance"]["trial_seeds"] == [3, 4]


def test_experiment_rejects_invalid_override(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli_main(["experiment", "--missing-rate", "1.5"]) == EXIT_FAILURE


def test_main_exits_with_code() -> None:
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == EXIT_USAGE
