# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

from pathlib import Path

import numpy as np
import pytest

from coreason_hidldl.core.errors import DataValidationError, HidLDLError, SolverDivergenceError, TrialError
from coreason_hidldl.utils.context import TrialContext
from coreason_hidldl.utils.io import canonical_json, read_matrix, sha256_hex, write_matrix


def test_read_matrix_accepts_crlf_and_blank_lines(tmp_path: Path) -> None:
    path = tmp_path / "m.csv"
    path.write_bytes(b"1,2\r\n\r\n3,4\r\n")

    np.testing.assert_array_equal(read_matrix(path), [[1.0, 2.0], [3.0, 4.0]])


def test_read_matrix_single_column_stays_2d(tmp_path: Path) -> None:
    path = tmp_path / "col.csv"
    path.write_text("1\n2\n3\n", encoding="utf-8")

    assert read_matrix(path).shape == (3, 1)


@pytest.mark.parametrize(  # type: ignore
    "text, message",
    [("1,2\n3\n", "number of columns changed"), ("1,x\n", "could not convert"), ("\n\n", "empty table")],
)
def test_read_matrix_rejects_malformed_tables(tmp_path: Path, text: str, message: str) -> None:
    path = tmp_path / "bad.csv"
    path.write_text(text, encoding="utf-8")

    with pytest.raises(DataValidationError, match=message):
        read_matrix(path)


def test_write_matrix_is_exact(tmp_path: Path) -> None:
    values = np.array([[0.1, 1 / 3], [2 / 7, 1e-17]])

    write_matrix(tmp_path / "nested" / "m.csv", values)
    write_matrix(tmp_path / "mask.csv", [[1, 0]], integer=True)

    np.testing.assert_array_equal(read_matrix(tmp_path / "nested" / "m.csv"), values)
    assert (tmp_path / "mask.csv").read_text(encoding="utf-8") == "1,0\n"


def test_canonical_json_and_hash() -> None:
    assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'
    assert sha256_hex("abc") == sha256_hex(b"abc")
    assert sha256_hex("abc").startswith("ba7816bf")


def test_error_hierarchy() -> None:
    diverged = SolverDivergenceError("non-finite D", iteration=3)
    assert diverged.iteration == 3
    assert "(iteration 3)" in str(diverged)
    assert isinstance(diverged, HidLDLError)
    assert isinstance(DataValidationError("x"), ValueError)


def test_trial_error_and_context() -> None:
    ctx = TrialContext(dataset="scene", missing_rate=0.5, repeat=2, seed=7)

    error = TrialError("boom", ctx.coordinates(variant="full"))

    assert ctx.trial_id == "scene/w0.50/r2"
    assert error.coordinates == {"dataset": "scene", "missing_rate": 0.5, "repeat": 2, "seed": 7, "variant": "full"}
    assert "variant=full" in str(error)
