# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

"""Headerless CSV matrix I/O and canonical JSON helpers."""

import hashlib
import json
import warnings
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from coreason_hidldl.core.errors import DataValidationError

Matrix = npt.NDArray[np.float64]


def read_matrix(path: str | Path) -> Matrix:
    """Reads a headerless, comma-separated numeric table.

    LF and CRLF line endings are accepted; blank lines are ignored.

    Args:
        path: The file to read.

    Returns:
        Matrix: A 2-D float64 array (a single row or column stays 2-D).

    Raises:
        FileNotFoundError: If the file does not exist.
        DataValidationError: If the table is ragged, empty or holds a non-numeric cell.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"No such file: {path}")

    with warnings.catch_warnings():
        # an empty file only warns; it is rejected below
        warnings.simplefilter("ignore", UserWarning)
        try:
            table = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64, encoding="utf-8")
        except ValueError as e:
            raise DataValidationError(f"{path}: {e}") from e

    if table.size == 0:
        raise DataValidationError(f"{path}: empty table")
    return table


def write_matrix(path: str | Path, matrix: npt.ArrayLike, integer: bool = False) -> None:
    """Writes a matrix as headerless CSV with LF line endings.

    Args:
        path: Destination file; parent directories are created.
        matrix: Anything convertible to a 2-D array.
        integer: Write cells as integers (used for masks).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    array = np.atleast_2d(np.asarray(matrix))
    fmt = "%d" if integer else "%.17g"
    np.savetxt(path, array, fmt=fmt, delimiter=",", newline="\n")


def canonical_json(payload: Any) -> str:
    """Compact, key-sorted JSON used for hashing."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def sha256_hex(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()
