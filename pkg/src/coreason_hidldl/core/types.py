# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

"""Pydantic field types for numpy arrays.

Arrays are copied on validation and marked read-only, so models holding them can be frozen.
They serialise to nested lists.
"""

from typing import Annotated, Any, List

import numpy as np
import numpy.typing as npt
from pydantic import PlainSerializer, PlainValidator


def _freeze(array: npt.NDArray[Any]) -> npt.NDArray[Any]:
    array.setflags(write=False)
    return array


def _to_float_matrix(value: Any) -> npt.NDArray[np.float64]:
    array = np.array(value, dtype=np.float64)
    if array.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got {array.ndim} dimension(s)")
    return _freeze(array)


def _to_float_vector(value: Any) -> npt.NDArray[np.float64]:
    array = np.array(value, dtype=np.float64)
    if array.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got {array.ndim} dimension(s)")
    return _freeze(array)


def _to_binary_matrix(value: Any) -> npt.NDArray[np.int8]:
    raw = np.array(value)
    if raw.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got {raw.ndim} dimension(s)")
    if not np.isin(raw, (0, 1)).all():
        raise ValueError("mask entries must be 0 or 1")
    return _freeze(raw.astype(np.int8))


def _to_list(array: npt.NDArray[Any]) -> List[Any]:
    return array.tolist()  # type: ignore[no-any-return]


FloatMatrix = Annotated[
    npt.NDArray[np.float64],
    PlainValidator(_to_float_matrix),
    PlainSerializer(_to_list, return_type=list),
]

FloatVector = Annotated[
    npt.NDArray[np.float64],
    PlainValidator(_to_float_vector),
    PlainSerializer(_to_list, return_type=list),
]

BinaryMatrix = Annotated[
    npt.NDArray[np.int8],
    PlainValidator(_to_binary_matrix),
    PlainSerializer(_to_list, return_type=list),
]
