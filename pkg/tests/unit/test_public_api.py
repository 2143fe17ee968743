# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

import pytest


def test_public_api_imports() -> None:
    """
    Verify that the main components are exposed at the top level package.
    """
    try:
        from coreason_hidldl import ExperimentController, build_graph, solve
    except ImportError as e:
        pytest.fail(f"Failed to import public API: {e}")

    assert ExperimentController is not None
    assert build_graph is not None
    assert solve is not None


def test_version_and_exports() -> None:
    import coreason_hidldl

    assert coreason_hidldl.__version__ == "0.1.0"
    for name in coreason_hidldl.__all__:
        assert hasattr(coreason_hidldl, name), name
