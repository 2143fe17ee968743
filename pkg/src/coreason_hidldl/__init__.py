# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

"""
Recovery of complete label distributions from hidden-label (incomplete, renormalised) data.
"""

__version__ = "0.1.0"
__author__ = "Gowtham A Rao"
__email__ = "gowtham.rao@coreason.ai"

from .core.controller import ExperimentController, run_experiment
from .core.dataset import Dataset, HiddenView, Mask, generate_mask, hide, load_dataset
from .core.manifest import ExperimentConfig, SyntheticSpec
from .engine.solver import AdmmSolver, RecoveryResult, SolverConfig, solve
from .engine.topology import SimilarityGraph, build_graph
from .evaluation.metrics import MetricReport, evaluate
from .evaluation.significance import paired_ttest_one_sided
from .main import cli_main

__all__ = [
    "AdmmSolver",
    "Dataset",
    "ExperimentConfig",
    "ExperimentController",
    "HiddenView",
    "Mask",
    "MetricReport",
    "RecoveryResult",
    "SimilarityGraph",
    "SolverConfig",
    "SyntheticSpec",
    "build_graph",
    "cli_main",
    "evaluate",
    "generate_mask",
    "hide",
    "load_dataset",
    "paired_ttest_one_sided",
    "run_experiment",
    "solve",
]
