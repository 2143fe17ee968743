# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

"""Command-line interface: ``hidldl <subcommand> ...``.

Machine-readable results (JSON or CSV) go to stdout or to the requested files; log
records go to stderr and the log file only.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, NoReturn, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from coreason_hidldl.core.controller import run_experiment
from coreason_hidldl.core.dataset import (
    HiddenView,
    generate_mask,
    hide,
    load_dataset,
    load_hidden_view,
    save_hidden_view,
    zscore,
)
from coreason_hidldl.core.errors import HidLDLError
from coreason_hidldl.core.manifest import ExperimentConfig
from coreason_hidldl.engine.solver import SolverConfig, solve, write_trace_csv
from coreason_hidldl.engine.topology import build_graph, default_k, save_graph
from coreason_hidldl.evaluation.metrics import METRICS, evaluate
from coreason_hidldl.evaluation.significance import compare_scores
from coreason_hidldl.experiments.report import write_tables
from coreason_hidldl.strategies.maxent import MaxEntModel, fit, predict
from coreason_hidldl.utils.io import read_matrix, write_matrix
from coreason_hidldl.utils.logger import configure_logging, logger

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


class UsageError(Exception):
    """Raised for malformed command lines."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _emit_json(payload: Any) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _emit_text(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _features(path: Path, standardise: bool) -> np.ndarray:
    features = read_matrix(path)
    return zscore(features) if standardise else features


def _cmd_hide(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.features, args.labels)
    mask = generate_mask(dataset.labels, args.missing_rate, args.seed)
    view = hide(dataset.labels, mask)
    save_hidden_view(view, args.out)
    _emit_json(
        {
            "directory": str(args.out),
            "hidden_fraction": mask.hidden_fraction,
            "mask_hash": mask.fingerprint(),
            "repaired_rows": list(mask.repaired_rows),
        }
    )
    return EXIT_OK


def _cmd_graph(args: argparse.Namespace) -> int:
    features = _features(args.features, args.zscore)
    k = args.k
    if k is None:
        if args.labels is None:
            raise UsageError("graph: give --k or --labels to derive the default neighbour count")
        k = default_k(features.shape[0], read_matrix(args.labels).shape[1])
    graph = build_graph(features, k, args.sigma)
    save_graph(graph, args.out)
    _emit_json({"directory": str(args.out), "n": graph.n, "k": graph.k, "components": graph.n_components})
    return EXIT_OK


def _cmd_recover(args: argparse.Namespace) -> int:
    view: HiddenView = load_hidden_view(args.view)
    features = _features(args.features, args.zscore)
    k = args.k if args.k is not None else default_k(view.n, view.m)
    graph = build_graph(features, k, args.sigma)
    config = SolverConfig(
        alpha=args.alpha,
        rho=args.rho,
        max_iterations=args.max_iterations,
        residual_tolerance=args.tolerance,
        use_constraint=not args.no_constraint,
        seed=args.seed,
    )
    result = solve(view, graph, config)
    write_matrix(args.out, result.recovered)
    if args.trace is not None:
        write_trace_csv(result, args.trace)
    _emit_json(
        {
            "output": str(args.out),
            "converged": result.converged,
            "iterations": result.iterations_used,
            "final_residuals": list(result.final_residuals),
        }
    )
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    report = evaluate(read_matrix(args.recovered), read_matrix(args.truth))
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(report.to_json(), encoding="utf-8")
    _emit_text(report.to_json())
    return EXIT_OK


def _cmd_predict_fit(args: argparse.Namespace) -> int:
    features = _features(args.features, args.zscore)
    model = fit(features, read_matrix(args.targets), max_iters=args.max_iters, tolerance=args.tolerance)
    model.save(args.model)
    summary = {"iterations": model.iterations, "loss": model.final_loss, "converged": model.converged}
    _emit_json({"model": str(args.model), **summary})
    return EXIT_OK


def _cmd_predict_apply(args: argparse.Namespace) -> int:
    model = MaxEntModel.load(args.model)
    predictions = predict(model, _features(args.features, args.zscore))
    if args.out is not None:
        write_matrix(args.out, predictions)
    else:
        np.savetxt(sys.stdout, predictions, fmt="%.17g", delimiter=",", newline="\n")
    return EXIT_OK


def _cmd_ttest(args: argparse.Namespace) -> int:
    a = read_matrix(args.scores_a).ravel()
    b = read_matrix(args.scores_b).ravel()
    result = compare_scores(args.metric, a, b, args.level)
    _emit_text(result.model_dump_json(indent=2))
    return EXIT_OK


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None:
        config = ExperimentConfig.model_validate_json(args.config.read_text(encoding="utf-8"))
    else:
        config = ExperimentConfig()
    overrides: Dict[str, Any] = {}
    for flag, field in (("seed", "seed"), ("alpha", "alpha"), ("rho", "rho"), ("sigma", "sigma")):
        value = getattr(args, flag)
        if value is not None:
            overrides[field] = value
    if args.missing_rate:
        overrides["missing_rates"] = args.missing_rate
    if args.repeats is not None:
        overrides["repeats"] = args.repeats
    if args.mode is not None:
        overrides["mode"] = args.mode
    if args.zscore:
        overrides["zscore"] = True
    if not overrides:
        return config
    return ExperimentConfig.model_validate({**config.model_dump(), **overrides})


def _cmd_experiment(args: argparse.Namespace) -> int:
    config = _experiment_config(args)
    report = run_experiment(config)
    if args.output is not None:
        written = write_tables(report, args.output)
        _emit_json({"files": [str(path) for path in written], "config_hash": report.provenance.config_hash})
    else:
        _emit_text(report.to_json())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hidldl", description="Hidden-label distribution recovery and evaluation.")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hide", help="mask a dataset and write the hidden view")
    p.add_argument("features", type=Path)
    p.add_argument("labels", type=Path)
    p.add_argument("--missing-rate", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="directory for observed.csv and mask.csv")
    p.set_defaults(handler=_cmd_hide)

    p = sub.add_parser("graph", help="build the KNN similarity graph and dump A and G")
    p.add_argument("features", type=Path)
    p.add_argument("--labels", type=Path, help="label file used to derive the default k")
    p.add_argument("--k", type=int)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--zscore", action="store_true")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(handler=_cmd_graph)

    p = sub.add_parser("recover", help="recover complete distributions from a hidden view")
    p.add_argument("features", type=Path)
    p.add_argument("view", type=Path, help="directory written by 'hide'")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--trace", type=Path)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=2.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--k", type=int)
    p.add_argument("--max-iterations", type=int, default=100)
    p.add_argument("--tolerance", type=float, default=1e-3)
    p.add_argument("--no-constraint", action="store_true")
    p.add_argument("--zscore", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_recover)

    p = sub.add_parser("evaluate", help="score a matrix against the ground truth")
    p.add_argument("recovered", type=Path)
    p.add_argument("truth", type=Path)
    p.add_argument("--out", type=Path)
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser("predict", help="train or apply the MaxEnt learner")
    predict_sub = p.add_subparsers(dest="action", required=True)
    q = predict_sub.add_parser("fit")
    q.add_argument("features", type=Path)
    q.add_argument("targets", type=Path)
    q.add_argument("--model", type=Path, required=True)
    q.add_argument("--max-iters", type=int, default=500)
    q.add_argument("--tolerance", type=float, default=1e-6)
    q.add_argument("--zscore", action="store_true")
    q.set_defaults(handler=_cmd_predict_fit)
    q = predict_sub.add_parser("apply")
    q.add_argument("model", type=Path)
    q.add_argument("features", type=Path)
    q.add_argument("--out", type=Path)
    q.add_argument("--zscore", action="store_true")
    q.set_defaults(handler=_cmd_predict_apply)

    p = sub.add_parser("ttest", help="one-sided paired t-test between two score files")
    p.add_argument("scores_a", type=Path)
    p.add_argument("scores_b", type=Path)
    p.add_argument("--metric", choices=METRICS, default="canberra")
    p.add_argument("--level", type=float, default=0.05)
    p.set_defaults(handler=_cmd_ttest)

    p = sub.add_parser("experiment", help="run an experiment from a JSON config")
    p.add_argument("config", type=Path, nargs="?")
    p.add_argument("--output", type=Path, help="directory for report.json and CSV tables")
    p.add_argument(
        "--mode", choices=("recovery", "predictive", "ablation", "alpha_sweep", "missing_rate_sweep")
    )
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--missing-rate", type=float, action="append")
    p.add_argument("--repeats", type=int)
    p.add_argument("--zscore", action="store_true")
    p.set_defaults(handler=_cmd_experiment)

    return parser


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """Runs the CLI and returns the exit code (0 success, 1 usage error, 2 data or solve error)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.log_level != "INFO":
            configure_logging(args.log_level)
        handler: Callable[[argparse.Namespace], int] = args.handler
        return handler(args)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_USAGE
    except SystemExit as e:
        # --help exits through argparse
        return int(e.code or 0)
    except (HidLDLError, ValidationError, ValueError, OSError) as e:
        logger.error("Command failed", error=str(e))
        sys.stderr.write(f"error: {e}\n")
        return EXIT_FAILURE


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(cli_main(argv if argv is not None else sys.argv[1:]))
