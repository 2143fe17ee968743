# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

from datetime import datetime, timezone
from functools import partial
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import anyio
import numpy as np
import numpy.typing as npt

from coreason_hidldl import __version__
from coreason_hidldl.core.dataset import (
    Dataset,
    Mask,
    generate_mask,
    hide,
    load_dataset,
    split_indices,
    train_test_split,
    zscore,
)
from coreason_hidldl.core.errors import TrialError
from coreason_hidldl.core.interfaces import Recoverer, RecoveryOutcome
from coreason_hidldl.core.manifest import ExperimentConfig
from coreason_hidldl.engine.topology import SimilarityGraph, build_graph, default_k
from coreason_hidldl.evaluation.metrics import MetricReport, evaluate
from coreason_hidldl.events.protocol import TrialRecord
from coreason_hidldl.experiments.report import ExperimentReport, Provenance, ReportEntry, aggregate, compare
from coreason_hidldl.experiments.synthetic import generate_synthetic
from coreason_hidldl.strategies.maxent import fit, predict
from coreason_hidldl.strategies.variants import (
    GroundTruthRecoverer,
    ablation_recoverers,
    recovery_recoverers,
    sweep_recoverers,
)
from coreason_hidldl.utils.context import TrialContext
from coreason_hidldl.utils.logger import logger

TrialJob = Callable[[TrialContext], List[TrialRecord]]

SELECTION_METRIC = "canberra"


def load_source(config: ExperimentConfig) -> Dataset:
    """Loads or generates the configured dataset, standardising features when requested."""
    source = config.dataset
    if source.is_synthetic:
        dataset = generate_synthetic(source.synthetic_spec())
    else:
        assert source.features_path is not None and source.labels_path is not None
        dataset = load_dataset(source.features_path, source.labels_path, name=source.name)
    if source.name and dataset.name != source.name:
        dataset = Dataset(features=dataset.features, labels=dataset.labels, names=dataset.names, name=source.name)
    if config.zscore:
        dataset = Dataset(
            features=zscore(dataset.features), labels=dataset.labels, names=dataset.names, name=dataset.name
        )
    return dataset


def resolve_k(config: ExperimentConfig, dataset: Dataset) -> int:
    return config.k if config.k is not None else default_k(dataset.n, dataset.m)


def training_rows(config: ExperimentConfig, n: int) -> npt.NDArray[np.intp]:
    """Rows that fall in the training split of every predictive trial."""
    common = np.arange(n)
    for repeat in range(config.repeats):
        train_idx, _ = split_indices(n, config.train_fraction, config.trial_seed(repeat))
        common = np.intersect1d(common, train_idx)
    return common


def best_alpha(entries: Sequence[ReportEntry]) -> float:
    """The alpha with the lowest mean selection metric; ties go to the smaller alpha."""
    candidates = [e for e in entries if e.alpha is not None]
    if not candidates:
        raise ValueError("no alpha entries to select from")
    best = min(candidates, key=lambda e: (e.metrics[SELECTION_METRIC].mean, e.alpha))
    assert best.alpha is not None
    return best.alpha


def _trial_record(
    ctx: TrialContext,
    recoverer: Recoverer,
    mask: Mask,
    report: MetricReport,
    outcome: RecoveryOutcome,
    keep_trace: bool,
) -> TrialRecord:
    result = outcome.result
    return TrialRecord(
        dataset=ctx.dataset,
        missing_rate=ctx.missing_rate,
        repeat=ctx.repeat,
        seed=ctx.seed,
        variant=recoverer.name,
        alpha=recoverer.alpha,
        mask_hash=mask.fingerprint(),
        metric_means=report.means(),
        iterations=result.iterations_used if result else None,
        converged=result.converged if result else None,
        final_residuals=result.final_residuals if result else None,
        trace=list(result.trace) if result and keep_trace else None,
    )


def recovery_trial(
    dataset: Dataset,
    graph: SimilarityGraph,
    recoverers: Sequence[Recoverer],
    keep_trace: bool,
    ctx: TrialContext,
) -> List[TrialRecord]:
    """One mask, every variant recovers from it, each scored against the ground truth."""
    mask = generate_mask(dataset.labels, ctx.missing_rate, ctx.seed)
    hidden = hide(dataset.labels, mask)
    records = []
    for recoverer in recoverers:
        try:
            outcome = recoverer.recover(hidden, graph)
            report = evaluate(outcome.recovered, dataset.labels)
        except Exception as e:
            raise TrialError(f"{type(e).__name__}: {e}", ctx.coordinates(variant=recoverer.name)) from e
        records.append(_trial_record(ctx, recoverer, mask, report, outcome, keep_trace))
    return records


def predictive_trial(
    dataset: Dataset,
    config: ExperimentConfig,
    alpha: float,
    ctx: TrialContext,
) -> List[TrialRecord]:
    """Split, hide and recover the training part, train the learner per variant, score on the test part."""
    train, test = train_test_split(dataset, config.train_fraction, ctx.seed)
    mask = generate_mask(train.labels, ctx.missing_rate, ctx.seed)
    hidden = hide(train.labels, mask)
    graph = build_graph(train.features, resolve_k(config, train), config.sigma)
    recoverers: List[Recoverer] = [*recovery_recoverers(config, alpha), GroundTruthRecoverer(train.labels)]

    records = []
    for recoverer in recoverers:
        try:
            outcome = recoverer.recover(hidden, graph)
            model = fit(
                train.features,
                outcome.recovered,
                max_iters=config.predictor_max_iters,
                tolerance=config.predictor_tolerance,
                seed=ctx.seed,
            )
            report = evaluate(predict(model, test.features), test.labels)
        except Exception as e:
            raise TrialError(f"{type(e).__name__}: {e}", ctx.coordinates(variant=recoverer.name)) from e
        records.append(_trial_record(ctx, recoverer, mask, report, outcome, config.record_traces))
    return records


def _guarded(job: TrialJob, ctx: TrialContext) -> List[TrialRecord]:
    with logger.contextualize(trial=ctx.trial_id):
        try:
            records = job(ctx)
        except TrialError as e:
            logger.error("Trial failed", error=str(e))
            raise
        except Exception as e:
            logger.error("Trial failed", error=str(e))
            raise TrialError(f"{type(e).__name__}: {e}", ctx.coordinates()) from e
        logger.debug("Trial finished", variants=len(records))
        return records


def _first_leaf(group: BaseExceptionGroup[BaseException]) -> BaseException:
    first = group.exceptions[0]
    return _first_leaf(first) if isinstance(first, BaseExceptionGroup) else first


class ExperimentController:
    """Runs experiment protocols, one worker-thread job per (missing rate, repeat) trial.

    Trials are independent; their records are collected into a keyed map and sorted before
    the report is assembled, so results do not depend on scheduling.
    """

    def __init__(self, max_parallel_trials: int = 4) -> None:
        """Initializes the ExperimentController.

        Args:
            max_parallel_trials: Maximum number of trials running at once.

        Raises:
            ValueError: If max_parallel_trials < 1.
        """
        if max_parallel_trials < 1:
            raise ValueError(f"max_parallel_trials must be >= 1, got {max_parallel_trials}")
        self.max_parallel_trials = max_parallel_trials

    async def run(self, config: ExperimentConfig) -> ExperimentReport:
        """Dispatches on ``config.mode``."""
        runners = {
            "recovery": self.run_recovery,
            "predictive": self.run_predictive,
            "ablation": self.run_ablation,
            "alpha_sweep": self.run_alpha_sweep,
            "missing_rate_sweep": self.run_missing_rate_sweep,
        }
        return await runners[config.mode](config)

    async def run_recovery(self, config: ExperimentConfig) -> ExperimentReport:
        """Full method against the identity baseline on every configured missing rate."""
        return await self._recovery_report(config, "recovery")

    async def run_missing_rate_sweep(self, config: ExperimentConfig) -> ExperimentReport:
        """Like :meth:`run_recovery`; the report additionally yields per-rate curves."""
        return await self._recovery_report(config, "missing_rate_sweep")

    async def run_ablation(self, config: ExperimentConfig) -> ExperimentReport:
        """Full method and its ablations on shared masks."""
        dataset, graph = await self._prepare(config)
        alpha, selection = await self._resolve_alpha(config, dataset, graph)
        job = partial(recovery_trial, dataset, graph, ablation_recoverers(config, alpha), config.record_traces)
        trials = await self._run_trials(config, dataset.name, config.missing_rates, job)
        pairs = [("full", name) for name in config.ablations]
        return self._assemble(config, "ablation", trials, pairs, alpha if config.select_alpha else None, selection)

    async def run_alpha_sweep(self, config: ExperimentConfig) -> ExperimentReport:
        """One full-method run per grid value on shared masks."""
        dataset, graph = await self._prepare(config)
        trials = await self._sweep_trials(config, dataset, graph, config.missing_rates)
        first_rate = [t for t in trials if t.missing_rate == config.missing_rates[0]]
        return self._assemble(config, "alpha_sweep", trials, [], best_alpha(aggregate(first_rate)), [])

    async def run_predictive(self, config: ExperimentConfig) -> ExperimentReport:
        """Recover on the training split, train the learner per variant, score on the held-out split.

        Alpha selection only sees rows that no trial holds out.
        """
        dataset = await anyio.to_thread.run_sync(load_source, config)
        selected: Optional[float] = None
        selection: List[ReportEntry] = []
        alpha = config.alpha
        if config.select_alpha:
            rows = training_rows(config, dataset.n)
            if len(rows) < 2:
                raise ValueError(f"only {len(rows)} rows are in every training split; cannot select alpha")
            pool = dataset.subset(rows, "selection")
            graph = await anyio.to_thread.run_sync(build_graph, pool.features, resolve_k(config, pool), config.sigma)
            alpha, selection = await self._select(config, pool, graph)
            selected = alpha
        job = partial(predictive_trial, dataset, config, alpha)
        trials = await self._run_trials(config, dataset.name, config.missing_rates, job)
        return self._assemble(config, "predictive", trials, [("full", "identity")], selected, selection)

    async def select_alpha(self, config: ExperimentConfig) -> Tuple[float, List[ReportEntry]]:
        """Sweeps the grid at the first missing rate and picks the alpha with the lowest mean Canberra.

        Returns:
            Tuple: The selected alpha and the sweep entries it was chosen from.
        """
        dataset, graph = await self._prepare(config)
        return await self._select(config, dataset, graph)

    async def _recovery_report(self, config: ExperimentConfig, mode: str) -> ExperimentReport:
        dataset, graph = await self._prepare(config)
        alpha, selection = await self._resolve_alpha(config, dataset, graph)
        job = partial(recovery_trial, dataset, graph, recovery_recoverers(config, alpha), config.record_traces)
        trials = await self._run_trials(config, dataset.name, config.missing_rates, job)
        selected = alpha if config.select_alpha else None
        return self._assemble(config, mode, trials, [("full", "identity")], selected, selection)

    async def _prepare(self, config: ExperimentConfig) -> Tuple[Dataset, SimilarityGraph]:
        dataset = await anyio.to_thread.run_sync(load_source, config)
        k = resolve_k(config, dataset)
        graph = await anyio.to_thread.run_sync(build_graph, dataset.features, k, config.sigma)
        logger.info(
            "Experiment data ready",
            dataset=dataset.name,
            n=dataset.n,
            d=dataset.d,
            m=dataset.m,
            k=graph.k,
            components=graph.n_components,
        )
        return dataset, graph

    async def _resolve_alpha(
        self, config: ExperimentConfig, dataset: Dataset, graph: SimilarityGraph
    ) -> Tuple[float, List[ReportEntry]]:
        if not config.select_alpha:
            return config.alpha, []
        return await self._select(config, dataset, graph)

    async def _select(
        self, config: ExperimentConfig, dataset: Dataset, graph: SimilarityGraph
    ) -> Tuple[float, List[ReportEntry]]:
        rate = config.missing_rates[0]
        entries = aggregate(await self._sweep_trials(config, dataset, graph, [rate]))
        alpha = best_alpha(entries)
        logger.info("Selected alpha", alpha=alpha, metric=SELECTION_METRIC, missing_rate=rate)
        return alpha, entries

    async def _sweep_trials(
        self, config: ExperimentConfig, dataset: Dataset, graph: SimilarityGraph, rates: Sequence[float]
    ) -> List[TrialRecord]:
        job = partial(recovery_trial, dataset, graph, sweep_recoverers(config), config.record_traces)
        return await self._run_trials(config, dataset.name, rates, job)

    async def _run_trials(
        self, config: ExperimentConfig, dataset_name: str, rates: Sequence[float], job: TrialJob
    ) -> List[TrialRecord]:
        contexts = [
            TrialContext(dataset=dataset_name, missing_rate=rate, repeat=repeat, seed=config.trial_seed(repeat))
            for rate in dict.fromkeys(rates)
            for repeat in range(config.repeats)
        ]
        limiter = anyio.CapacityLimiter(self.max_parallel_trials)
        results: Dict[Tuple[float, int], List[TrialRecord]] = {}

        async def _run_one(ctx: TrialContext) -> None:
            results[(ctx.missing_rate, ctx.repeat)] = await anyio.to_thread.run_sync(
                _guarded, job, ctx, limiter=limiter
            )

        failure: Optional[BaseException] = None
        try:
            async with anyio.create_task_group() as tg:
                for ctx in contexts:
                    tg.start_soon(_run_one, ctx)
        except BaseExceptionGroup as group:
            failure = _first_leaf(group)
        if failure is not None:
            raise failure

        return sorted((record for key in sorted(results) for record in results[key]), key=TrialRecord.sort_key)

    def _assemble(
        self,
        config: ExperimentConfig,
        mode: str,
        trials: List[TrialRecord],
        pairs: Sequence[Tuple[str, str]],
        selected_alpha: Optional[float],
        selection: List[ReportEntry],
    ) -> ExperimentReport:
        provenance = Provenance(
            config_hash=config.config_hash(),
            base_seed=config.seed,
            trial_seeds=[config.trial_seed(r) for r in range(config.repeats)],
            package_version=__version__,
            created_at=datetime.now(timezone.utc).isoformat(),
        )
        report = ExperimentReport(
            mode=mode,
            config=config.model_dump(mode="json"),
            provenance=provenance,
            selected_alpha=selected_alpha,
            alpha_selection=selection,
            entries=aggregate(trials),
            comparisons=compare(trials, pairs, config.significance_level),
            trials=trials,
        )
        logger.info("Experiment finished", mode=mode, trials=len(trials), entries=len(report.entries))
        return report


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Synchronous facade over :class:`ExperimentController`."""
    controller = ExperimentController(max_parallel_trials=config.max_parallel_trials)
    return anyio.run(controller.run, config)
