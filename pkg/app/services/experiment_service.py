"""
Experiment Service - the repeated-split protocol: tuning, per-run training of
every scheme on a shared split, subgroup evaluation and aggregation.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import (
    EmptyTargetGroup,
    InvalidParameters,
    TooFewSamples,
    UnseenGroup,
)
from app.core.logging_config import banner, logger
from app.core.progress_tracker import progress_tracker
from app.models.dataset import LabeledDataset
from app.models.models import FULL_SUBGROUP, METRIC_NAMES
from app.schemas.dataset_schemas import SplitConfig
from app.schemas.experiment_schemas import ExperimentConfig, GroupSpec, TrainingScheme
from app.schemas.learner_schemas import LearnerConfig
from app.schemas.report_schemas import (
    CompositionRow,
    DisparityRecord,
    GroupedMetricsReport,
    MetricSet,
    RunInfo,
    RunRecord,
)
from app.services import dataset_service
from app.services.conditioning_service import (
    enumerate_models,
    fit_clusters,
    predict_routed,
    train_scheme,
)
from app.services.learners import fit
from app.services.metrics_service import (
    aggregate,
    demographic_composition,
    disparity_table,
    group_breakdown,
    subgroup_masks,
)

# A scheme that cannot be trained on a run's split yields undefined cells
SCHEME_FAILURES = (EmptyTargetGroup, TooFewSamples, UnseenGroup)


@dataclass(frozen=True)
class ExperimentOutcome:
    config: ExperimentConfig
    report: GroupedMetricsReport
    run_log: List[RunRecord]
    runs: List[RunInfo]
    tuned_learner: LearnerConfig
    composition: List[CompositionRow]
    disparity: List[DisparityRecord]
    bayes_accuracy: Optional[Dict[str, float]] = None


class ExperimentService:
    """Runs an ExperimentConfig end to end."""

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers or settings.WORKERS

    # ------------------------------------------------------------------
    # DATA
    # ------------------------------------------------------------------
    def load_dataset(
        self, cfg: ExperimentConfig
    ) -> Tuple[LabeledDataset, Optional[Dict[str, float]]]:
        if cfg.data.synthetic is not None:
            synthetic = dataset_service.synth_ciid(cfg.data.synthetic)
            return synthetic.dataset, synthetic.bayes_accuracy
        return dataset_service.load_csv(cfg.resolve_csv(), cfg.schema_for_data()), None

    def roster(self, cfg: ExperimentConfig) -> List[TrainingScheme]:
        roster = enumerate_models(cfg.group_specs(), cfg.cluster_k)
        if cfg.roster is None:
            return roster
        by_name = {s.name: s for s in roster}
        unknown = [name for name in cfg.roster if name not in by_name]
        if unknown:
            raise InvalidParameters(
                f"Roster names {unknown} are not available; choose from {list(by_name)}"
            )
        return [by_name[name] for name in cfg.roster]

    @staticmethod
    def run_seed(cfg: ExperimentConfig, run: int) -> int:
        return cfg.base_seed + run

    @staticmethod
    def split_for_run(
        cfg: ExperimentConfig, dataset: LabeledDataset, run: int
    ) -> dataset_service.DatasetSplit:
        split_cfg = SplitConfig(
            train=cfg.split.train,
            test=cfg.split.test,
            validation=cfg.split.validation,
            seed=ExperimentService.run_seed(cfg, run),
        )
        return dataset_service.impute_missing(dataset_service.split(dataset, split_cfg))

    # ------------------------------------------------------------------
    # GRID SEARCH
    # ------------------------------------------------------------------
    def grid_search(
        self,
        train: LabeledDataset,
        validation: LabeledDataset,
        grid: Sequence[LearnerConfig],
        seed: int = 0,
    ) -> LearnerConfig:
        """Best validation accuracy of a single model on all features; ties keep grid order."""
        if not grid:
            raise InvalidParameters("grid_search needs a non-empty grid")

        X_train = train.feature_matrix(include_protected=True)
        X_val = validation.feature_matrix(include_protected=True)
        best, best_acc = grid[0], -1.0
        for config in grid:
            model = fit(config, X_train, train.labels, seed=seed)
            preds = model.predict(X_val)
            acc = float(np.mean(preds == validation.labels)) if len(validation) else 0.0
            logger.info(
                f"Grid candidate : config={config.model_dump()} , validation_accuracy={acc:.4f}"
            )
            if acc > best_acc:
                best, best_acc = config, acc
        logger.info(f"Grid search selected : config={best.model_dump()} , accuracy={best_acc:.4f}")
        return best

    # ------------------------------------------------------------------
    # ONE RUN
    # ------------------------------------------------------------------
    def _run_once(
        self,
        job_id: str,
        cfg: ExperimentConfig,
        dataset: LabeledDataset,
        run: int,
        roster: Sequence[TrainingScheme],
        learner: LearnerConfig,
        specs: Sequence[GroupSpec],
        subgroups: Sequence[str],
    ) -> Tuple[List[RunRecord], RunInfo]:
        seed = self.run_seed(cfg, run)
        data = self.split_for_run(cfg, dataset, run)

        records: List[RunRecord] = []
        failed: List[str] = []
        for scheme in roster:
            try:
                model = train_scheme(data.train, scheme, learner, seed)
                breakdown = group_breakdown(data.test, predict_routed(model, data.test), specs)
            except SCHEME_FAILURES as exc:
                logger.warning(f"Scheme skipped : run={run} , scheme={scheme.name} , reason={exc}")
                failed.append(scheme.name)
                breakdown = {}
            progress_tracker.record_run(job_id, scheme.name, failed=scheme.name in failed)

            for subgroup in subgroups:
                metrics = breakdown.get(subgroup, MetricSet.undefined())
                records.extend(
                    RunRecord(
                        run=run,
                        model=scheme.name,
                        subgroup=subgroup,
                        metric=metric,
                        value=metrics.get(metric),
                    )
                    for metric in METRIC_NAMES
                )

        train_size, test_size, validation_size = data.sizes
        info = RunInfo(
            run=run,
            seed=seed,
            train_size=train_size,
            test_size=test_size,
            validation_size=validation_size,
            test_fingerprint=data.test_fingerprint,
            failed_schemes=failed,
        )
        logger.info(
            f"Run finished : run={run} , seed={seed} , failed_schemes={len(failed)} , "
            f"progress={progress_tracker.snapshot(job_id)['overall_progress']}%"
        )
        return records, info

    # ------------------------------------------------------------------
    # COMPOSITION
    # ------------------------------------------------------------------
    def composition(
        self,
        cfg: ExperimentConfig,
        dataset: LabeledDataset,
        first_train: LabeledDataset,
        specs: Sequence[GroupSpec],
    ) -> List[CompositionRow]:
        """Whole-dataset row, then one row per cluster of the first run's training split."""
        rows = [
            CompositionRow(
                subset=FULL_SUBGROUP,
                size=len(dataset),
                proportions=demographic_composition(dataset, specs),
            )
        ]
        prefix = len(cfg.cluster_k) > 1
        for k in cfg.cluster_k:
            if len(first_train) < k:
                continue
            kmeans, _, _ = fit_clusters(first_train, k, self.run_seed(cfg, 1))
            for cid in range(k):
                members = first_train.subset(np.flatnonzero(kmeans.labels == cid))
                rows.append(
                    CompositionRow(
                        subset=f"k{k}_Group{cid + 1}" if prefix else f"Group{cid + 1}",
                        size=len(members),
                        proportions=demographic_composition(members, specs),
                    )
                )
        return rows

    # ------------------------------------------------------------------
    # RUN EXPERIMENT
    # ------------------------------------------------------------------
    def run_experiment(self, cfg: ExperimentConfig) -> ExperimentOutcome:
        logger.info(banner("experiment"))
        logger.info(
            f"Running experiment : name={cfg.name} , runs={cfg.runs} , base_seed={cfg.base_seed} , "
            f"specs={cfg.specs} , cluster_k={cfg.cluster_k}"
        )

        dataset, bayes = self.load_dataset(cfg)
        specs = cfg.group_specs()
        roster = self.roster(cfg)
        subgroups = list(subgroup_masks(dataset, specs))

        first = self.split_for_run(cfg, dataset, 1)
        if cfg.grid:
            learner = self.grid_search(
                first.train, first.validation, cfg.grid, self.run_seed(cfg, 1)
            )
        else:
            learner = cfg.learner

        job_id = cfg.name
        progress_tracker.start(job_id, [s.name for s in roster], cfg.runs)
        try:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                futures = {
                    run: pool.submit(
                        self._run_once, job_id, cfg, dataset, run, roster, learner, specs, subgroups
                    )
                    for run in range(1, cfg.runs + 1)
                }
                results = {run: future.result() for run, future in futures.items()}
            progress_tracker.finish(job_id)
        finally:
            snapshot = progress_tracker.snapshot(job_id)
            progress_tracker.clear(job_id)

        run_log: List[RunRecord] = []
        infos: List[RunInfo] = []
        for run in sorted(results):
            records, info = results[run]
            run_log.extend(records)
            infos.append(info)

        report = aggregate(run_log, cfg.runs, [s.name for s in roster], subgroups)
        outcome = ExperimentOutcome(
            config=cfg,
            report=report,
            run_log=run_log,
            runs=infos,
            tuned_learner=learner,
            composition=self.composition(cfg, dataset, first.train, specs),
            disparity=disparity_table(report, specs),
            bayes_accuracy=bayes,
        )
        failed_schemes = [s["scheme"] for s in snapshot["schemes"] if s["failed_runs"]]
        logger.info(
            f"Experiment finished : name={cfg.name} , models={len(roster)} , "
            f"subgroups={len(subgroups)} , records={len(run_log)} , "
            f"schemes_with_failures={failed_schemes}"
        )
        return outcome
