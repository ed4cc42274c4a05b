"""
Metrics Service - confusion arithmetic, subgroup breakdowns, disparity,
demographic composition and cross-run aggregation.
"""
from collections import OrderedDict
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from app.core.exceptions import InsufficientDefinedCells, LengthMismatch
from app.models.dataset import LabeledDataset
from app.models.models import FULL_SUBGROUP, METRIC_NAMES
from app.schemas.experiment_schemas import GroupSpec
from app.schemas.report_schemas import (
    ConfusionCounts,
    DisparityRecord,
    GroupedMetricsReport,
    MetricCell,
    MetricSet,
    RunRecord,
)
from app.services.conditioning_service import group_masks


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den > 0 else None


# ---------------------------------------------------------------------------
# CONFUSION / METRIC SET
# ---------------------------------------------------------------------------

def confusion(y_true: Sequence[int], y_pred: Sequence[int]) -> ConfusionCounts:
    t = np.asarray(y_true).astype(np.int64).ravel()
    p = np.asarray(y_pred).astype(np.int64).ravel()
    if t.shape != p.shape:
        raise LengthMismatch(f"y_true has {t.size} labels but y_pred has {p.size}")
    return ConfusionCounts(
        tp=int(np.sum((t == 1) & (p == 1))),
        fp=int(np.sum((t != 1) & (p == 1))),
        fn=int(np.sum((t == 1) & (p != 1))),
        tn=int(np.sum((t != 1) & (p != 1))),
    )


def metric_set(c: ConfusionCounts) -> MetricSet:
    """Every ratio with a zero denominator is None."""
    return MetricSet(
        accuracy=_ratio(c.tp + c.tn, c.n),
        tpr=_ratio(c.tp, c.tp + c.fn),
        fpr=_ratio(c.fp, c.fp + c.tn),
        fnr=_ratio(c.fn, c.tp + c.fn),
        tnr=_ratio(c.tn, c.fp + c.tn),
        selection_rate=_ratio(c.tp + c.fp, c.n),
        positive_rate=_ratio(c.tp + c.fn, c.n),
    )


# ---------------------------------------------------------------------------
# SUBGROUPS
# ---------------------------------------------------------------------------

def subgroup_masks(dataset: LabeledDataset, specs: Iterable[GroupSpec]) -> Dict[str, np.ndarray]:
    """
    "Full", then per spec its marginals (one per column) and, for multi-column
    specs, its intersections. A subgroup reached by several specs appears once.
    """
    masks: Dict[str, np.ndarray] = OrderedDict()
    masks[FULL_SUBGROUP] = np.ones(len(dataset), dtype=bool)
    for spec in specs:
        parts = spec.marginals() if len(spec.protected_columns) > 1 else []
        for sub in parts + [spec]:
            for gid, mask in group_masks(dataset, sub).items():
                masks.setdefault(sub.group_name(gid), mask)
    return masks


def spec_subgroups(spec: GroupSpec) -> List[str]:
    """The subgroups disparity is measured over: the spec's own group ids."""
    return [spec.group_name(gid) for gid in spec.group_ids()]


def group_breakdown(
    test: LabeledDataset, preds: Sequence[int], specs: Iterable[GroupSpec]
) -> Dict[str, MetricSet]:
    preds = np.asarray(preds)
    if preds.shape[0] != len(test):
        raise LengthMismatch(f"{preds.shape[0]} predictions for {len(test)} test rows")
    return {
        name: metric_set(confusion(test.labels[mask], preds[mask]))
        for name, mask in subgroup_masks(test, specs).items()
    }


# ---------------------------------------------------------------------------
# DISPARITY
# ---------------------------------------------------------------------------

def disparity_of_values(values: Iterable[Optional[float]], label: str) -> Dict[str, float]:
    defined = [v for v in values if v is not None]
    if len(defined) < 2:
        raise InsufficientDefinedCells(
            f"Disparity of {label} needs at least two defined subgroups, got {len(defined)}"
        )
    high, low = max(defined), min(defined)
    return {
        "max_abs_difference": high - low,
        "ratio_min_over_max": low / high if high > 0 else 1.0,
    }


def disparity(report: Dict[str, MetricSet], metric: str, spec: GroupSpec) -> Dict[str, float]:
    """Max difference and min/max ratio over the spec's subgroups, ignoring undefined cells."""
    values = [report[name].get(metric) for name in spec_subgroups(spec) if name in report]
    return disparity_of_values(values, f"{metric} over {spec.name}")


def disparity_table(
    grouped: GroupedMetricsReport, specs: Sequence[GroupSpec]
) -> List[DisparityRecord]:
    """Disparity of the cross-run means for every (model, spec, metric)."""
    means = {(c.model, c.subgroup, c.metric): c.mean for c in grouped.cells}
    records = []
    for model in grouped.models:
        for spec in specs:
            for metric in grouped.metrics:
                values = [means.get((model, s, metric)) for s in spec_subgroups(spec)]
                try:
                    d = disparity_of_values(values, metric)
                except InsufficientDefinedCells:
                    d = {}
                records.append(
                    DisparityRecord(model=model, spec=spec.name, metric=metric, **d)
                )
    return records


# ---------------------------------------------------------------------------
# COMPOSITION
# ---------------------------------------------------------------------------

def demographic_composition(
    dataset: LabeledDataset, specs: Iterable[GroupSpec]
) -> Dict[str, float]:
    """Subgroup proportions over the given rows; "Full" is omitted."""
    n = len(dataset)
    return {
        name: (float(mask.sum()) / n if n else 0.0)
        for name, mask in subgroup_masks(dataset, specs).items()
        if name != FULL_SUBGROUP
    }


# ---------------------------------------------------------------------------
# AGGREGATION
# ---------------------------------------------------------------------------

def mean_and_std(values: Sequence[Optional[float]]) -> tuple[Optional[float], Optional[float], int]:
    """Mean and sample std (ddof=1) over the defined values, plus their count."""
    defined = np.array([v for v in values if v is not None], dtype=float)
    if defined.size == 0:
        return None, None, 0
    mean = float(defined.mean())
    std = float(defined.std(ddof=1)) if defined.size >= 2 else None
    return mean, std, int(defined.size)


def aggregate(
    records: Sequence[RunRecord], runs: int, models: Sequence[str], subgroups: Sequence[str]
) -> GroupedMetricsReport:
    """Reduce the per-run log keyed by (model, subgroup, metric) in roster order."""
    values: Dict[tuple, List[Optional[float]]] = {}
    for r in sorted(records, key=lambda r: r.run):
        values.setdefault((r.model, r.subgroup, r.metric), []).append(r.value)

    cells = []
    for model in models:
        for subgroup in subgroups:
            for metric in METRIC_NAMES:
                mean, std, defined = mean_and_std(values.get((model, subgroup, metric), []))
                cells.append(
                    MetricCell(
                        model=model,
                        subgroup=subgroup,
                        metric=metric,
                        mean=mean,
                        std=std,
                        defined_runs=defined,
                        runs=runs,
                    )
                )
    return GroupedMetricsReport(
        runs=runs, models=list(models), subgroups=list(subgroups), cells=cells
    )
