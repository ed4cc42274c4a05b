"""
Report Generator - write an experiment's ReportBundle to disk
"""
import json
from pathlib import Path
from typing import Callable, Dict, List, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from app.core.config import settings  # noqa: E402
from app.core.logging_config import logger  # noqa: E402
from app.models.models import FULL_SUBGROUP  # noqa: E402
from app.schemas.report_schemas import MetricCell, ReportBundle  # noqa: E402
from app.services.experiment_service import ExperimentOutcome  # noqa: E402

# fixed salt and no date keep the SVG bytes reproducible
SVG_HASH_SALT = "ciid-lab"
BAR_GROUP_WIDTH = 0.8
OVERALL_METRICS = ("accuracy", "tpr", "selection_rate")


def build_bundle(outcome: ExperimentOutcome) -> ReportBundle:
    cfg = outcome.config
    return ReportBundle(
        tool=settings.APP_NAME,
        version=settings.APP_VERSION,
        experiment=cfg.name,
        config=cfg.model_dump(mode="json", by_alias=True),
        base_seed=cfg.base_seed,
        run_seeds=[info.seed for info in outcome.runs],
        tuned_learner=outcome.tuned_learner.model_dump(mode="json"),
        report=outcome.report,
        runs=outcome.runs,
        composition=outcome.composition,
        disparity=outcome.disparity,
        bayes_accuracy=outcome.bayes_accuracy,
        run_log=outcome.run_log,
    )


class ReportGenerator:
    """Writes report.json, the CSV tables and one SVG chart per metric plus overall.svg."""

    def __init__(self, output_dir: Optional[Path] = None):
        self.output_dir = Path(output_dir) if output_dir is not None else settings.output_path
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.undefined = settings.UNDEFINED_TOKEN

    def _write_frame(self, frame: pd.DataFrame, filename: str) -> Path:
        filepath = self.output_dir / filename
        frame.to_csv(filepath, index=False, na_rep=self.undefined, lineterminator="\n")
        logger.info(f"Generated {filename} : filepath={filepath} , rows={len(frame)}")
        return filepath

    # ------------------------------------------------------------------
    # JSON
    # ------------------------------------------------------------------
    def generate_report_json(self, bundle: ReportBundle) -> Path:
        filepath = self.output_dir / "report.json"
        with open(filepath, "w", encoding="utf-8") as f:
            json.dump(bundle.model_dump(mode="json"), f, indent=2)
        logger.info(f"Generated report JSON : filepath={filepath}")
        return filepath

    # ------------------------------------------------------------------
    # CSV
    # ------------------------------------------------------------------
    def generate_metrics_csv(self, bundle: ReportBundle) -> Path:
        """Long format, one row per (run, model, subgroup, metric)."""
        frame = pd.DataFrame(
            [r.model_dump() for r in bundle.run_log],
            columns=["run", "model", "subgroup", "metric", "value"],
        )
        return self._write_frame(frame, "metrics.csv")

    def generate_summary_csv(self, bundle: ReportBundle) -> Path:
        frame = pd.DataFrame(
            [c.model_dump() for c in bundle.report.cells],
            columns=["model", "subgroup", "metric", "mean", "std", "defined_runs", "runs"],
        )
        return self._write_frame(frame, "summary.csv")

    def generate_composition_csv(self, bundle: ReportBundle) -> Path:
        rows: List[Dict[str, object]] = [
            {"subset": row.subset, "size": row.size, **row.proportions}
            for row in bundle.composition
        ]
        return self._write_frame(pd.DataFrame(rows), "composition.csv")

    def generate_disparity_csv(self, bundle: ReportBundle) -> Path:
        frame = pd.DataFrame(
            [d.model_dump() for d in bundle.disparity],
            columns=["model", "spec", "metric", "max_abs_difference", "ratio_min_over_max"],
        )
        return self._write_frame(frame, "disparity.csv")

    # ------------------------------------------------------------------
    # SVG
    # ------------------------------------------------------------------
    def _grouped_bar_svg(
        self,
        bundle: ReportBundle,
        categories: List[str],
        cells: Callable[[str, str], MetricCell],
        ylabel: str,
        title: str,
        filename: str,
    ) -> Path:
        models = bundle.report.models
        x = np.arange(len(categories))
        width = BAR_GROUP_WIDTH / max(len(models), 1)
        colours = plt.get_cmap("tab20")

        with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "path"}):
            fig, ax = plt.subplots(figsize=(max(8.0, 1.2 * len(categories)), 5.0))
            for i, model in enumerate(models):
                row = [cells(model, c) for c in categories]
                means = [np.nan if c.mean is None else c.mean for c in row]
                errors = [0.0 if c.std is None else c.std for c in row]
                offset = (i - (len(models) - 1) / 2) * width
                ax.bar(
                    x + offset,
                    means,
                    width,
                    yerr=errors,
                    capsize=2,
                    label=model,
                    color=colours(i % colours.N),
                )
            ax.set_xticks(x)
            ax.set_xticklabels(categories, rotation=30, ha="right")
            ax.set_ylabel(f"{ylabel} (mean, error bars = std over {bundle.report.runs} runs)")
            ax.set_title(title)
            ax.legend(fontsize="small", ncol=2, loc="upper left", bbox_to_anchor=(1.0, 1.0))
            fig.tight_layout()

            filepath = self.output_dir / filename
            fig.savefig(filepath, format="svg", metadata={"Date": None})
            plt.close(fig)

        logger.info(f"Generated SVG : filepath={filepath}")
        return filepath

    def generate_metric_svg(self, bundle: ReportBundle, metric: str) -> Path:
        """Subgroups on x, one bar per model."""
        report = bundle.report
        return self._grouped_bar_svg(
            bundle,
            report.subgroups,
            lambda model, subgroup: report.cell(model, subgroup, metric),
            metric,
            f"{bundle.experiment} : {metric}",
            f"{metric}.svg",
        )

    def generate_overall_svg(self, bundle: ReportBundle) -> Path:
        """Headline metrics on the whole test set, one bar per model."""
        report = bundle.report
        metrics = [m for m in OVERALL_METRICS if m in report.metrics]
        return self._grouped_bar_svg(
            bundle,
            metrics,
            lambda model, metric: report.cell(model, FULL_SUBGROUP, metric),
            "value",
            f"{bundle.experiment} : {FULL_SUBGROUP} test set",
            "overall.svg",
        )

    # ------------------------------------------------------------------
    # BUNDLE
    # ------------------------------------------------------------------
    def write_bundle(self, outcome: ExperimentOutcome) -> Dict[str, Path]:
        bundle = build_bundle(outcome)
        written = {
            "report.json": self.generate_report_json(bundle),
            "metrics.csv": self.generate_metrics_csv(bundle),
            "summary.csv": self.generate_summary_csv(bundle),
            "composition.csv": self.generate_composition_csv(bundle),
            "disparity.csv": self.generate_disparity_csv(bundle),
        }
        for metric in bundle.report.metrics:
            written[f"{metric}.svg"] = self.generate_metric_svg(bundle, metric)
        written["overall.svg"] = self.generate_overall_svg(bundle)
        logger.info(f"Report bundle written : output_dir={self.output_dir} , files={len(written)}")
        return written
