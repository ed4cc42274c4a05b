import json

import pandas as pd
import pytest

from app.models.models import METRIC_NAMES
from app.services.experiment_service import ExperimentService
from app.services.report_generator import ReportGenerator, build_bundle

TABLES = ["report.json", "metrics.csv", "summary.csv", "composition.csv", "disparity.csv"]


@pytest.fixture
def small_experiment(synthetic_experiment):
    return synthetic_experiment.model_copy(update={"runs": 3, "cluster_k": [2]})


def test_bundle_files_are_written(tmp_path, small_experiment):
    outcome = ExperimentService().run_experiment(small_experiment)
    written = ReportGenerator(tmp_path / "bundle").write_bundle(outcome)

    assert list(written) == TABLES + [f"{m}.svg" for m in METRIC_NAMES] + ["overall.svg"]
    for path in written.values():
        assert path.exists() and path.stat().st_size > 0
    assert written["accuracy.svg"].read_text(encoding="utf-8").lstrip().startswith("<?xml")


def test_metrics_csv_is_the_run_log(tmp_path, small_experiment):
    outcome = ExperimentService().run_experiment(small_experiment)
    written = ReportGenerator(tmp_path).write_bundle(outcome)

    metrics = pd.read_csv(written["metrics.csv"])
    assert list(metrics.columns) == ["run", "model", "subgroup", "metric", "value"]
    assert len(metrics) == len(outcome.run_log)

    summary = pd.read_csv(written["summary.csv"])
    assert len(summary) == len(outcome.report.cells)
    # every plotted mean is re-derivable from the long log
    rows = metrics[(metrics.model == "overall") & (metrics.subgroup == "Full")]
    accuracy = rows[rows.metric == "accuracy"].value.astype(float).mean()
    assert accuracy == pytest.approx(outcome.report.cell("overall", "Full", "accuracy").mean)


def test_report_json_carries_seeds_and_config(tmp_path, small_experiment):
    outcome = ExperimentService().run_experiment(small_experiment)
    written = ReportGenerator(tmp_path).write_bundle(outcome)

    report = json.loads(written["report.json"].read_text(encoding="utf-8"))
    assert report["tool"] == "ciid-lab"
    assert report["run_seeds"] == [1, 2, 3]
    assert report["config"]["name"] == small_experiment.name
    assert report["report"]["error_bars"] == "std"
    assert [row["subset"] for row in report["composition"]] == ["Full", "Group1", "Group2"]
    assert set(report["bayes_accuracy"]) == {"priv", "dis"}


def test_undefined_cells_use_token(tmp_path, constant_feature_config):
    cfg = constant_feature_config(["a"], specs=[["g"]], runs=2)
    outcome = ExperimentService().run_experiment(cfg)
    written = ReportGenerator(tmp_path / "out").write_bundle(outcome)

    text = written["metrics.csv"].read_text(encoding="utf-8")
    assert "g_dis,Full,accuracy,undefined" in text
    summary = written["summary.csv"].read_text(encoding="utf-8")
    assert "g_dis,Full,accuracy,undefined,undefined,0,2" in summary


def test_rerun_is_byte_identical(tmp_path, small_experiment):
    first = ReportGenerator(tmp_path / "a").write_bundle(
        ExperimentService(workers=1).run_experiment(small_experiment)
    )
    second = ReportGenerator(tmp_path / "b").write_bundle(
        ExperimentService(workers=3).run_experiment(small_experiment)
    )
    for name in first:
        assert first[name].read_bytes() == second[name].read_bytes(), name


def test_bundle_records_tuned_learner(small_experiment):
    outcome = ExperimentService().run_experiment(small_experiment)
    bundle = build_bundle(outcome)
    assert bundle.tuned_learner["kind"] == "logistic_regression"
    assert bundle.base_seed == 0
    assert len(bundle.runs) == 3


def test_overall_chart_plots_headline_metrics_on_the_full_test_set(
    tmp_path, small_experiment, monkeypatch
):
    bundle = build_bundle(ExperimentService().run_experiment(small_experiment))
    generator = ReportGenerator(tmp_path)
    captured = {}

    def capture(bundle, categories, cells, ylabel, title, filename):
        captured.update(categories=categories, cells=cells, filename=filename)
        return tmp_path / filename

    monkeypatch.setattr(generator, "_grouped_bar_svg", capture)
    generator.generate_overall_svg(bundle)

    assert captured["categories"] == ["accuracy", "tpr", "selection_rate"]
    assert captured["filename"] == "overall.svg"
    for model in bundle.report.models:
        for metric in captured["categories"]:
            assert captured["cells"](model, metric) == bundle.report.cell(model, "Full", metric)


def test_overall_chart_differs_from_per_metric_charts(tmp_path, small_experiment):
    written = ReportGenerator(tmp_path).write_bundle(
        ExperimentService().run_experiment(small_experiment)
    )
    overall = written["overall.svg"].read_bytes()
    assert overall.lstrip().startswith(b"<?xml")
    assert overall != written["accuracy.svg"].read_bytes()
