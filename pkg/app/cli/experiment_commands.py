"""
run, compose and synth commands
"""
import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from app.cli import validation_message
from app.core.config import settings
from app.core.exceptions import EXIT_OK, ConfigFileError, InvalidParameters
from app.core.logging_config import logger
from app.models.models import FULL_SUBGROUP
from app.schemas.dataset_schemas import DatasetSchema, SynthConfig
from app.schemas.experiment_schemas import DataSource, ExperimentConfig, GroupSpec
from app.services.dataset_service import load_csv, synth_ciid
from app.services.experiment_service import ExperimentService
from app.services.metrics_service import demographic_composition
from app.services.report_generator import ReportGenerator


def register(subparsers: argparse._SubParsersAction) -> None:
    run = subparsers.add_parser(
        "run",
        help="Run a classification experiment and write its report bundle",
        description=(
            "Trains every model of the roster on each run's split and writes report.json, "
            "metrics.csv, summary.csv, composition.csv, disparity.csv, one SVG per metric and "
            "overall.svg."
        ),
    )
    run.add_argument("config", type=Path, help="Experiment config (JSON)")
    run.add_argument(
        "--output-dir",
        type=Path,
        default=None,
        help="Bundle directory (default: $CIID_OUTPUT_DIR/<experiment name>)",
    )
    run.add_argument("--workers", type=int, default=None)
    run.set_defaults(handler=cmd_run, usage=run.format_usage())

    compose = subparsers.add_parser(
        "compose", help="Print the demographic composition of a dataset"
    )
    compose.add_argument("dataset", type=Path, help="CSV with a header row")
    compose.add_argument(
        "schema", type=Path, help="Dataset schema JSON, or an experiment config carrying one"
    )
    compose.add_argument(
        "--spec",
        action="append",
        default=None,
        help="Comma-separated protected columns, e.g. sex,race; repeatable",
    )
    compose.set_defaults(handler=cmd_compose, usage=compose.format_usage())

    synth = subparsers.add_parser(
        "synth", help="Write a synthetic two-group dataset and a config that runs on it"
    )
    synth.add_argument("--n-priv", type=int, default=4000)
    synth.add_argument("--n-dis", type=int, default=1000)
    synth.add_argument("--dims", type=int, default=2)
    synth.add_argument("--boundary-shift", type=float, default=math.pi / 2)
    synth.add_argument("--noise-priv", type=float, default=0.2)
    synth.add_argument("--noise-dis", type=float, default=0.5)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--output-dir", type=Path, default=None)
    synth.set_defaults(handler=cmd_synth, usage=synth.format_usage())


# ---------------------------------------------------------------------------
# CONFIG FILES
# ---------------------------------------------------------------------------

def _read_json(path: Path) -> Dict[str, Any]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigFileError(str(path), f"cannot read file ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigFileError(str(path), exc.msg, line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise ConfigFileError(str(path), "top level must be a JSON object", line=1)
    return data


def load_experiment_config(path: Path) -> ExperimentConfig:
    data = _read_json(path)
    try:
        cfg = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigFileError(str(path), validation_message(exc)) from exc
    return cfg.with_source_dir(path.resolve().parent)


def load_schema(path: Path) -> DatasetSchema:
    data = _read_json(path)
    payload = data.get("schema", data)
    try:
        return DatasetSchema.model_validate(payload)
    except ValidationError as exc:
        raise ConfigFileError(str(path), validation_message(exc)) from exc


def parse_specs(raw: Optional[List[str]], schema: DatasetSchema) -> List[GroupSpec]:
    """Each --spec is "a" or "a,b"; by default every protected column plus their intersection."""
    names = schema.protected_names
    if raw:
        groups = [[c.strip() for c in item.split(",") if c.strip()] for item in raw]
    else:
        groups = [[n] for n in names] + ([names] if len(names) > 1 else [])

    specs = []
    for columns in groups:
        unknown = [c for c in columns if c not in names]
        if not columns or unknown:
            raise InvalidParameters(f"--spec {columns} must name protected columns from {names}")
        try:
            specs.append(
                GroupSpec(
                    protected_columns=columns,
                    privileged_values=[schema.privileged_value(c) for c in columns],
                )
            )
        except ValidationError as exc:
            raise InvalidParameters(validation_message(exc)) from exc
    return specs


# ---------------------------------------------------------------------------
# COMMANDS
# ---------------------------------------------------------------------------

def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_experiment_config(args.config)
    output_dir = args.output_dir or settings.output_path / cfg.name

    outcome = ExperimentService(workers=args.workers).run_experiment(cfg)
    written = ReportGenerator(output_dir).write_bundle(outcome)

    logger.info(
        f"Run complete : experiment={cfg.name} , output_dir={output_dir} , files={len(written)}"
    )
    return EXIT_OK


def cmd_compose(args: argparse.Namespace) -> int:
    schema = load_schema(args.schema)
    specs = parse_specs(args.spec, schema)
    dataset = load_csv(args.dataset, schema)

    proportions = demographic_composition(dataset, specs)
    out = sys.stdout
    out.write("subgroup,proportion\n")
    out.write(f"{FULL_SUBGROUP},{1.0:.3f}\n")
    for name, value in proportions.items():
        out.write(f"{name},{value:.3f}\n")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    try:
        cfg = SynthConfig(
            n_priv=args.n_priv,
            n_dis=args.n_dis,
            dims=args.dims,
            boundary_shift=args.boundary_shift,
            noise_priv=args.noise_priv,
            noise_dis=args.noise_dis,
            seed=args.seed,
        )
    except ValidationError as exc:
        raise InvalidParameters(validation_message(exc)) from exc

    output_dir: Path = args.output_dir or settings.output_path
    output_dir.mkdir(parents=True, exist_ok=True)
    synthetic = synth_ciid(cfg)

    csv_path = output_dir / "synthetic.csv"
    synthetic.frame.to_csv(csv_path, index=False, lineterminator="\n")

    experiment = ExperimentConfig(
        name=f"synthetic_seed{cfg.seed}",
        data=DataSource(csv=csv_path.name),
        dataset_schema=cfg.dataset_schema(),
        specs=[[n] for n in cfg.dataset_schema().protected_names],
    )
    config_path = output_dir / "synthetic_config.json"
    with open(config_path, "w", encoding="utf-8") as f:
        json.dump(experiment.model_dump(mode="json", by_alias=True, exclude_none=True), f, indent=2)

    bayes_path = output_dir / "synthetic_bayes_accuracy.json"
    with open(bayes_path, "w", encoding="utf-8") as f:
        json.dump(synthetic.bayes_accuracy, f, indent=2)

    logger.info(
        f"Synthetic data written : csv={csv_path} , config={config_path} , "
        f"bayes_accuracy={synthetic.bayes_accuracy}"
    )
    return EXIT_OK
