"""Command-line entry point.

Stages share a run directory: ``extract`` writes predictions and a
manifest, ``evaluate`` / ``agreement`` turn them into reports (JSON +
CSV + figures), ``export-review`` / ``import-review`` close the expert
verification loop. Exit codes: 0 ok, 1 config error, 2 data error,
3 service error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import runner
from .config import load_config
from .errors import ConfigError, DataError, GapmineError, ServiceError


def _fail(exc: GapmineError) -> None:
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, ConfigError):
        sys.exit(1)
    if isinstance(exc, DataError):
        sys.exit(2)
    if isinstance(exc, ServiceError):
        sys.exit(3)
    sys.exit(2)


def _echo_json(payload: dict) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


threshold_options = [
    click.option("--match-threshold", type=float, default=None,
                 help="Override the ROUGE-L match threshold."),
    click.option("--entailment-threshold", type=float, default=None,
                 help="Override the bidirectional entailment threshold."),
    click.option("--cluster-threshold", type=float, default=None,
                 help="Override the agreement clustering threshold."),
    click.option("--grounding-threshold", type=float, default=None,
                 help="Override the fuzzy grounding ratio."),
]


def _apply_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@click.group()
@click.version_option(package_name="gapmine")
def main() -> None:
    """Knowledge-gap extraction, inference, and evaluation runs."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=False))
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the normalized corpus as JSON-lines.")
@click.option("--apply-filter", is_flag=True, default=False,
              help="Drop gold gaps carrying configured exclusion flags.")
def ingest(config_path, out_path, apply_filter) -> None:
    """Load and validate a corpus; print summary counts."""
    try:
        config = load_config(config_path)
        summary = runner.run_ingest(config, out_path, apply_filter)
    except GapmineError as exc:
        _fail(exc)
    _echo_json(summary)


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=False))
@click.option("--run-dir", type=click.Path(), default=None,
              help="Destination (default: <output_dir>/<task>_<mode>).")
@click.option("--model", "models", multiple=True,
              help="Restrict to these configured model ids.")
@click.option("--context-mode", type=click.Choice(["no_limit", "chunked"]),
              default=None)
@click.option("--chunk-budget", type=int, default=None)
@click.option("--sample", type=int, default=None,
              help="Seeded subsample of units.")
@click.option("--seed", type=int, default=None)
def extract(config_path, run_dir, models, context_mode, chunk_budget,
            sample, seed) -> None:
    """Run unit x model completions into a run directory."""
    overrides = {
        "context_mode": context_mode,
        "chunk_budget": chunk_budget,
        "sample": sample,
        "seed": seed,
    }
    if models:
        overrides["models"] = list(models)
    try:
        config = load_config(config_path, overrides)
        if run_dir is None:
            run_dir = str(Path(config.output_dir) /
                          f"{config.task}_{config.context_mode}")
        summary = runner.run_extract(config, run_dir)
    except GapmineError as exc:
        _fail(exc)
    _echo_json(summary)


@main.command()
@click.argument("run_dirs", nargs=-1, type=click.Path(exists=False))
@click.option("--run-dir", "run_dir_opts", multiple=True,
              type=click.Path(), help="Run directory (repeatable).")
@click.option("--gold", "gold_path", type=click.Path(), default=None,
              help="Override the gold corpus path recorded in the run.")
@click.option("--model", "models", multiple=True,
              help="Only score these model ids.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Reports directory (default: <first run>/reports).")
@click.option("--figures/--no-figures", default=True)
@_apply_options(threshold_options)
def evaluate(run_dirs, run_dir_opts, gold_path, models, out_dir, figures,
             match_threshold, entailment_threshold, cluster_threshold,
             grounding_threshold) -> None:
    """Score predictions in one or more run directories against gold."""
    overrides = {}
    if match_threshold is not None:
        overrides["match"] = match_threshold
    if entailment_threshold is not None:
        overrides["entailment"] = entailment_threshold
    if grounding_threshold is not None:
        overrides["grounding"] = grounding_threshold
    all_dirs = list(run_dirs) + list(run_dir_opts)
    try:
        if not all_dirs:
            raise ConfigError("evaluate needs at least one run directory")
        result = runner.run_evaluate(all_dirs, gold_path, out_dir,
                                     figures, overrides,
                                     models=list(models) or None)
    except GapmineError as exc:
        _fail(exc)
    _echo_json({k: v for k, v in result.items()
                if k in ("task", "reports_dir", "accuracy")})


@main.command()
@click.argument("run_dirs", nargs=-1, type=click.Path(exists=False))
@click.option("--run-dir", "run_dir_opts", multiple=True,
              type=click.Path(), help="Run directory (repeatable).")
@click.option("--out", "out_dir", type=click.Path(), default=None)
@click.option("--model", "models", multiple=True,
              help="Models for region enumeration (2-4; default: top by "
                   "volume).")
@click.option("--figures/--no-figures", default=True)
@click.option("--cluster-threshold", type=float, default=None)
def agreement(run_dirs, run_dir_opts, out_dir, models, figures,
              cluster_threshold) -> None:
    """Cross-model overlap, uniqueness, and category profiles."""
    all_dirs = list(run_dirs) + list(run_dir_opts)
    try:
        if not all_dirs:
            raise ConfigError("agreement needs at least one run directory")
        result = runner.run_agreement(
            all_dirs, out_dir, figures,
            models=list(models) or None, sim_threshold=cluster_threshold)
    except GapmineError as exc:
        _fail(exc)
    _echo_json({k: result[k] for k in ("clusters", "models", "reports_dir")})


@main.command("export-review")
@click.option("--run-dir", required=True, type=click.Path(exists=False))
@click.option("--out", "out_path", type=click.Path(), default=None)
def export_review(run_dir, out_path) -> None:
    """Bundle implicit-task inferences for the browser review UI."""
    try:
        result = runner.export_review_bundle(run_dir, out_path)
    except GapmineError as exc:
        _fail(exc)
    _echo_json(result)


@main.command("import-review")
@click.option("--judgments", "judgments_path", type=click.Path(),
              default=None, help="Judgments file (default: "
              "<run-dir>/judgments.jsonl).")
@click.option("--bundle", "bundle_path", type=click.Path(), default=None,
              help="Original bundle, for coverage and per-bucket breakdowns "
              "(default: <run-dir>/review_bundle.json when present).")
@click.option("--run-dir", type=click.Path(), default=None,
              help="Run directory supplying the defaults above.")
@click.option("--out", "out_dir", type=click.Path(), default=None)
def import_review(judgments_path, bundle_path, run_dir, out_dir) -> None:
    """Turn exported judgments into a human-validation report."""
    try:
        if run_dir is not None:
            base = Path(run_dir)
            if judgments_path is None:
                judgments_path = str(base / "judgments.jsonl")
            if bundle_path is None and (base / "review_bundle.json").exists():
                bundle_path = str(base / "review_bundle.json")
            if out_dir is None:
                out_dir = str(base / "reports")
        if judgments_path is None:
            raise ConfigError("pass --judgments or --run-dir")
        result = runner.import_review(judgments_path, bundle_path, out_dir)
    except GapmineError as exc:
        _fail(exc)
    _echo_json(result)


if __name__ == "__main__":
    main()
