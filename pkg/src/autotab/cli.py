"""Command-line entry points."""

from __future__ import annotations

import json
import sys

import click

from .dataset import infer_schema, read_table
from .errors import AutotabError
from .pipeline import parse_config, run_pipeline
from .report import render_report


@click.group()
def main():
    """Tabular analysis pipeline: train, compare, explain, report."""


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("data_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", default="report", show_default=True,
              help="Directory for report.json, figures/ and model_metrics.csv.")
@click.option("--run-id", default="cli", show_default=True)
def run(config_path, data_path, out_dir, run_id):
    """Run the full pipeline for CONFIG_PATH on DATA_PATH and write a report."""
    with open(config_path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        config = parse_config(doc)
        table = read_table(data_path)
        result = run_pipeline(config, table, run_id=run_id)
        render_report(result, out_dir)
    except AutotabError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    if result.winner is not None:
        click.echo(f"winner: {result.winner}")
    click.echo(f"report: {out_dir}/report.json")


@main.command()
@click.argument("data_path", type=click.Path(exists=True))
def schema(data_path):
    """Print the inferred schema of DATA_PATH as JSON."""
    try:
        table = read_table(data_path)
        inferred = infer_schema(table)
    except AutotabError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps(inferred.to_dict(), indent=2))


@main.command()
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-root", default="autotab-data", show_default=True)
@click.option("--workers", default=2, show_default=True)
@click.option("--model-timeout-seconds", default=120.0, show_default=True)
def serve(port, host, data_root, workers, model_timeout_seconds):
    """Start the HTTP job service."""
    import uvicorn

    from .service import create_app

    app = create_app(data_root, workers=workers,
                     model_timeout_seconds=model_timeout_seconds)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command("demo-data")
@click.option("--out", "out_path", default="demo.csv", show_default=True)
def demo_data(out_path):
    """Copy the bundled demo dataset to OUT."""
    from importlib import resources

    payload = resources.files("autotab.data").joinpath("demo.csv").read_bytes()
    with open(out_path, "wb") as fh:
        fh.write(payload)
    click.echo(out_path)
