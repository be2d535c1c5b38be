"""autotab: no-code tabular machine learning pipeline with reports."""

from .dataset import ColumnKind, LabelMap, NumericMatrix, RawTable, Schema, encode, infer_schema, read_table, sanitize
from .pipeline import RunConfig, RunResult, parse_config, run_pipeline
from .report import render_report

__version__ = "0.1.0"

__all__ = [
    "ColumnKind",
    "LabelMap",
    "NumericMatrix",
    "RawTable",
    "RunConfig",
    "RunResult",
    "Schema",
    "encode",
    "infer_schema",
    "parse_config",
    "read_table",
    "render_report",
    "run_pipeline",
    "sanitize",
    "__version__",
]
