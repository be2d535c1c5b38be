"""Canonical tabular data model: parsing, schema inference, sanitizing, encoding."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    AllRowsDropped,
    EmptyTable,
    MalformedInput,
    TargetNotFound,
    TaskKindMismatch,
)

MISSING_TOKENS = {"", "na", "n/a", "nan", "null", "none"}
COMMENT_PREFIX = "#"
DEFAULT_CATEGORICAL_THRESHOLD = 20


def is_missing(cell) -> bool:
    if cell is None:
        return True
    if isinstance(cell, float) and np.isnan(cell):
        return True
    return isinstance(cell, str) and cell.strip().lower() in MISSING_TOKENS


def _as_number(cell):
    """Return the cell as a float, or None if it does not parse."""
    if isinstance(cell, (int, float)):
        return float(cell)
    try:
        return float(cell.strip())
    except (ValueError, AttributeError):
        return None


class ColumnKind(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class RawTable:
    column_names: tuple[str, ...]
    rows: tuple[tuple, ...]
    source_path: str = ""

    def __post_init__(self):
        names = [n.strip() for n in self.column_names]
        if len(set(names)) != len(names):
            raise MalformedInput(f"duplicate column names in {self.source_path!r}")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.column_names):
                raise MalformedInput(f"row {i} has {len(row)} cells, expected {len(self.column_names)}")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        return len(self.column_names)

    def column(self, name: str) -> list:
        try:
            j = self.column_names.index(name)
        except ValueError:
            raise TargetNotFound(name)
        return [row[j] for row in self.rows]


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: ColumnKind
    missing_count: int
    distinct_count: int


@dataclass(frozen=True)
class Schema:
    columns: tuple[ColumnSchema, ...]

    def __getitem__(self, name: str) -> ColumnSchema:
        for col in self.columns:
            if col.name == name:
                return col
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "columns": [
                {
                    "name": c.name,
                    "kind": c.kind.value,
                    "missing_count": c.missing_count,
                    "distinct_count": c.distinct_count,
                }
                for c in self.columns
            ]
        }


@dataclass(frozen=True)
class NumericMatrix:
    values: np.ndarray  # (n_rows, n_features) float64
    feature_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.values.ndim != 2:
            raise ValueError("values must be 2-D")
        if self.values.shape[1] != len(self.feature_names):
            raise ValueError("feature_names length must match column count")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelMap:
    target_name: str
    classes: tuple = ()  # empty for regression
    encoded: np.ndarray = field(default_factory=lambda: np.empty(0))

    def decode(self, indices) -> list:
        if not self.classes:
            return list(np.asarray(indices, dtype=float))
        return [self.classes[int(i)] for i in np.asarray(indices)]

    def encode_labels(self, labels) -> np.ndarray:
        lookup = {c: i for i, c in enumerate(self.classes)}
        return np.array([lookup[v] for v in labels], dtype=np.int64)


def _read_csv_file(path: str) -> tuple[list[str], list[list[str]]]:
    delimiter = "\t" if path.lower().endswith(".tsv") else ","
    header = None
    rows: list[list[str]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for lineno, record in enumerate(reader, start=1):
            if not record or all(cell.strip() == "" for cell in record):
                continue
            if record[0].lstrip().startswith(COMMENT_PREFIX):
                continue
            if header is None:
                header = [cell.strip() for cell in record]
                continue
            if len(record) != len(header):
                raise MalformedInput(
                    f"{path}: line {lineno} has {len(record)} cells, expected {len(header)}"
                )
            rows.append(record)
    if header is None or not rows:
        raise EmptyTable(path)
    return header, rows


def _join_tables(parts: list[tuple[str, list[str], list[list[str]]]]) -> tuple[list[str], list[list[str]]]:
    """Inner-join multiple sheets on the first column name shared by all."""
    shared = None
    for name in parts[0][1]:
        if all(name in header for _, header, _ in parts[1:]):
            shared = name
            break
    if shared is None:
        raise MalformedInput("multi-file input has no shared key column")
    header, rows = parts[0][1], parts[0][2]
    for _, other_header, other_rows in parts[1:]:
        ki = header.index(shared)
        kj = other_header.index(shared)
        extra_cols = [c for c in range(len(other_header)) if c != kj]
        index: dict[str, list[list[str]]] = {}
        for row in other_rows:
            index.setdefault(row[kj], []).append([row[c] for c in extra_cols])
        new_header = header + [other_header[c] for c in extra_cols]
        new_rows = []
        for row in rows:
            for extra in index.get(row[ki], []):
                new_rows.append(row + extra)
        header, rows = new_header, new_rows
    return header, rows


def read_table(path: str, format_hint: str | None = None) -> RawTable:
    """Parse a CSV/TSV file, or a directory of CSVs joined on a shared key column."""
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    if os.path.isdir(path):
        files = sorted(
            os.path.join(path, f)
            for f in os.listdir(path)
            if f.lower().endswith((".csv", ".tsv"))
        )
        if not files:
            raise EmptyTable(path)
        parts = []
        for f in files:
            header, rows = _read_csv_file(f)
            parts.append((f, header, rows))
        if len(parts) == 1:
            header, rows = parts[0][1], parts[0][2]
        else:
            header, rows = _join_tables(parts)
        if not rows:
            raise EmptyTable(path)
    else:
        header, rows = _read_csv_file(path)
    return RawTable(
        column_names=tuple(header),
        rows=tuple(tuple(row) for row in rows),
        source_path=path,
    )


def infer_schema(table: RawTable, categorical_threshold: int = DEFAULT_CATEGORICAL_THRESHOLD) -> Schema:
    """Assign each column a kind: continuous, binary, or categorical.

    Precedence: all-numeric with more than ``categorical_threshold`` distinct
    values -> continuous; exactly 2 distinct values -> binary; else categorical.
    """
    if table.n_rows == 0:
        raise EmptyTable(table.source_path)
    columns = []
    for name in table.column_names:
        values = table.column(name)
        present = [v for v in values if not is_missing(v)]
        missing_count = len(values) - len(present)
        distinct = {str(v).strip() for v in present}
        all_numeric = bool(present) and all(_as_number(v) is not None for v in present)
        if all_numeric and len(distinct) > categorical_threshold:
            kind = ColumnKind.CONTINUOUS
        elif len(distinct) == 2:
            kind = ColumnKind.BINARY
        else:
            kind = ColumnKind.CATEGORICAL
        columns.append(
            ColumnSchema(name=name.strip(), kind=kind, missing_count=missing_count,
                         distinct_count=len(distinct))
        )
    return Schema(columns=tuple(columns))


def sanitize(table: RawTable, schema: Schema) -> RawTable:
    """Drop rows with missing cells; trim whitespace; merge case-duplicate labels."""
    kept = []
    for row in table.rows:
        if any(is_missing(cell) for cell in row):
            continue
        kept.append([cell.strip() if isinstance(cell, str) else cell for cell in row])
    if not kept:
        raise AllRowsDropped(table.source_path)
    # Case-insensitive label merging for non-continuous columns: the
    # first-seen spelling becomes canonical.
    for j, name in enumerate(table.column_names):
        if schema[name.strip()].kind == ColumnKind.CONTINUOUS:
            continue
        canonical: dict[str, str] = {}
        for row in kept:
            cell = row[j]
            key = str(cell).strip().casefold()
            if key not in canonical:
                canonical[key] = str(cell).strip()
            row[j] = canonical[key]
    return RawTable(
        column_names=table.column_names,
        rows=tuple(tuple(row) for row in kept),
        source_path=table.source_path,
    )


def _sorted_labels(values: list) -> list:
    distinct = sorted({str(v).strip() for v in values})
    return distinct


def encode(
    table: RawTable,
    schema: Schema,
    target: str | None = None,
    task: str = "classification",
) -> tuple[NumericMatrix, LabelMap | None]:
    """Encode inputs to a dense float matrix; the target (if any) to a LabelMap.

    Continuous inputs pass through, binary inputs map to {0,1} by sorted label
    order, categorical inputs one-hot expand as "col=value".
    """
    if task not in ("classification", "regression", "unsupervised"):
        raise ValueError(f"unknown task {task!r}")
    supervised = task in ("classification", "regression")
    if supervised:
        if target is None or target not in [n.strip() for n in table.column_names]:
            raise TargetNotFound(str(target))
        target_kind = schema[target].kind
        if task == "classification" and target_kind not in (ColumnKind.BINARY, ColumnKind.CATEGORICAL):
            raise TaskKindMismatch(f"classification target {target!r} has kind {target_kind.value}")
        if task == "regression" and target_kind != ColumnKind.CONTINUOUS:
            raise TaskKindMismatch(f"regression target {target!r} has kind {target_kind.value}")

    feature_cols: list[np.ndarray] = []
    feature_names: list[str] = []
    for name in table.column_names:
        name = name.strip()
        if supervised and name == target:
            continue
        kind = schema[name].kind
        values = table.column(name)
        if kind == ColumnKind.CONTINUOUS:
            feature_cols.append(np.array([_as_number(v) for v in values], dtype=np.float64))
            feature_names.append(name)
        elif kind == ColumnKind.BINARY:
            labels = _sorted_labels(values)
            lookup = {lab: float(i) for i, lab in enumerate(labels)}
            feature_cols.append(np.array([lookup[str(v).strip()] for v in values]))
            feature_names.append(name)
        else:
            labels = _sorted_labels(values)
            for lab in labels:
                feature_cols.append(
                    np.array([1.0 if str(v).strip() == lab else 0.0 for v in values])
                )
                feature_names.append(f"{name}={lab}")
    if not feature_cols:
        raise EmptyTable("no input features left after excluding the target")
    X = NumericMatrix(values=np.column_stack(feature_cols), feature_names=tuple(feature_names))
    if not np.all(np.isfinite(X.values)):
        raise MalformedInput("non-finite cell after encoding; run sanitize first")

    label_map = None
    if supervised:
        raw = table.column(target)
        if task == "classification":
            classes = tuple(_sorted_labels(raw))
            lookup = {c: i for i, c in enumerate(classes)}
            encoded = np.array([lookup[str(v).strip()] for v in raw], dtype=np.int64)
            label_map = LabelMap(target_name=target, classes=classes, encoded=encoded)
        else:
            encoded = np.array([_as_number(v) for v in raw], dtype=np.float64)
            label_map = LabelMap(target_name=target, classes=(), encoded=encoded)
    return X, label_map
