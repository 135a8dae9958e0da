"""Readers for the rampmcmc result-file formats.

This package talks to the simulator only through its documented files: CSVs
tagged `# schema=rampmcmc-csv-v1` with a config comment, and JSON documents
tagged `rampmcmc-json-v1`. Nothing here computes physics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CSV_SCHEMA = "rampmcmc-csv-v1"
JSON_SCHEMA = "rampmcmc-json-v1"


class SchemaError(ValueError):
    """Input file does not match the documented result schema."""


@dataclass(frozen=True)
class ResultTable:
    """One parsed result CSV: metadata comments, header, string cells."""

    path: Path
    meta: dict
    header: list[str]
    rows: list[list[str]]

    def column(self, name: str, numeric: bool = True) -> np.ndarray:
        if name not in self.header:
            raise SchemaError(f"{self.path}: required column {name!r} is missing")
        index = self.header.index(name)
        values = [row[index] for row in self.rows]
        if not numeric:
            return np.array(values)
        converted = []
        for value in values:
            try:
                converted.append(float(value))
            except ValueError:
                converted.append(np.nan)
        return np.array(converted)

    def require_columns(self, names: list[str]) -> None:
        for name in names:
            if name not in self.header:
                raise SchemaError(f"{self.path}: required column {name!r} is missing")

    @property
    def empty(self) -> bool:
        return len(self.rows) == 0


def load_table(path: str | Path) -> ResultTable:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input file {path} does not exist")
    meta: dict = {}
    header: list[str] = []
    rows: list[list[str]] = []
    for line_number, raw in enumerate(path.read_text().splitlines(), start=1):
        if not raw.strip():
            continue
        if raw.startswith("#"):
            body = raw[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                meta[key.strip()] = value.strip()
            continue
        parts = [part.strip() for part in raw.split(",")]
        if not header:
            header = parts
            continue
        if len(parts) != len(header):
            raise SchemaError(
                f"{path}:{line_number}: expected {len(header)} columns, got {len(parts)}"
            )
        rows.append(parts)
    if meta.get("schema") != CSV_SCHEMA:
        raise SchemaError(
            f"{path}: schema tag {meta.get('schema')!r} does not match {CSV_SCHEMA!r}"
        )
    if not header:
        raise SchemaError(f"{path}: no header row found")
    return ResultTable(path=path, meta=meta, header=header, rows=rows)


def load_fit(path: str | Path) -> dict:
    """A scaling-fit JSON document: kind, exponent, err, chi2_nu."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"fit file {path} does not exist")
    document = json.loads(path.read_text())
    if document.get("schema") != JSON_SCHEMA:
        raise SchemaError(
            f"{path}: schema tag {document.get('schema')!r} does not match {JSON_SCHEMA!r}"
        )
    for key in ("kind", "exponent"):
        if key not in document:
            raise SchemaError(f"{path}: fit document lacks {key!r}")
    return document
