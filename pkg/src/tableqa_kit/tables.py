"""Typed table model: parsing, column type inference, JSONL round trip.

Every other module runs against :class:`Table`. Tables are immutable after
construction and cache per-column normalized/numeric views, so they are safe
to share across concurrent readers.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .errors import EmptyTable, MalformedInput, RaggedRows
from .textnorm import norm_text

# Optional sign, digits with at most one decimal point. Commas are stripped
# (thousands grouping) before matching; exponents/inf/nan stay Text.
_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)")


def parse_numeric(cell: str) -> float | None:
    """Parse a cell under the numeric-cell rule; None if it is not a number."""
    s = cell.strip().replace(",", "")
    if not s or not _NUMBER_RE.fullmatch(s):
        return None
    return float(s)


class DataType(enum.Enum):
    NUMERIC = "real"
    TEXT = "text"


def infer_column_type(cells: Iterable[str]) -> DataType:
    """Numeric iff every non-empty cell parses as a number; else Text.

    Empty cells are ignored; an all-empty column defaults to Text.
    """
    saw_value = False
    for cell in cells:
        if not cell.strip():
            continue
        saw_value = True
        if parse_numeric(cell) is None:
            return DataType.TEXT
    return DataType.NUMERIC if saw_value else DataType.TEXT


@dataclass(frozen=True)
class Table:
    """Rectangular grid of typed string columns.

    Rows are lists of cell strings; ``col_types`` is aligned with ``headers``.
    Duplicate headers are permitted — columns are addressed by index.
    """

    id: str
    headers: list[str]
    rows: list[list[str]]
    col_types: list[DataType] = field(default_factory=list)

    def __post_init__(self):
        if not self.headers or not self.rows:
            raise EmptyTable(f"table {self.id!r} needs headers and rows")
        headers = [h.strip() for h in self.headers]
        if any(not h for h in headers):
            raise MalformedInput(f"table {self.id!r} has a blank header")
        object.__setattr__(self, "headers", headers)
        for i, row in enumerate(self.rows):
            if len(row) != len(headers):
                raise RaggedRows(
                    f"table {self.id!r} row {i} has {len(row)} cells, "
                    f"expected {len(headers)}"
                )
        if not self.col_types:
            object.__setattr__(
                self, "col_types", [infer_column_type(c) for c in self.columns()]
            )
        elif len(self.col_types) != len(headers):
            raise MalformedInput(
                f"table {self.id!r} has {len(self.col_types)} types for "
                f"{len(headers)} headers"
            )
        # per-column caches, filled lazily (frozen dataclass: set via object)
        object.__setattr__(self, "_num_cache", {})
        object.__setattr__(self, "_norm_cache", {})

    @property
    def n_cols(self) -> int:
        return len(self.headers)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column(self, col: int) -> list[str]:
        return [row[col] for row in self.rows]

    def columns(self) -> Iterator[list[str]]:
        for col in range(len(self.headers)):
            yield self.column(col)

    def numeric_column(self, col: int) -> np.ndarray:
        """Parsed float view of a column; empty/unparseable cells are NaN."""
        cache: dict = self._num_cache  # type: ignore[attr-defined]
        if col not in cache:
            vals = [parse_numeric(c) for c in self.column(col)]
            cache[col] = np.array(
                [np.nan if v is None else v for v in vals], dtype=float
            )
        return cache[col]

    def normalized_column(self, col: int) -> list[str]:
        """Whitespace-collapsed, lowercased view of a column."""
        cache: dict = self._norm_cache  # type: ignore[attr-defined]
        if col not in cache:
            cache[col] = [norm_text(c) for c in self.column(col)]
        return cache[col]


def table_from_json(obj: dict) -> Table:
    """Build a table from the JSONL object format.

    ``{"id": str, "header": [str], "types": ["text"|"real"], "rows": [[str]]}``
    with ``types`` optional (inferred when absent).
    """
    try:
        table_id = str(obj["id"])
        headers = [str(h) for h in obj["header"]]
        rows = [[str(c) for c in row] for row in obj["rows"]]
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"bad table object: {exc}") from exc
    types: list[DataType] = []
    if obj.get("types"):
        try:
            types = [DataType(t) for t in obj["types"]]
        except ValueError as exc:
            raise MalformedInput(f"bad column type: {exc}") from exc
    return Table(id=table_id, headers=headers, rows=rows, col_types=types)


def table_to_json(t: Table) -> dict:
    """Inverse of :func:`table_from_json`; ``types`` is always emitted."""
    return {
        "id": t.id,
        "header": list(t.headers),
        "types": [dt.value for dt in t.col_types],
        "rows": [list(row) for row in t.rows],
    }


def parse_table(source: str, table_id: str = "table", fmt: str = "auto") -> Table:
    """Parse one table from TSV/CSV text (first row = header) or a JSON object.

    ``fmt`` is one of ``csv``, ``tsv``, ``json``, ``auto``. Auto detection:
    a leading "{" means JSON, a tab anywhere means TSV, otherwise CSV.
    """
    if fmt == "auto":
        head = source.lstrip()[:1]
        if head == "{":
            fmt = "json"
        elif "\t" in source:
            fmt = "tsv"
        else:
            fmt = "csv"
    if fmt == "json":
        try:
            obj = json.loads(source)
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"bad JSON table: {exc}") from exc
        return table_from_json(obj)
    delim = "\t" if fmt == "tsv" else ","
    try:
        records = list(csv.reader(io.StringIO(source), delimiter=delim))
    except csv.Error as exc:
        raise MalformedInput(f"bad delimited table: {exc}") from exc
    records = [r for r in records if r]
    if len(records) < 2:
        raise EmptyTable(f"table {table_id!r} needs a header row and data rows")
    return Table(id=table_id, headers=records[0], rows=records[1:])


def read_tables_jsonl(path) -> list[Table]:
    tables = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedInput(f"{path}:{lineno}: {exc}") from exc
            tables.append(table_from_json(obj))
    return tables


def write_tables_jsonl(tables: Iterable[Table], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in tables:
            fh.write(json.dumps(table_to_json(t), ensure_ascii=False) + "\n")
