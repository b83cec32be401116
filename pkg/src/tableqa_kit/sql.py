"""SQL-subset AST and reference executor.

Queries are conjunctions of up to four WHERE clauses under one return
operator. The executor defines the result semantics every quality check and
evaluation in this package quantifies over; it is pure and operates on
immutable tables, so unrestricted parallel use is fine.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyAggregate, MalformedInput, TypeMismatch
from .tables import DataType, Table, parse_numeric
from .textnorm import norm_text


class Op(enum.Enum):
    EQ = "="
    GT = ">"
    LT = "<"


class RetType(enum.Enum):
    SELECT = "select"
    SUM = "sum"
    AVG = "avg"
    MAX = "max"
    MIN = "min"
    COUNT = "count"

    @property
    def is_aggregate(self) -> bool:
        return self is not RetType.SELECT

    @property
    def is_numeric_aggregate(self) -> bool:
        """Sum/Avg/Max/Min: read numeric cell values, so need a Numeric column."""
        return self in (RetType.SUM, RetType.AVG, RetType.MAX, RetType.MIN)


# the only return types the sampler draws from; Count is executor-only
SAMPLED_RET_TYPES = (RetType.SELECT, RetType.SUM, RetType.AVG, RetType.MAX, RetType.MIN)

MAX_WHERE = 4


@dataclass(frozen=True)
class WhereClause:
    col: int
    op: Op
    value: str


@dataclass(frozen=True)
class SqlQuery:
    ret: RetType
    select_col: int
    where: tuple[WhereClause, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "where", tuple(self.where))
        if len(self.where) > MAX_WHERE:
            raise ValueError(f"at most {MAX_WHERE} WHERE clauses, got {len(self.where)}")


@dataclass(frozen=True)
class Answer:
    """Either an ordered list of cells (Select) or a scalar (aggregates)."""

    cells: tuple[str, ...] | None = None
    scalar: float | None = None

    def __post_init__(self):
        if (self.cells is None) == (self.scalar is None):
            raise ValueError("exactly one of cells/scalar must be set")
        if self.scalar is not None and not math.isfinite(self.scalar):
            raise ValueError("scalar answers must be finite")

    @classmethod
    def of_cells(cls, cells) -> "Answer":
        return cls(cells=tuple(str(c) for c in cells))

    @classmethod
    def of_scalar(cls, value: float) -> "Answer":
        return cls(scalar=float(value))


def validate_query(q: SqlQuery, t: Table) -> None:
    """Raise if the query violates its invariants against the table."""
    if not 0 <= q.select_col < t.n_cols:
        raise MalformedInput(f"select column {q.select_col} out of range")
    if q.ret.is_numeric_aggregate and t.col_types[q.select_col] is not DataType.NUMERIC:
        raise TypeMismatch(
            f"{q.ret.name} needs a numeric column, "
            f"{t.headers[q.select_col]!r} is text"
        )
    for cl in q.where:
        if not 0 <= cl.col < t.n_cols:
            raise MalformedInput(f"WHERE column {cl.col} out of range")
        if cl.op is not Op.EQ and t.col_types[cl.col] is not DataType.NUMERIC:
            raise TypeMismatch(
                f"{cl.op.value} needs a numeric column, "
                f"{t.headers[cl.col]!r} is text"
            )


def clause_mask(cl: WhereClause, t: Table) -> np.ndarray:
    """Boolean row mask for one clause.

    Text equality is case-insensitive and whitespace-normalized. On numeric
    columns an equality value that parses compares numerically, otherwise it
    falls back to text comparison; Gt/Lt values that do not parse match
    nothing (empty cells never match either — their parsed value is NaN).
    """
    col_type = t.col_types[cl.col]
    if col_type is DataType.NUMERIC:
        v = parse_numeric(cl.value)
        nums = t.numeric_column(cl.col)
        if cl.op is Op.EQ:
            if v is None:
                target = norm_text(cl.value)
                return np.array([c == target for c in t.normalized_column(cl.col)])
            return nums == v
        if v is None:
            return np.zeros(t.n_rows, dtype=bool)
        return nums > v if cl.op is Op.GT else nums < v
    if cl.op is not Op.EQ:
        raise TypeMismatch(f"{cl.op.value} on text column {t.headers[cl.col]!r}")
    target = norm_text(cl.value)
    return np.array([c == target for c in t.normalized_column(cl.col)])


def matched_rows(q: SqlQuery, t: Table) -> np.ndarray:
    """Conjunction of all clause masks (all-True for an empty WHERE list)."""
    mask = np.ones(t.n_rows, dtype=bool)
    for cl in q.where:
        mask &= clause_mask(cl, t)
    return mask


def finish(q: SqlQuery, t: Table, mask: np.ndarray) -> Answer:
    """Apply the return operator to the matched rows."""
    if q.ret is RetType.SELECT:
        cells = [row[q.select_col] for row, m in zip(t.rows, mask) if m]
        return Answer.of_cells(cells)
    if q.ret is RetType.COUNT:
        return Answer.of_scalar(float(mask.sum()))
    if t.col_types[q.select_col] is not DataType.NUMERIC:
        raise TypeMismatch(
            f"{q.ret.name} on text column {t.headers[q.select_col]!r}"
        )
    vals = t.numeric_column(q.select_col)[mask]
    vals = vals[~np.isnan(vals)]
    if q.ret is RetType.SUM:
        return Answer.of_scalar(float(vals.sum()) if vals.size else 0.0)
    if vals.size == 0:
        raise EmptyAggregate(f"{q.ret.name} over zero matched values")
    if q.ret is RetType.AVG:
        return Answer.of_scalar(float(vals.mean()))
    if q.ret is RetType.MAX:
        return Answer.of_scalar(float(vals.max()))
    return Answer.of_scalar(float(vals.min()))


def execute(q: SqlQuery, t: Table) -> Answer:
    """Run a query: rows satisfying every clause, then the return operator.

    Select keeps table row order. Sum and Count over zero rows return 0;
    Avg/Max/Min over zero values raise :class:`EmptyAggregate`.
    """
    validate_query(q, t)
    return finish(q, t, matched_rows(q, t))


def answers_equal(a: Answer, b: Answer) -> bool:
    """Cells: ordered, case/whitespace-insensitive. Scalars: rel tol 1e-9."""
    if (a.cells is None) != (b.cells is None):
        return False
    if a.cells is not None:
        if len(a.cells) != len(b.cells):
            return False
        return all(norm_text(x) == norm_text(y) for x, y in zip(a.cells, b.cells))
    return math.isclose(a.scalar, b.scalar, rel_tol=1e-9)


# --- canonical text rendering -------------------------------------------

def render_sql(q: SqlQuery, t: Table) -> str:
    """Canonical one-line rendering, e.g. ``SELECT MAX(Votes) WHERE Party = X``."""
    head = t.headers[q.select_col]
    sel = head if q.ret is RetType.SELECT else f"{q.ret.name}({head})"
    parts = [f"SELECT {sel}"]
    if q.where:
        conds = " AND ".join(
            f"{t.headers[cl.col]} {cl.op.value} {cl.value}" for cl in q.where
        )
        parts.append(f"WHERE {conds}")
    return " ".join(parts)


_AGG_NAMES = {rt.name: rt for rt in RetType if rt is not RetType.SELECT}


def _match_column(fragment: str, t: Table, ops: tuple[str, ...]) -> tuple[int, str, str]:
    """Resolve ``<header> <op> <value>`` against known headers (longest first)."""
    candidates = sorted(
        enumerate(t.headers), key=lambda kv: len(kv[1]), reverse=True
    )
    for col, header in candidates:
        if not fragment.startswith(header + " "):
            continue
        rest = fragment[len(header) + 1 :]
        for sym in ops:
            if rest.startswith(sym + " "):
                return col, sym, rest[len(sym) + 1 :]
    raise MalformedInput(f"cannot parse WHERE fragment {fragment!r}")


def parse_sql(text: str, t: Table) -> SqlQuery:
    """Parse the canonical rendering back against a table (fixture helper)."""
    text = text.strip()
    if not text.startswith("SELECT "):
        raise MalformedInput(f"query must start with SELECT: {text!r}")
    body = text[len("SELECT ") :]
    sel_part, _, where_part = body.partition(" WHERE ")
    sel_part = sel_part.strip()
    ret = RetType.SELECT
    for name, rt in _AGG_NAMES.items():
        if sel_part.startswith(name + "(") and sel_part.endswith(")"):
            ret = rt
            sel_part = sel_part[len(name) + 1 : -1]
            break
    try:
        select_col = t.headers.index(sel_part)
    except ValueError:
        raise MalformedInput(f"unknown column {sel_part!r}") from None
    clauses = []
    if where_part:
        for frag in where_part.split(" AND "):
            col, sym, value = _match_column(frag.strip(), t, ("=", ">", "<"))
            clauses.append(WhereClause(col=col, op=Op(sym), value=value))
    return SqlQuery(ret=ret, select_col=select_col, where=tuple(clauses))


# --- JSON wire format ------------------------------------------------------

def answer_to_json(a: Answer):
    return list(a.cells) if a.cells is not None else a.scalar


def answer_from_json(obj) -> Answer:
    if isinstance(obj, list):
        return Answer.of_cells(obj)
    if isinstance(obj, (int, float)):
        return Answer.of_scalar(float(obj))
    raise MalformedInput(f"bad answer payload: {obj!r}")


def query_to_json(q: SqlQuery, t: Table) -> dict:
    return {
        "table_id": t.id,
        "sql": render_sql(q, t),
        "ret": q.ret.value,
        "select_col": q.select_col,
        "where": [
            {"col": cl.col, "op": cl.op.value, "value": cl.value} for cl in q.where
        ],
    }


def query_from_json(obj: dict) -> SqlQuery:
    try:
        return SqlQuery(
            ret=RetType(obj["ret"]),
            select_col=int(obj["select_col"]),
            where=tuple(
                WhereClause(col=int(w["col"]), op=Op(w["op"]), value=str(w["value"]))
                for w in obj["where"]
            ),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise MalformedInput(f"bad query object: {exc}") from exc
