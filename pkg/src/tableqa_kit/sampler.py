"""Focused, controllable SQL generation from a table.

Draws a WHERE-clause count and a return type from configurable multinomials,
builds clauses whose conjunction matches at least one row, and keeps a
candidate only if it passes two semantic quality checks:

* minimality — no proper subset of the WHERE clauses (the empty set
  included) already produces the same answer, and
* aggregate validity — Sum/Avg/Max/Min queries match at least two rows, so
  dropping the aggregation cannot produce the expected answer.

The WHERE-clause count is drawn once per emitted query and held through that
query's retry attempts, so the emitted counts follow the configured
distribution rather than being skewed by check failures.
"""

from __future__ import annotations

import hashlib
import itertools
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import CheckFailed, EmptyCorpus, TableQAError, Unsatisfiable
from .sql import (
    SAMPLED_RET_TYPES,
    Answer,
    Op,
    SqlQuery,
    WhereClause,
    answers_equal,
    clause_mask,
    execute,
    finish,
    render_sql,
)
from .tables import DataType, Table

WHERE_COUNTS = (1, 2, 3, 4)

# Defaults mirror the heavy skew toward single-clause questions in real
# corpora while keeping multi-clause coverage for generalization.
DEFAULT_WHERE_DIST = (0.60, 0.25, 0.10, 0.05)
DEFAULT_RET_DIST = (0.70, 0.075, 0.075, 0.075, 0.075)


def _check_dist(name: str, dist, size: int) -> tuple[float, ...]:
    dist = tuple(float(p) for p in dist)
    if len(dist) != size:
        raise ValueError(f"{name} needs {size} probabilities, got {len(dist)}")
    if any(p < 0 for p in dist):
        raise ValueError(f"{name} has a negative probability")
    if abs(sum(dist) - 1.0) > 1e-9:
        raise ValueError(f"{name} must sum to 1, got {sum(dist)}")
    return dist


@dataclass(frozen=True)
class SamplerConfig:
    """Multinomial parameters and budget for query sampling."""

    where_count_dist: tuple[float, ...] = DEFAULT_WHERE_DIST
    ret_type_dist: tuple[float, ...] = DEFAULT_RET_DIST
    max_attempts_per_query: int = 100
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(
            self,
            "where_count_dist",
            _check_dist("where_count_dist", self.where_count_dist, len(WHERE_COUNTS)),
        )
        object.__setattr__(
            self,
            "ret_type_dist",
            _check_dist("ret_type_dist", self.ret_type_dist, len(SAMPLED_RET_TYPES)),
        )
        if self.max_attempts_per_query < 1:
            raise ValueError("max_attempts_per_query must be positive")


@dataclass(frozen=True)
class PriorStats:
    """Observed WHERE-count and return-type histograms of a query corpus."""

    where_count_hist: tuple[int, ...]
    ret_type_hist: tuple[int, ...]

    def to_config(self, **overrides) -> SamplerConfig:
        """Normalize the histograms into sampling distributions."""
        wt = sum(self.where_count_hist)
        rt = sum(self.ret_type_hist)
        if wt == 0 or rt == 0:
            raise EmptyCorpus("cannot normalize an all-zero histogram")
        return SamplerConfig(
            where_count_dist=tuple(c / wt for c in self.where_count_hist),
            ret_type_dist=tuple(c / rt for c in self.ret_type_hist),
            **overrides,
        )


def estimate_priors(corpus: list[SqlQuery]) -> PriorStats:
    """Histogram WHERE counts (clamped to 1..4) and samplable return types.

    Count queries contribute to the WHERE histogram only — the return-type
    histogram is defined over the five types the sampler draws from.
    """
    if not corpus:
        raise EmptyCorpus("prior corpus is empty")
    wc = Counter(min(max(len(q.where), 1), 4) for q in corpus)
    rc = Counter(q.ret for q in corpus)
    return PriorStats(
        where_count_hist=tuple(wc.get(n, 0) for n in WHERE_COUNTS),
        ret_type_hist=tuple(rc.get(rt, 0) for rt in SAMPLED_RET_TYPES),
    )


# --- quality checks ---------------------------------------------------------

def _proper_subsets(n: int):
    """All proper subsets of range(n), empty set included."""
    for size in range(n):
        yield from itertools.combinations(range(n), size)


def _is_minimal(q: SqlQuery, t: Table, masks: list[np.ndarray], answer: Answer) -> bool:
    ones = np.ones(t.n_rows, dtype=bool)
    for subset in _proper_subsets(len(masks)):
        sub_mask = ones.copy()
        for i in subset:
            sub_mask &= masks[i]
        if answers_equal(finish(q, t, sub_mask), answer):
            return False
    return True


def check_minimality(q: SqlQuery, t: Table) -> bool:
    """True iff no proper WHERE subset yields the same answer.

    Every subset is tried, including the empty set for single-clause
    queries. Executor errors surface as :class:`CheckFailed`.
    """
    try:
        masks = [clause_mask(cl, t) for cl in q.where]
        answer = execute(q, t)
        return _is_minimal(q, t, masks, answer)
    except TableQAError as exc:
        raise CheckFailed(f"minimality check failed on {render_sql(q, t)}: {exc}") from exc


def check_aggregate_validity(q: SqlQuery, t: Table) -> bool:
    """Sum/Avg/Max/Min must match >= 2 rows; Select (and Count) always pass."""
    if not q.ret.is_numeric_aggregate:
        return True
    mask = np.ones(t.n_rows, dtype=bool)
    for cl in q.where:
        mask &= clause_mask(cl, t)
    return int(mask.sum()) >= 2


# --- clause generation -------------------------------------------------

def _usable_columns(t: Table) -> list[int]:
    """Columns with at least one non-empty cell to draw WHERE values from."""
    return [c for c in range(t.n_cols) if any(cell.strip() for cell in t.column(c))]


def _draw_clauses(
    t: Table, n: int, rng: np.random.Generator, pool: list[int]
) -> list[WhereClause]:
    """One unchecked draw: n distinct columns, type-legal ops, cell values."""
    cols = rng.choice(len(pool), size=n, replace=False)
    clauses = []
    for idx in cols:
        col = pool[int(idx)]
        cells = [c for c in t.column(col) if c.strip()]
        value = cells[int(rng.integers(len(cells)))]
        if t.col_types[col] is DataType.NUMERIC:
            op = (Op.EQ, Op.GT, Op.LT)[int(rng.integers(3))]
        else:
            op = Op.EQ
        clauses.append(WhereClause(col=col, op=op, value=value))
    return clauses


def generate_where_clauses(
    t: Table, n: int, rng: np.random.Generator, max_attempts: int = 100
) -> list[WhereClause]:
    """Draw n clauses on n distinct columns whose conjunction matches a row.

    Equality values are drawn uniformly from the column's cells; Gt/Lt only
    appear on numeric columns with a threshold drawn from the cell values.
    """
    if t.n_rows == 0:
        raise ValueError("table has no rows")
    pool = _usable_columns(t)
    if not 1 <= n <= min(4, len(pool)):
        raise ValueError(f"need 1 <= n <= {min(4, len(pool))}, got {n}")
    for _ in range(max_attempts):
        clauses = _draw_clauses(t, n, rng, pool)
        mask = np.ones(t.n_rows, dtype=bool)
        for cl in clauses:
            mask &= clause_mask(cl, t)
        if mask.any():
            return clauses
    raise Unsatisfiable(
        f"no satisfiable {n}-clause set on table {t.id!r} in {max_attempts} attempts"
    )


# --- the generation loop ----------------------------------------------------

@dataclass(frozen=True)
class SampledQuery:
    query: SqlQuery
    answer: Answer


@dataclass(frozen=True)
class SampleResult:
    """Generated queries plus a soft budget-exhaustion flag."""

    queries: list[SampledQuery]
    budget_exhausted: bool = False
    attempts: int = 0

    def __iter__(self):
        return iter(self.queries)

    def __len__(self):
        return len(self.queries)


def generate_sqls(
    t: Table,
    target_num: int,
    cfg: SamplerConfig | None = None,
    rng: np.random.Generator | None = None,
) -> SampleResult:
    """Sample up to ``target_num`` distinct validated queries from one table.

    Every emitted query passes both quality checks, its select column is
    disjoint from the WHERE columns, numeric aggregates only select numeric
    columns, and the executed answer is attached. Returns a partial list
    with ``budget_exhausted`` set once ``target_num * max_attempts_per_query``
    attempts are spent.
    """
    cfg = cfg or SamplerConfig()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if target_num < 1:
        raise ValueError("target_num must be >= 1")
    if t.n_cols < 2:
        raise ValueError("need >= 2 columns (select and WHERE columns are disjoint)")

    pool = _usable_columns(t)
    max_n = min(4, len(pool), t.n_cols - 1)
    if max_n < 1 or t.n_rows == 0:
        raise ValueError(f"table {t.id!r} has no usable WHERE columns")
    # truncate the WHERE-count support to what the table can host
    where_dist = np.array(cfg.where_count_dist[:max_n], dtype=float)
    if where_dist.sum() <= 0:
        raise ValueError("where_count_dist has no mass on feasible clause counts")
    where_dist /= where_dist.sum()
    ret_dist = np.array(cfg.ret_type_dist, dtype=float)

    numeric_cols = {c for c in range(t.n_cols) if t.col_types[c] is DataType.NUMERIC}
    out: list[SampledQuery] = []
    seen: set[str] = set()
    budget = target_num * cfg.max_attempts_per_query
    attempts = 0

    while len(out) < target_num and attempts < budget:
        n = int(rng.choice(len(where_dist), p=where_dist)) + 1
        for _ in range(cfg.max_attempts_per_query):
            if attempts >= budget:
                break
            attempts += 1
            clauses = _draw_clauses(t, n, rng, pool)
            masks = [clause_mask(cl, t) for cl in clauses]
            mask = np.ones(t.n_rows, dtype=bool)
            for m in masks:
                mask &= m
            if not mask.any():
                continue
            ret = SAMPLED_RET_TYPES[int(rng.choice(len(ret_dist), p=ret_dist))]
            where_cols = {cl.col for cl in clauses}
            if ret.is_numeric_aggregate:
                if int(mask.sum()) < 2:
                    continue
                select_pool = sorted(numeric_cols - where_cols)
            else:
                select_pool = sorted(set(range(t.n_cols)) - where_cols)
            if not select_pool:
                continue
            select_col = select_pool[int(rng.integers(len(select_pool)))]
            q = SqlQuery(ret=ret, select_col=select_col, where=tuple(clauses))
            key = render_sql(q, t)
            if key in seen:
                continue
            try:
                # >=2 matched rows can still mean zero numeric values when the
                # column has empty cells; treat that as an invalid draw
                answer = finish(q, t, mask)
            except TableQAError:
                continue
            if not _is_minimal(q, t, masks, answer):
                continue
            out.append(SampledQuery(query=q, answer=answer))
            seen.add(key)
            break

    return SampleResult(
        queries=out,
        budget_exhausted=len(out) < target_num,
        attempts=attempts,
    )


def table_stream_seed(seed: int, table_id: str) -> np.random.SeedSequence:
    """Named substream per table so per-table sampling is order-independent."""
    digest = hashlib.blake2b(table_id.encode("utf-8"), digest_size=8).digest()
    return np.random.SeedSequence([seed, int.from_bytes(digest, "big")])


def sample_corpus(
    tables: list[Table], per_table: int, cfg: SamplerConfig | None = None
) -> list[tuple[Table, SampleResult]]:
    """Run :func:`generate_sqls` over a table corpus, one substream per table.

    Each table gets an independent seeded stream derived from
    ``(cfg.seed, table.id)``, so a parallel implementation merging in table
    order would produce byte-identical output.
    """
    cfg = cfg or SamplerConfig()
    results = []
    for t in tables:
        rng = np.random.default_rng(table_stream_seed(cfg.seed, t.id))
        results.append((t, generate_sqls(t, per_table, cfg, rng)))
    return results
