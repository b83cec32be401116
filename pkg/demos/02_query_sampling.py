# Validated SQL sampling from a table.
#
# The sampler draws a WHERE-clause count and a return type from configurable
# multinomials, then rejects candidates that fail two semantic checks:
# every WHERE clause must be necessary (minimality) and numeric aggregates
# must cover at least two rows. What survives is clean training signal.

from collections import Counter

import numpy as np

from tableqa_kit import (
    SamplerConfig,
    check_aggregate_validity,
    check_minimality,
    estimate_priors,
    generate_sqls,
    render_sql,
)
from tableqa_kit.tables import Table

table = Table(
    id="election",
    headers=["Party", "Candidate", "Votes"],
    rows=[
        ["Conservatives", "Andrew Turner", "32,717"],
        ["Liberal Democrats", "Anthony Rowlands", "19,739"],
        ["Labour", "Mark Chiverton", "11,484"],
        ["UK Independence", "Michael Tarrant", "2,352"],
        ["Independent", "Edward Corby", "551"],
    ],
)

cfg = SamplerConfig(seed=7)
result = generate_sqls(table, 20, cfg)
print(f"emitted {len(result.queries)} queries (budget exhausted: {result.budget_exhausted})")
for sq in result.queries[:8]:
    answer = sq.answer.cells if sq.answer.cells is not None else sq.answer.scalar
    print(f"  {render_sql(sq.query, table):<60} -> {answer}")

# Every emitted query re-passes both checks.
assert all(check_minimality(sq.query, table) for sq in result.queries)
assert all(check_aggregate_validity(sq.query, table) for sq in result.queries)

# Why minimality matters: this query names the party even though the
# candidate already pins the row, so dropping the party clause changes
# nothing. The sampler would never emit it.
from tableqa_kit import Op, RetType, SqlQuery, WhereClause

redundant = SqlQuery(
    ret=RetType.SELECT,
    select_col=2,
    where=(
        WhereClause(col=1, op=Op.EQ, value="Andrew Turner"),
        WhereClause(col=0, op=Op.EQ, value="Conservatives"),
    ),
)
print("redundant two-clause query is minimal?", check_minimality(redundant, table))

# Sampling distributions can be matched to a corpus of observed queries
# instead of the defaults: histogram, then normalize.
priors = estimate_priors([sq.query for sq in result.queries])
matched = priors.to_config(seed=11)
print("prior-matched WHERE distribution:", [round(p, 3) for p in matched.where_count_dist])

# On a larger random table the emitted WHERE counts track the configured
# multinomial closely; see tests/test_acceptance.py for the chi-square check.
rng = np.random.default_rng(0)
wide = Table(
    id="wide",
    headers=[f"c{j}" for j in range(8)],
    rows=[
        [str(int(rng.integers(1, 5))) for _ in range(8)]
        for _ in range(120)
    ],
)
counts = Counter(
    len(sq.query.where) for sq in generate_sqls(wide, 300, SamplerConfig(seed=3)).queries
)
print("emitted WHERE counts on the wide table:", dict(sorted(counts.items())))
