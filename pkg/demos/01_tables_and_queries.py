# Tables, column typing, and the query executor.
#
# Everything downstream runs against the Table type: a rectangular grid of
# string cells with one inferred type (text or real) per column. This demo
# builds a small election-results table and runs the SQL subset against it.

from tableqa_kit import (
    Answer,
    Op,
    RetType,
    SqlQuery,
    Table,
    WhereClause,
    answers_equal,
    execute,
    infer_column_type,
    parse_sql,
    render_sql,
)

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

# "32,717" parses as a number (commas are thousands grouping), so Votes is
# typed real while the other two columns stay text.
print("column types:", [dt.value for dt in table.col_types])
print("a lone check:", infer_column_type(["1,234", "55"]).value)

# A query is a return operator, a select column, and up to four WHERE
# clauses ANDed together.
who_ran = SqlQuery(
    ret=RetType.SELECT,
    select_col=1,
    where=(WhereClause(col=0, op=Op.EQ, value="Labour"),),
)
print(render_sql(who_ran, table), "->", execute(who_ran, table).cells)

# Comparisons only exist on numeric columns; values compare numerically,
# so the comma-grouped threshold matches the raw cells.
big_sum = SqlQuery(
    ret=RetType.SUM,
    select_col=2,
    where=(WhereClause(col=2, op=Op.GT, value="11,484"),),
)
print(render_sql(big_sum, table), "->", execute(big_sum, table).scalar)

# Equality for answers: cells compare case-insensitively in order, scalars
# within a relative tolerance.
print(
    "case-insensitive:",
    answers_equal(Answer.of_cells(["Mark Chiverton"]), Answer.of_cells(["mark chiverton"])),
)

# The canonical rendering round-trips, which is how query fixtures and the
# candidate logs store logical forms.
text = render_sql(big_sum, table)
assert parse_sql(text, table) == big_sum
print("round-tripped:", text)
