import numpy as np
import pytest

from tableqa_kit.tables import Table

# Five-row election results table used across the suite: two text columns
# and one comma-grouped numeric column.
ELECTION_HEADERS = ["Party", "Candidate", "Votes"]
ELECTION_ROWS = [
    ["Conservatives", "Andrew Turner", "32,717"],
    ["Liberal Democrats", "Anthony Rowlands", "19,739"],
    ["Labour", "Mark Chiverton", "11,484"],
    ["UK Independence", "Michael Tarrant", "2,352"],
    ["Independent", "Edward Corby", "551"],
]


@pytest.fixture
def election() -> Table:
    return Table(
        id="election",
        headers=list(ELECTION_HEADERS),
        rows=[list(r) for r in ELECTION_ROWS],
    )


def make_random_table(
    rng: np.random.Generator,
    table_id: str,
    n_cols: int,
    n_rows: int,
    empty_rate: float = 0.0,
    alphabet_range: tuple[int, int] = (3, 8),
) -> Table:
    """Mixed text/numeric table with small per-column alphabets.

    Small alphabets make repeated values (and therefore multi-row matches
    and minimality failures) common, which is what the sampler has to cope
    with. Roughly half the numeric cells are comma-grouped.
    """
    headers = [f"col{j}" for j in range(n_cols)]
    kinds = [rng.random() < 0.5 for j in range(n_cols)]  # True = numeric
    if not any(kinds):
        kinds[0] = True  # keep at least one numeric column for aggregates
    columns = []
    for j in range(n_cols):
        size = int(rng.integers(alphabet_range[0], alphabet_range[1] + 1))
        if kinds[j]:
            pool = [int(v) for v in rng.integers(1, 50_000, size=size)]
            cells = []
            for _ in range(n_rows):
                v = pool[int(rng.integers(size))]
                cells.append(f"{v:,}" if rng.random() < 0.5 else str(v))
        else:
            pool = [f"w{j}_{int(v)}" for v in rng.integers(0, 1000, size=size)]
            cells = [pool[int(rng.integers(size))] for _ in range(n_rows)]
        if empty_rate > 0:
            cells = [
                "" if rng.random() < empty_rate else c for c in cells
            ]
        columns.append(cells)
    rows = [[columns[j][i] for j in range(n_cols)] for i in range(n_rows)]
    return Table(id=table_id, headers=headers, rows=rows)
