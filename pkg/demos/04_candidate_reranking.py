# Entity linking and candidate reranking.
#
# A semantic parser proposes several logical forms per question; the top one
# by parser probability is often wrong while a better form sits at rank 2-5.
# Twelve features per candidate (six string-match linking scores plus six
# form/answer statistics) feed a small boosted-tree classifier that reorders
# the candidates.

import numpy as np

from tableqa_kit import (
    Candidate,
    Op,
    RetType,
    SqlQuery,
    WhereClause,
    entity_features,
    featurize,
    link,
    rerank,
    train,
)
from tableqa_kit.tables import Table

table = Table(
    id="countries",
    headers=["Country", "Capital", "Population"],
    rows=[
        ["United Kingdom", "London", "67,000,000"],
        ["United States", "Washington", "332,000,000"],
        ["United Arab Emirates", "Abu Dhabi", "9,900,000"],
        ["France", "Paris", "68,000,000"],
    ],
)

# Partial matches carry a ratio (matched tokens / entity tokens) and a
# certainty (1 / number of entities sharing the matched tokens).
for l in link("what States have the most people?", table):
    print(f"  {l.entity_kind.value:<6} {l.entity_text:<22} ratio={l.match_ratio:.2f} "
          f"certainty={l.certainty:.2f}")

question = "what is the Capital when Country is United States?"
good = Candidate(
    q=SqlQuery(ret=RetType.SELECT, select_col=1,
               where=(WhereClause(col=0, op=Op.EQ, value="United States"),)),
    model_prob=0.41,
)
bad = Candidate(
    q=SqlQuery(ret=RetType.SELECT, select_col=2,
               where=(WhereClause(col=1, op=Op.EQ, value="Paris"),)),
    model_prob=0.46,  # the parser actually prefers this one
)
for name, c in (("good", good), ("bad", bad)):
    cells, headers = entity_features(question, table, c.q)
    print(f"{name}: cell features {cells}, header features {headers}")
    print(f"{name}: full vector {featurize(question, table, c).to_array()}")

# Train on synthetic labeled vectors where linking quality separates correct
# from incorrect forms, then let the model overrule the parser order.
rng = np.random.default_rng(1)
examples = []
for _ in range(300):
    for label, (lo, hi) in ((1, (1.5, 3.0)), (0, (0.0, 1.0))):
        examples.append((
            featurize(question, table, good if label else bad).__class__(
                cell_match_count=float(rng.integers(1, 4)) if label else 0.0,
                cell_ratio_sum=float(rng.uniform(lo, hi)),
                cell_certainty_sum=float(rng.uniform(lo, hi)),
                header_match_count=float(rng.integers(1, 4)) if label else 0.0,
                header_ratio_sum=float(rng.uniform(lo, hi)),
                header_certainty_sum=float(rng.uniform(lo, hi)),
                model_prob=float(rng.uniform()),
                answer_cell_count=1.0,
                has_count=0.0,
                has_select=1.0,
                where_count=1.0,
                repeated_columns=0.0,
            ),
            label,
        ))
model = train(examples, n_trees=40)
print("training loss first/last:", round(model.train_losses[0], 4),
      round(model.train_losses[-1], 4))

chosen = rerank(question, table, [bad, good], model)
print("parser preferred the wrong form; reranker picked select_col =",
      chosen.q.select_col, "(1 = Capital)")
