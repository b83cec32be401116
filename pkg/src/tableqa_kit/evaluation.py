"""Answer-accuracy scoring with the analysis slices used for reporting.

Predictions are compared to gold answers with the executor's equality rules
and broken down by gold question type and gold WHERE-clause count whenever
gold queries are available.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LengthMismatch
from .sql import Answer, SqlQuery, answers_equal

_TYPE_ORDER = ("select", "count", "min", "max", "sum", "avg")


def answer_accuracy(preds: Sequence[Answer], golds: Sequence[Answer]) -> float:
    """Percentage of index-aligned pairs judged equal."""
    if len(preds) != len(golds):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(golds)} golds")
    if not preds:
        return 0.0
    hits = sum(1 for p, g in zip(preds, golds) if answers_equal(p, g))
    return 100.0 * hits / len(preds)


@dataclass(frozen=True)
class Bucket:
    n: int
    correct: int

    @property
    def accuracy(self) -> float:
        return 100.0 * self.correct / self.n if self.n else 0.0


@dataclass(frozen=True)
class EvalReport:
    """Overall accuracy plus per-type and per-WHERE-count buckets.

    The buckets partition the instances, so the count-weighted mean of any
    bucket family reproduces the overall accuracy.
    """

    n: int
    correct: int
    by_type: dict[str, Bucket]
    by_where: dict[int, Bucket]

    @property
    def overall(self) -> float:
        return 100.0 * self.correct / self.n if self.n else 0.0

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "overall": round(self.overall, 2),
            "by_type": {
                k: {"n": b.n, "accuracy": round(b.accuracy, 2)}
                for k, b in self.by_type.items()
            },
            "by_where_count": {
                str(k): {"n": b.n, "accuracy": round(b.accuracy, 2)}
                for k, b in self.by_where.items()
            },
        }

    def to_text(self) -> str:
        lines = [f"overall  {self.overall:6.2f}  (n={self.n})"]
        if self.by_type:
            lines.append("by question type:")
            for name in _TYPE_ORDER:
                if name in self.by_type:
                    b = self.by_type[name]
                    lines.append(f"  {name:<7} {b.accuracy:6.2f}  (n={b.n})")
        if self.by_where:
            lines.append("by WHERE count:")
            for k in sorted(self.by_where):
                b = self.by_where[k]
                lines.append(f"  {k:<7} {b.accuracy:6.2f}  (n={b.n})")
        return "\n".join(lines)


def sliced_report(
    instances: Sequence[tuple[SqlQuery | None, Answer, Answer]]
) -> EvalReport:
    """Score (gold query, gold answer, predicted answer) triples.

    Slices are bucketed by the gold query; when any gold query is missing
    (answer-only datasets) the slices are omitted rather than inferred.
    """
    n = len(instances)
    correct = 0
    have_queries = all(q is not None for q, _, _ in instances) and n > 0
    type_hits: dict[str, list[int]] = {}
    where_hits: dict[int, list[int]] = {}
    for q, gold, pred in instances:
        ok = int(answers_equal(pred, gold))
        correct += ok
        if have_queries:
            tname = q.ret.value
            type_hits.setdefault(tname, []).append(ok)
            where_hits.setdefault(len(q.where), []).append(ok)
    return EvalReport(
        n=n,
        correct=correct,
        by_type={k: Bucket(n=len(v), correct=sum(v)) for k, v in type_hits.items()},
        by_where={k: Bucket(n=len(v), correct=sum(v)) for k, v in where_hits.items()},
    )


def build_composite_dev(
    real: Sequence[str],
    synthetic: Sequence[str],
    rng: np.random.Generator,
) -> list[str]:
    """Model-selection ids: all real ids plus an equal number of synthetic
    ids sampled without replacement (all of them when supply is short)."""
    take = min(len(real), len(synthetic))
    picked: list[str] = []
    if take:
        idx = rng.choice(len(synthetic), size=take, replace=False)
        picked = [synthetic[int(i)] for i in idx]
    return list(real) + picked
