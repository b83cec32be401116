"""String-match entity linking between questions and table contents.

A table entity is every distinct cell value and header. Matching is
bag-of-words: an entity links to a question when at least one of its tokens
(lowercased, punctuation-stripped) appears among the question tokens.

Each link carries two scores:

* match ratio — matched entity tokens / total entity tokens, so a partial
  match like "States" against "United States" scores 0.5;
* certainty — 1 / (number of table entities whose token sets contain the
  matched tokens), so "United" against three United-* entities scores 1/3.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Sequence

from .sql import SqlQuery
from .tables import Table
from .textnorm import clean_tokens


class EntityKind(enum.Enum):
    CELL = "cell"
    HEADER = "header"


@dataclass(frozen=True)
class EntityLink:
    entity_text: str
    entity_kind: EntityKind
    match_ratio: float
    certainty: float


def _entity_pool(t: Table) -> list[tuple[str, EntityKind, frozenset[str]]]:
    """Distinct table entities (headers then cells) with their token sets."""
    pool = []
    seen: set[str] = set()
    for header in t.headers:
        if header not in seen:
            seen.add(header)
            pool.append((header, EntityKind.HEADER, frozenset(clean_tokens(header))))
    for row in t.rows:
        for cell in row:
            if cell not in seen:
                seen.add(cell)
                pool.append((cell, EntityKind.CELL, frozenset(clean_tokens(cell))))
    return pool


def _score(
    text: str,
    kind: EntityKind,
    tokens: frozenset[str],
    question_tokens: set[str],
    pool: list[tuple[str, EntityKind, frozenset[str]]],
) -> EntityLink | None:
    matched = tokens & question_tokens
    if not matched:
        return None
    # ambiguity: pool entities whose tokens contain everything we matched;
    # an entity absent from the pool counts itself (certainty stays in (0,1])
    ambiguity = sum(1 for _, _, toks in pool if matched <= toks)
    return EntityLink(
        entity_text=text,
        entity_kind=kind,
        match_ratio=len(matched) / len(tokens),
        certainty=1.0 / max(ambiguity, 1),
    )


def link(question: str, t: Table) -> list[EntityLink]:
    """All table entities sharing at least one token with the question."""
    question_tokens = set(clean_tokens(question))
    pool = _entity_pool(t)
    out = []
    for text, kind, tokens in pool:
        scored = _score(text, kind, tokens, question_tokens, pool)
        if scored is not None:
            out.append(scored)
    return out


def dump_links(links: Sequence[EntityLink], path) -> None:
    """Debug dump, one JSON object per link, for eyeballing match quality."""
    with open(path, "w", encoding="utf-8") as fh:
        for l in links:
            fh.write(
                json.dumps(
                    {
                        "entity": l.entity_text,
                        "kind": l.entity_kind.value,
                        "match_ratio": l.match_ratio,
                        "certainty": l.certainty,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def entity_features(
    question: str, t: Table, q: SqlQuery
) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    """Link only the entities the query references; two (count, ratio-sum,
    certainty-sum) triples, cells first then headers.

    Cell entities are the WHERE values; header entities are the select and
    WHERE column headers. Ambiguity is still counted against the full table
    pool.
    """
    question_tokens = set(clean_tokens(question))
    pool = _entity_pool(t)

    cell_entities = []
    seen: set[str] = set()
    for cl in q.where:
        if cl.value not in seen:
            seen.add(cl.value)
            cell_entities.append(cl.value)
    header_entities = []
    seen = set()
    for col in [q.select_col] + [cl.col for cl in q.where]:
        header = t.headers[col]
        if header not in seen:
            seen.add(header)
            header_entities.append(header)

    def triple(entities: list[str], kind: EntityKind) -> tuple[float, float, float]:
        count, ratio_sum, certainty_sum = 0, 0.0, 0.0
        for text in entities:
            tokens = frozenset(clean_tokens(text))
            if not tokens:
                continue
            scored = _score(text, kind, tokens, question_tokens, pool)
            if scored is None:
                continue
            count += 1
            ratio_sum += scored.match_ratio
            certainty_sum += scored.certainty
        return float(count), ratio_sum, certainty_sum

    return triple(cell_entities, EntityKind.CELL), triple(header_entities, EntityKind.HEADER)
