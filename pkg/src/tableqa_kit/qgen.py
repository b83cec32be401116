"""Generator input serialization and the deterministic template transcriber.

A query/answer/headers triple is linearized into a single line with special
marker tokens so an external sequence-to-sequence transcriber can consume it
(one input per line, one question per line out, same order). The template
transcriber is the built-in fallback: one phrasing family per return type,
keeping the select header and every WHERE value verbatim so downstream
entity linking always finds them.

Token layout (frozen for reproducibility)::

    [S] <OP> <select-header> [W] <header> <op> <value> ... [A] <answer>
    [C] <h1> [CS] <h2> [CS] ...
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import MalformedQGInput, SerializationError
from .sql import Answer, Op, RetType, SqlQuery
from .tables import Table

_OP_WORDS = {rt.name: rt for rt in RetType}
_SYMBOLS = {Op.EQ: "=", Op.GT: ">", Op.LT: "<"}


def format_scalar(x: float) -> str:
    """Integral scalars render without a decimal point (52456.0 -> "52456")."""
    return str(int(x)) if float(x).is_integer() else str(x)


def render_answer(a: Answer) -> str:
    if a.cells is not None:
        return "; ".join(a.cells)
    return format_scalar(a.scalar)


@dataclass(frozen=True)
class QGInput:
    """One serialized generator input line plus its source objects."""

    text: str
    query: SqlQuery
    answer: Answer
    headers: tuple[str, ...]


@dataclass(frozen=True)
class QGRecord:
    """A generator input paired with a question and an optional score."""

    input: QGInput
    question: str
    perplexity: float | None = None

    def __post_init__(self):
        if not self.question.strip():
            raise SerializationError("question is empty")
        if self.perplexity is not None and self.perplexity < 0:
            raise SerializationError("perplexity must be non-negative")

    def with_perplexity(self, score: float) -> "QGRecord":
        return replace(self, perplexity=float(score))


def serialize_qg_input(q: SqlQuery, a: Answer, t: Table) -> QGInput:
    """Linearize (query, answer, headers); the caller ensures a == execute(q, t)."""
    if not 0 <= q.select_col < t.n_cols:
        raise SerializationError(f"select column {q.select_col} out of range")
    parts = ["[S]", q.ret.name, t.headers[q.select_col]]
    for cl in q.where:
        if not 0 <= cl.col < t.n_cols:
            raise SerializationError(f"WHERE column {cl.col} out of range")
        parts += ["[W]", t.headers[cl.col], _SYMBOLS[cl.op], cl.value]
    parts += ["[A]", render_answer(a), "[C]"]
    for i, header in enumerate(t.headers):
        if i:
            parts.append("[CS]")
        parts.append(header)
    return QGInput(
        text=" ".join(parts), query=q, answer=a, headers=tuple(t.headers)
    )


@dataclass(frozen=True)
class ParsedQGInput:
    op: str
    select_header: str
    where: tuple[tuple[str, str, str], ...]  # (header, symbol, value)
    answer: str
    headers: tuple[str, ...]


def _split_clause(section: str, offset: int) -> tuple[str, str, str]:
    # leftmost padded operator symbol wins; headers containing " = " etc.
    # are outside the round-trip guarantee
    best = None
    for sym in ("=", ">", "<"):
        pos = section.find(f" {sym} ")
        if pos != -1 and (best is None or pos < best[0]):
            best = (pos, sym)
    if best is None:
        raise MalformedQGInput("WHERE section has no operator", offset)
    pos, sym = best
    return section[:pos], sym, section[pos + 3 :]


def parse_qg_input(text: str) -> ParsedQGInput:
    """Recover the fields of a serialized input; exact inverse of serialize."""
    if not text.startswith("[S] "):
        raise MalformedQGInput("input must start with '[S] '", 0)
    pos_a = text.find(" [A] ")
    if pos_a == -1:
        raise MalformedQGInput("missing '[A]' answer marker", len(text))
    pos_c = text.find(" [C] ", pos_a)
    if pos_c == -1:
        raise MalformedQGInput("missing '[C]' header marker", len(text))

    head = text[len("[S] ") : pos_a]
    sections = head.split(" [W] ")
    op, _, select_header = sections[0].partition(" ")
    if op not in _OP_WORDS:
        raise MalformedQGInput(f"unknown operation {op!r}", len("[S] "))
    if not select_header:
        raise MalformedQGInput("missing select header", len("[S] ") + len(op))
    where = []
    running = len("[S] ") + len(sections[0])
    for section in sections[1:]:
        running += len(" [W] ")
        where.append(_split_clause(section, running))
        running += len(section)

    answer = text[pos_a + len(" [A] ") : pos_c]
    headers = tuple(text[pos_c + len(" [C] ") :].split(" [CS] "))
    if any(not h for h in headers):
        raise MalformedQGInput("empty header in '[C]' section", pos_c)
    return ParsedQGInput(
        op=op,
        select_header=select_header,
        where=tuple(where),
        answer=answer,
        headers=headers,
    )


# --- template transcription ----------------------------------------------

_COND_TEMPLATES = {
    Op.EQ: "{col} is {val}",
    Op.GT: "{col} is larger than {val}",
    Op.LT: "{col} is smaller than {val}",
}

_QUESTION_HEADS = {
    RetType.SELECT: "what is the {col}",
    RetType.MAX: "what is the highest {col}",
    RetType.MIN: "what is the lowest {col}",
    RetType.SUM: "what is the total {col}",
    RetType.AVG: "what is the average {col}",
    RetType.COUNT: "how many {col}",
}


def template_transcribe(
    q: SqlQuery, t: Table, rng: np.random.Generator | None = None
) -> str:
    """Deterministic English question for a query.

    Scaffold words are lowercase; headers and values keep their original
    casing and appear verbatim. ``rng`` is a variation hook — the single
    phrasing family per return type leaves it unused.
    """
    del rng
    head = _QUESTION_HEADS[q.ret].format(col=t.headers[q.select_col])
    if not q.where:
        return head + "?"
    conds = ", and ".join(
        _COND_TEMPLATES[cl.op].format(col=t.headers[cl.col], val=cl.value)
        for cl in q.where
    )
    return f"{head} when {conds}?"
