"""Add-k smoothed n-gram scorer and perplexity-based question filtering.

The n-gram model is the built-in default behind the pluggable scorer
contract (questions in, one decimal score per line out); any stronger
language model can replace it through the same line protocol.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence, TypeVar

from .errors import EmptyCorpus, EmptySentence
from .qgen import QGRecord
from .textnorm import simple_tokens

_BOS = "<s>"
_UNK = "<unk>"

_R = TypeVar("_R")


@dataclass(frozen=True)
class NGramLM:
    """Word n-gram model with add-k smoothing.

    ``vocab_size`` counts distinct trained words; the unknown-word token adds
    one smoothing class on top, so a model with no counts at all assigns
    every token probability 1/(vocab_size+1).
    """

    n: int
    k: float
    vocab: frozenset[str]
    counts: dict[tuple[str, ...], int] = field(default_factory=dict)
    context_counts: dict[tuple[str, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"order must be 2 or 3, got {self.n}")
        if self.k <= 0:
            raise ValueError("smoothing constant must be positive")

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def prob(self, context: tuple[str, ...], word: str) -> float:
        classes = self.vocab_size + 1  # + the unknown-word class
        num = self.counts.get(context + (word,), 0) + self.k
        den = self.context_counts.get(context, 0) + self.k * classes
        return num / den


def train_ngram_lm(corpus: Sequence[str], n: int = 3, k: float = 0.1) -> NGramLM:
    """Count n-grams over lowercased whitespace tokens with start padding."""
    if not corpus:
        raise EmptyCorpus("language-model corpus is empty")
    vocab: set[str] = set()
    counts: Counter = Counter()
    context_counts: Counter = Counter()
    for sentence in corpus:
        toks = simple_tokens(sentence)
        vocab.update(toks)
        padded = [_BOS] * (n - 1) + toks
        for i in range(len(toks)):
            ctx = tuple(padded[i : i + n - 1])
            counts[ctx + (toks[i],)] += 1
            context_counts[ctx] += 1
    return NGramLM(
        n=n, k=k, vocab=frozenset(vocab),
        counts=dict(counts), context_counts=dict(context_counts),
    )


def perplexity(lm: NGramLM, sentence: str) -> float:
    """exp of the mean negative log probability over the sentence tokens.

    Out-of-vocabulary words map to the unknown token in both contexts and
    targets. Whitespace-only differences do not change the score.
    """
    toks = simple_tokens(sentence)
    if not toks:
        raise EmptySentence(f"no tokens in {sentence!r}")
    mapped = [w if w in lm.vocab else _UNK for w in toks]
    padded = [_BOS] * (lm.n - 1) + mapped
    nll = 0.0
    for i in range(len(mapped)):
        ctx = tuple(padded[i : i + lm.n - 1])
        nll -= math.log(lm.prob(ctx, mapped[i]))
    return math.exp(nll / len(mapped))


def filter_by_scores(
    records: Sequence[_R], scores: Sequence[float], keep_fraction: float
) -> list[_R]:
    """Keep the ceil(keep_fraction * N) lowest-scoring records, order stable."""
    if not 0 < keep_fraction <= 1:
        raise ValueError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    if len(scores) != len(records):
        raise ValueError("scores and records are not aligned")
    if not records:
        return []
    keep = math.ceil(keep_fraction * len(records))
    ranked = sorted(range(len(records)), key=lambda i: (scores[i], i))
    kept = sorted(ranked[:keep])
    return [records[i] for i in kept]


def filter_questions(
    records: Sequence[QGRecord],
    scorer: Callable[[str], float],
    keep_fraction: float = 0.9,
) -> list[QGRecord]:
    """Score every question and drop the highest-perplexity tail.

    The survivors are a subsequence of the input; ties are broken by
    original position, so ``keep_fraction=1`` is the identity.
    """
    scores = [float(scorer(r.question)) for r in records]
    return filter_by_scores(records, scores, keep_fraction)
