"""Topic assignment over a category graph and topic-shift split construction.

Articles are assigned to main topics by upward breadth-first search through
the child-to-parent category links: nearest main topic wins, ties go to the
topic reachable by more distinct shortest paths, remaining ties break
lexicographically. On top of the assignments the module computes topic
Jaccard similarity, vocabulary statistics, and leave-one-out splits.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    EmptyInput,
    MalformedInput,
    UnknownTopic,
    UnknownTopicGroup,
    Unreachable,
)
from .textnorm import clean_tokens

# The five topic groups and their member main topics; the grouping ships as
# fixed configuration (the clustering that produced it is external tooling).
DEFAULT_TOPIC_GROUPS: dict[str, tuple[str, ...]] = {
    "Politics": (
        "Crime", "Geography", "Government", "Law", "Military", "Policy",
        "Politics", "Society", "World",
    ),
    "Culture": (
        "Entertainment", "Events", "History", "Human behavior", "Humanities",
        "Life", "Culture", "Mass media", "Music", "Organizations",
    ),
    "Sports": ("Sports",),
    "People": ("People",),
    "Misc": (
        "Academic disciplines", "Business", "Concepts", "Economy", "Education",
        "Energy", "Engineering", "Food and Drink", "Health", "Industry",
        "Knowledge", "Language", "Mathematics", "Mind", "Objects",
        "Philosophy", "Religion", "Nature", "Science and technology",
        "Universe",
    ),
}


@dataclass(frozen=True)
class CategoryGraph:
    """Directed child-to-parent category links plus the main-topic set."""

    parents: dict[str, tuple[str, ...]]
    main_topics: frozenset[str]

    def __post_init__(self):
        if not self.main_topics:
            raise MalformedInput("category graph needs at least one main topic")

    @property
    def nodes(self) -> set[str]:
        out = set(self.parents)
        for ps in self.parents.values():
            out.update(ps)
        out.update(self.main_topics)
        return out

    @classmethod
    def from_edges(
        cls, edges: Iterable[tuple[str, str]], main_topics: Iterable[str]
    ) -> "CategoryGraph":
        parents: dict[str, set[str]] = {}
        for child, parent in edges:
            parents.setdefault(child, set()).add(parent)
        return cls(
            parents={c: tuple(sorted(ps)) for c, ps in parents.items()},
            main_topics=frozenset(main_topics),
        )

    @classmethod
    def from_files(cls, edges_path, main_topics_path) -> "CategoryGraph":
        """Edge-list TSV ``child<TAB>parent`` plus one main topic per line."""
        edges = []
        with open(edges_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or not parts[0] or not parts[1]:
                    raise MalformedInput(f"{edges_path}:{lineno}: expected child<TAB>parent")
                edges.append((parts[0], parts[1]))
        with open(main_topics_path, encoding="utf-8") as fh:
            topics = [line.strip() for line in fh if line.strip()]
        return cls.from_edges(edges, topics)


def nearest_topics(article: str, g: CategoryGraph, k: int = 1) -> list[str]:
    """Up to k main topics ordered by (distance, -shortest-path count, name).

    Cycles are handled by visited-set semantics: each node is expanded once,
    and path counts accumulate over shortest paths only.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if article not in g.nodes:
        raise Unreachable(f"unknown node {article!r}")
    found: list[str] = []
    dist = {article: 0}
    count = {article: 1}
    layer = [article]
    while layer and len(found) < k:
        next_counts: dict[str, int] = {}
        for node in layer:
            for parent in g.parents.get(node, ()):
                if parent in dist:  # already settled in an earlier layer
                    continue
                next_counts[parent] = next_counts.get(parent, 0) + count[node]
        depth = dist[layer[0]] + 1
        for node, c in next_counts.items():
            dist[node] = depth
            count[node] = c
        hits = sorted(
            (n for n in next_counts if n in g.main_topics),
            key=lambda n: (-count[n], n),
        )
        found.extend(hits)
        layer = sorted(next_counts)
    if article in g.main_topics:
        found.insert(0, article)
    if not found:
        raise Unreachable(f"no main topic reachable from {article!r}")
    return found[:k]


def assign_topic(article: str, g: CategoryGraph) -> str:
    """The unique nearest main topic under the documented tie-breaks."""
    return nearest_topics(article, g, k=1)[0]


def topic_jaccard(
    assignments: Mapping[str, Sequence[str]], a: str, b: str
) -> float:
    """|articles listing both a and b| / |articles listing a or b|.

    ``assignments`` maps each article to its first-k nearest topics.
    """
    in_a = {art for art, topics in assignments.items() if a in topics}
    in_b = {art for art, topics in assignments.items() if b in topics}
    if not in_a:
        raise UnknownTopic(f"topic {a!r} not present in assignments")
    if not in_b:
        raise UnknownTopic(f"topic {b!r} not present in assignments")
    return len(in_a & in_b) / len(in_a | in_b)


def vocab_overlap(
    train_qs: Sequence[str], test_qs: Sequence[str], top_k: int = 100
) -> float:
    """Percentage of the test set's top-k frequent words seen in training.

    Frequency ties at the cutoff break lexicographically, so the result is
    deterministic.
    """
    if not train_qs or not test_qs:
        raise EmptyInput("both question lists must be non-empty")
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    test_freq = Counter()
    for s in test_qs:
        test_freq.update(clean_tokens(s))
    if not test_freq:
        raise EmptyInput("test questions contain no words")
    ranked = sorted(test_freq.items(), key=lambda kv: (-kv[1], kv[0]))
    top = [w for w, _ in ranked[:top_k]]
    train_vocab = set()
    for s in train_qs:
        train_vocab.update(clean_tokens(s))
    hit = sum(1 for w in top if w in train_vocab)
    return 100.0 * hit / len(top)


def overlap_matrix(
    questions_by_topic: Mapping[str, Sequence[str]], top_k: int = 100
) -> dict[str, dict[str, float]]:
    """Pairwise test-topic x train-topic vocabulary overlap percentages."""
    topics = sorted(questions_by_topic)
    return {
        test: {
            train: vocab_overlap(questions_by_topic[train], questions_by_topic[test], top_k)
            for train in topics
        }
        for test in topics
    }


def extract_topic_vocab(
    corpus: Sequence[str],
    base_vocab: set[str],
    min_freq: int = 15,
    max_terms: int = 1000,
) -> list[str]:
    """Frequent target-topic words missing from a base vocabulary.

    Keeps words occurring strictly more than ``min_freq`` times, sorted by
    descending frequency then lexicographically, truncated to ``max_terms``.
    """
    if not corpus:
        raise EmptyInput("corpus is empty")
    if min_freq < 1 or max_terms < 1:
        raise ValueError("min_freq and max_terms must be >= 1")
    freq = Counter()
    for s in corpus:
        freq.update(clean_tokens(s))
    qualified = [
        (w, c) for w, c in freq.items() if c > min_freq and w not in base_vocab
    ]
    qualified.sort(key=lambda kv: (-kv[1], kv[0]))
    return [w for w, _ in qualified[:max_terms]]


@dataclass(frozen=True)
class TopicSplit:
    """Leave-one-out split: the target group is test-only."""

    target_topic: str
    train: tuple[str, ...]
    dev: tuple[str, ...]
    test: tuple[str, ...]
    topic_groups: dict[str, tuple[str, ...]] = field(
        default_factory=lambda: dict(DEFAULT_TOPIC_GROUPS)
    )

    def __post_init__(self):
        overlap = set(self.train) & set(self.test)
        if overlap:
            raise MalformedInput(f"train/test overlap: {sorted(overlap)[:3]}")


def build_loo_splits(
    instances: Sequence[tuple[str, str, str]],
    target: str,
    topic_groups: Mapping[str, tuple[str, ...]] | None = None,
) -> TopicSplit:
    """Cut one leave-one-out split from (id, topic-group, fold) records.

    Every target-group instance goes to test regardless of its original
    fold; other groups keep their original train/dev tags, and their test
    instances are excluded entirely (they belong to other targets' runs).
    """
    groups_present = {group for _, group, _ in instances}
    if target not in groups_present:
        raise UnknownTopicGroup(
            f"target {target!r} not among instance groups {sorted(groups_present)}"
        )
    train, dev, test = [], [], []
    for inst_id, group, fold in instances:
        if group == target:
            test.append(inst_id)
        elif fold == "train":
            train.append(inst_id)
        elif fold == "dev":
            dev.append(inst_id)
        elif fold != "test":
            raise MalformedInput(f"unknown fold tag {fold!r} for {inst_id!r}")
    return TopicSplit(
        target_topic=target,
        train=tuple(train),
        dev=tuple(dev),
        test=tuple(test),
        topic_groups=dict(topic_groups or DEFAULT_TOPIC_GROUPS),
    )
