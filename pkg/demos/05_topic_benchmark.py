# Topic assignment, topic similarity, and leave-one-out splits.
#
# Articles are mapped to main topics by walking child-to-parent category
# links upward: closest main topic wins, ties go to the topic reachable via
# more distinct shortest paths. The assignments drive topic similarity,
# vocabulary statistics, and the leave-one-out benchmark splits.

import numpy as np

from tableqa_kit import (
    DEFAULT_TOPIC_GROUPS,
    CategoryGraph,
    assign_topic,
    build_composite_dev,
    build_loo_splits,
    extract_topic_vocab,
    nearest_topics,
    topic_jaccard,
    vocab_overlap,
)

# A miniature category graph with a deliberate tie: TheMatch can reach both
# Sports and People in two hops, but Sports via two different parents.
edges = [
    ("TheMatch", "FootballCups"), ("TheMatch", "NationalTeams"), ("TheMatch", "Managers"),
    ("FootballCups", "Sports"), ("NationalTeams", "Sports"), ("Managers", "People"),
    ("TheBallad", "FolkMusic"), ("FolkMusic", "Music"), ("Music", "Culture"),
]
graph = CategoryGraph.from_edges(edges, ["Sports", "People", "Culture", "Music"])

print("TheMatch ->", assign_topic("TheMatch", graph))        # path count breaks the tie
print("TheBallad ->", assign_topic("TheBallad", graph))      # nearest main topic
print("TheBallad top-2:", nearest_topics("TheBallad", graph, k=2))

# Topic similarity from first-k assignments: the share of articles two
# topics have in common.
assignments = {
    "TheMatch": nearest_topics("TheMatch", graph, k=2),
    "TheBallad": nearest_topics("TheBallad", graph, k=2),
}
print("jaccard(Sports, People) =", topic_jaccard(assignments, "Sports", "People"))

# Vocabulary diagnostics: how much of a test topic's frequent wording was
# seen in training, and which topic words a base vocabulary is missing.
sports_qs = [f"who won game {i} by the largest score margin" for i in range(40)]
music_qs = [f"which album {i} had the highest chart position" for i in range(40)]
print("sports/sports overlap:", vocab_overlap(sports_qs, sports_qs, top_k=10))
print("music/sports overlap: ", vocab_overlap(music_qs, sports_qs, top_k=10))
print(
    "new topic words:",
    extract_topic_vocab(sports_qs, base_vocab={"who", "won", "by", "the"},
                        min_freq=10, max_terms=5),
)

# Leave-one-out splits: the target group is test-only; everything else keeps
# its original train/dev fold. The five shipped groups cover the 42 main
# topics.
print("groups:", {g: len(m) for g, m in DEFAULT_TOPIC_GROUPS.items()})
rng = np.random.default_rng(0)
groups = list(DEFAULT_TOPIC_GROUPS)
instances = [
    (f"i{k}", groups[int(rng.integers(5))], ("train", "dev", "test")[int(rng.integers(3))])
    for k in range(200)
]
split = build_loo_splits(instances, target="Politics")
print(f"Politics run: train={len(split.train)} dev={len(split.dev)} test={len(split.test)}")

# Model selection runs on a composite dev set: the source-topic dev ids plus
# an equal number of synthetic target-topic ids.
real_dev = split.dev
synthetic = [f"synthetic{k}" for k in range(500)]
composite = build_composite_dev(real_dev, synthetic, np.random.default_rng(42))
print(f"composite dev: {len(composite)} ids, "
      f"{sum(1 for x in composite if x.startswith('synthetic'))} synthetic")
