"""Cross-model agreement analytics.

Predictions from several models are clustered into near-duplicate
groups using the same ROUGE-L similarity as gold matching: texts are
normalized (lowercase, punctuation stripped, stemmed), exact-normalized
duplicates merge first, remaining pairs at or above the threshold merge
single-link, and a final clique-pruning pass re-partitions any cluster
containing a below-threshold pair so that members are pairwise similar.
All steps run over sorted inputs, so output is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

from .errors import DataError
from .evaluation.cues import CATEGORIES, CueDictionary, classify_category
from .evaluation.rouge import rouge_l_from_tokens
from .evaluation.textnorm import tokenize

DEFAULT_CLUSTER_THRESHOLD = 0.55


@dataclass(frozen=True)
class PredictionCluster:
    cluster_id: str
    members: tuple[tuple[str, str], ...]  # (model_id, prediction_ref)
    representative: str
    model_set: frozenset[str]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def cluster_predictions(
    preds: Sequence[tuple[str, str]],
    sim_threshold: float = DEFAULT_CLUSTER_THRESHOLD,
    refs: Sequence[str] | None = None,
) -> list[PredictionCluster]:
    """Cluster (model_id, text) predictions into similarity cliques.

    ``refs`` optionally supplies stable member identifiers; the default
    is the input position.
    """
    if not 0 < sim_threshold <= 1:
        raise ValueError("sim_threshold must be in (0, 1]")
    if refs is None:
        refs = [str(i) for i in range(len(preds))]
    if len(refs) != len(preds):
        raise ValueError("refs must parallel preds")

    # Stage 1: merge exact-normalized duplicates into nodes.
    node_key_to_index: dict[str, int] = {}
    node_tokens: list[tuple[str, ...]] = []
    node_members: list[list[tuple[str, str, str]]] = []  # (model, ref, text)
    for (model_id, text), ref in zip(preds, refs):
        tokens = tuple(tokenize(text))
        key = " ".join(tokens)
        if key not in node_key_to_index:
            node_key_to_index[key] = len(node_tokens)
            node_tokens.append(tokens)
            node_members.append([])
        node_members[node_key_to_index[key]].append((model_id, ref, text))

    n = len(node_tokens)
    sim_cache: dict[tuple[int, int], float] = {}

    def sim(i: int, j: int) -> float:
        key = (i, j) if i < j else (j, i)
        if key not in sim_cache:
            sim_cache[key] = rouge_l_from_tokens(node_tokens[key[0]],
                                                 node_tokens[key[1]])
        return sim_cache[key]

    # Stage 2: single-link merge over the sorted pair list.
    uf = _UnionFind(n)
    for i, j in combinations(range(n), 2):
        if sim(i, j) >= sim_threshold:
            uf.union(i, j)

    components: dict[int, list[int]] = {}
    for i in range(n):
        components.setdefault(uf.find(i), []).append(i)

    # Stage 3: clique pruning. Within each component, greedily grow
    # cliques in sorted node order; a node joins only if it clears the
    # threshold against every current member.
    cliques: list[list[int]] = []
    for root in sorted(components):
        nodes = sorted(components[root],
                       key=lambda i: (" ".join(node_tokens[i]), i))
        remaining = list(nodes)
        while remaining:
            seed = remaining.pop(0)
            clique = [seed]
            still = []
            for candidate in remaining:
                if all(sim(candidate, member) >= sim_threshold
                       for member in clique):
                    clique.append(candidate)
                else:
                    still.append(candidate)
            remaining = still
            cliques.append(clique)

    clusters = []
    for clique in cliques:
        members: list[tuple[str, str, str]] = []
        for node in clique:
            members.extend(node_members[node])
        members.sort(key=lambda m: (" ".join(tokenize(m[2])), m[1]))
        representative = members[0][2]
        clusters.append((
            " ".join(tokenize(representative)),
            members[0][1],
            PredictionCluster(
                cluster_id="",
                members=tuple((m[0], m[1]) for m in members),
                representative=representative,
                model_set=frozenset(m[0] for m in members),
            ),
        ))
    clusters.sort(key=lambda c: (c[0], c[1]))
    return [
        PredictionCluster(
            cluster_id=f"c{idx:04d}",
            members=cluster.members,
            representative=cluster.representative,
            model_set=cluster.model_set,
        )
        for idx, (_, _, cluster) in enumerate(clusters)
    ]


def region_key(models: Sequence[str]) -> str:
    return "&".join(sorted(models))


def overlap_regions(
    clusters: Sequence[PredictionCluster],
    models: Sequence[str],
) -> dict[str, int]:
    """Venn-region counts over up to four models.

    Every non-empty subset of ``models`` appears as a key (sorted ids
    joined by '&'); each cluster counts toward exactly the region of its
    model-set intersection with ``models``. Clusters disjoint from
    ``models`` are excluded.
    """
    models = list(dict.fromkeys(models))
    if not 2 <= len(models) <= 4:
        raise DataError("region enumeration supports 2 to 4 models")
    regions: dict[str, int] = {}
    for size in range(1, len(models) + 1):
        for subset in combinations(sorted(models), size):
            regions[region_key(subset)] = 0
    model_set = set(models)
    for cluster in clusters:
        present = cluster.model_set & model_set
        if present:
            regions[region_key(tuple(present))] += 1
    return regions


def unique_vs_shared(
    clusters: Sequence[PredictionCluster],
) -> dict[str, tuple[int, int]]:
    """Per model: (clusters only it produced, clusters shared with others)."""
    out: dict[str, list[int]] = {}
    for cluster in clusters:
        solo = len(cluster.model_set) == 1
        for model in cluster.model_set:
            counts = out.setdefault(model, [0, 0])
            counts[0 if solo else 1] += 1
    return {model: (u, s) for model, (u, s) in sorted(out.items())}


@dataclass(frozen=True)
class CategoryProfile:
    counts: dict[str, dict[str, int]]        # model -> category -> count
    normalized: dict[str, dict[str, float]]  # per-axis max normalization
    uncategorized: dict[str, int]


def category_profile(
    preds_by_model: Mapping[str, Sequence[str]],
    dictionary: CueDictionary,
) -> CategoryProfile:
    """Count predictions per five-way category per model, then normalize
    each axis by its maximum across models (the axis leader scores 1.0).
    Predictions matching no cue are tallied separately."""
    counts: dict[str, dict[str, int]] = {}
    uncategorized: dict[str, int] = {}
    for model in sorted(preds_by_model):
        per_cat = {cat: 0 for cat in CATEGORIES}
        missing = 0
        for text in preds_by_model[model]:
            category = classify_category(text, dictionary)
            if category is None:
                missing += 1
            else:
                per_cat[category] += 1
        counts[model] = per_cat
        uncategorized[model] = missing
    normalized: dict[str, dict[str, float]] = {}
    for model in counts:
        normalized[model] = {}
        for cat in CATEGORIES:
            axis_max = max(counts[m][cat] for m in counts)
            normalized[model][cat] = (
                counts[model][cat] / axis_max if axis_max else 0.0
            )
    return CategoryProfile(counts=counts, normalized=normalized,
                           uncategorized=uncategorized)
