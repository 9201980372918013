import random

import pytest

from gapmine.agreement import (
    PredictionCluster,
    category_profile,
    cluster_predictions,
    overlap_regions,
    region_key,
    unique_vs_shared,
)
from gapmine.errors import DataError
from gapmine.evaluation.cues import CueDictionary


def _cluster(cluster_id, models, representative="text"):
    members = tuple((m, f"{m}:{i}") for i, m in enumerate(models))
    return PredictionCluster(cluster_id=cluster_id, members=members,
                             representative=representative,
                             model_set=frozenset(models))


class TestClusterPredictions:
    def test_exact_duplicates_merge(self):
        preds = [("A", "The gap remains unknown."),
                 ("B", "The gap remains unknown.")]
        clusters = cluster_predictions(preds)
        assert len(clusters) == 1
        assert clusters[0].model_set == frozenset({"A", "B"})

    def test_normalized_duplicates_merge(self):
        preds = [("A", "The gaps remain unknown"),
                 ("B", "the gap REMAINED unknown!")]
        clusters = cluster_predictions(preds)
        assert len(clusters) == 1

    def test_dissimilar_stay_singletons(self):
        preds = [("A", "alpha beta gamma"), ("B", "delta epsilon zeta")]
        clusters = cluster_predictions(preds)
        assert len(clusters) == 2
        assert all(len(c.model_set) == 1 for c in clusters)

    def test_three_paraphrases_cluster(self):
        preds = [
            ("A", "No trial has evaluated drug C in children."),
            ("B", "No trial has evaluated drug C in small children."),
            ("A", "No controlled trial has evaluated drug C in children."),
        ]
        clusters = cluster_predictions(preds, sim_threshold=0.55)
        assert len(clusters) == 1
        assert clusters[0].model_set == frozenset({"A", "B"})
        assert len(clusters[0].members) == 3

    def test_pairwise_invariant_after_pruning(self):
        from gapmine.evaluation.rouge import rouge_l_f1
        rng = random.Random(11)
        vocab = ["gap", "remains", "unknown", "trial", "drug", "children",
                 "evidence", "missing", "unclear", "further"]
        preds = [("M" + str(rng.randint(0, 2)),
                  " ".join(rng.choice(vocab) for _ in range(rng.randint(2, 8))))
                 for _ in range(25)]
        threshold = 0.55
        clusters = cluster_predictions(preds, threshold)
        text_by_ref = {str(i): t for i, (_, t) in enumerate(preds)}
        for cluster in clusters:
            texts = [text_by_ref[ref] for _, ref in cluster.members]
            for i in range(len(texts)):
                for j in range(i + 1, len(texts)):
                    assert rouge_l_f1(texts[i], texts[j]) >= threshold

    def test_determinism(self):
        preds = [("A", "the gap remains"), ("B", "the gap remains here"),
                 ("C", "something else entirely")]
        first = cluster_predictions(preds)
        second = cluster_predictions(preds)
        assert first == second
        assert [c.cluster_id for c in first] == sorted(
            c.cluster_id for c in first)

    def test_threshold_monotonicity(self):
        rng = random.Random(23)
        vocab = ["gap", "remains", "unknown", "trial", "drug", "need"]
        preds = [("M", " ".join(rng.choice(vocab)
                                for _ in range(rng.randint(1, 6))))
                 for _ in range(15)]
        counts = [len(cluster_predictions(preds, t))
                  for t in (0.3, 0.5, 0.7, 0.9)]
        assert counts == sorted(counts)

    def test_representative_is_lowest_normalized_then_ref(self):
        preds = [("A", "zebra text here"), ("B", "Zebra text here")]
        clusters = cluster_predictions(preds)
        assert clusters[0].representative == "zebra text here"

    def test_custom_refs(self):
        preds = [("A", "identical text"), ("B", "identical text")]
        clusters = cluster_predictions(preds, refs=["a-7", "b-9"])
        assert clusters[0].members == (("A", "a-7"), ("B", "b-9"))


class TestOverlapRegions:
    def test_full_agreement_counts_in_four_way_region(self):
        models = ["A", "B", "C", "D"]
        clusters = [_cluster(f"c{i}", models) for i in range(5)]
        regions = overlap_regions(clusters, models)
        assert regions[region_key(models)] == 5
        assert sum(regions.values()) == 5
        assert len(regions) == 15  # 2^4 - 1

    def test_simple_enumeration(self):
        clusters = [_cluster("c0", ["A"]), _cluster("c1", ["B"]),
                    _cluster("c2", ["A", "B"])]
        regions = overlap_regions(clusters, ["A", "B"])
        assert regions == {"A": 1, "B": 1, "A&B": 1}

    def test_twenty_cluster_fixture_matches_hand_tally(self):
        memberships = (
            [["A"]] * 4 + [["B"]] * 3 + [["C"]] * 2 + [["D"]] * 1 +
            [["A", "B"]] * 3 + [["C", "D"]] * 2 + [["A", "B", "C"]] * 2 +
            [["A", "B", "C", "D"]] * 3
        )
        assert len(memberships) == 20
        clusters = [_cluster(f"c{i}", ms) for i, ms in enumerate(memberships)]
        regions = overlap_regions(clusters, ["A", "B", "C", "D"])
        assert regions["A"] == 4
        assert regions["A&B"] == 3
        assert regions["C&D"] == 2
        assert regions["A&B&C"] == 2
        assert regions["A&B&C&D"] == 3
        assert sum(regions.values()) == 20
        assert len(regions) == 15

    def test_clusters_outside_model_set_excluded(self):
        clusters = [_cluster("c0", ["X"]), _cluster("c1", ["A", "X"])]
        regions = overlap_regions(clusters, ["A", "B"])
        assert sum(regions.values()) == 1
        assert regions["A"] == 1

    def test_more_than_four_models_rejected(self):
        with pytest.raises(DataError):
            overlap_regions([], ["A", "B", "C", "D", "E"])

    def test_single_model_rejected(self):
        with pytest.raises(DataError):
            overlap_regions([], ["A"])


class TestUniqueVsShared:
    def test_single_model_all_unique(self):
        clusters = [_cluster(f"c{i}", ["A"]) for i in range(3)]
        assert unique_vs_shared(clusters) == {"A": (3, 0)}

    def test_all_multimodel_means_zero_unique(self):
        clusters = [_cluster(f"c{i}", ["A", "B"]) for i in range(4)]
        assert unique_vs_shared(clusters) == {"A": (0, 4), "B": (0, 4)}

    def test_half_shared_fixture(self):
        clusters = [_cluster(f"u{i}", ["A"]) for i in range(5)]
        clusters += [_cluster(f"s{i}", ["A", "B"]) for i in range(5)]
        out = unique_vs_shared(clusters)
        assert out["A"] == (5, 5)
        total_containing_a = sum(1 for c in clusters if "A" in c.model_set)
        assert out["A"][0] + out["A"][1] == total_containing_a


class TestCategoryProfile:
    DICT = CueDictionary(entries=(
        ("remains unknown", "levels_of_evidence"),
        ("open question", "research_aim"),
        ("hampered by", "barrier"),
    ))

    def test_single_model_leads_every_populated_axis(self):
        preds = {"A": ["X remains unknown.", "An open question stands."]}
        profile = category_profile(preds, self.DICT)
        assert profile.normalized["A"]["levels_of_evidence"] == 1.0
        assert profile.normalized["A"]["research_aim"] == 1.0
        assert profile.normalized["A"]["barrier"] == 0.0

    def test_ratio_between_models(self):
        preds = {
            "A": ["X remains unknown."] * 10,
            "B": ["Y remains unknown."] * 5,
        }
        profile = category_profile(preds, self.DICT)
        assert profile.normalized["A"]["levels_of_evidence"] == 1.0
        assert profile.normalized["B"]["levels_of_evidence"] == 0.5

    def test_uncategorized_tracked_separately(self):
        preds = {"A": ["nothing matches here", "X remains unknown."]}
        profile = category_profile(preds, self.DICT)
        assert profile.uncategorized["A"] == 1
        assert profile.counts["A"]["levels_of_evidence"] == 1
