import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import qemclust.clustering as clustering
from qemclust import (
    BitString,
    ClusterConfig,
    EmptyClusterError,
    NoiseSpec,
    OutcomeDistribution,
    SyntheticSpec,
    apply_bitflip,
    cluster,
    generate_ideal,
    hamming_distance,
    outlier_threshold,
    qubitwise_majority_vote,
    sample_shots,
    select_initial_centroids,
)

B = BitString.from_text


class TestOutlierThreshold:
    def test_zero_at_zero_rate(self):
        assert outlier_threshold(14, 0.0) == 0

    def test_worked_example_value(self):
        # 6 qubits at 15% flip rate: 2 * 6 * 0.15 * 0.85 = 1.53 -> 2
        assert outlier_threshold(6, 0.15) == 2

    def test_integer_products_not_bumped(self):
        # 2 * 10 * 0.5 * 0.5 = 5.0 exactly
        assert outlier_threshold(10, 0.5) == 5

    def test_high_noise_value(self):
        assert outlier_threshold(14, 0.4) == 7


class TestSelectInitialCentroids:
    def test_unique_maximum(self):
        d = OutcomeDistribution.from_counts({"111000": 0.4, "011010": 0.3, "000001": 0.3})
        assert select_initial_centroids(d, 1) == [B("111000")]

    def test_tie_breaks_lexicographically(self):
        d = OutcomeDistribution.from_counts({"00": 0.5, "11": 0.5})
        assert select_initial_centroids(d, 1) == [B("00")]

    def test_top_k_ordering(self):
        d = OutcomeDistribution.from_counts({"10": 5, "01": 7, "11": 5, "00": 1})
        assert select_initial_centroids(d, 3) == [B("01"), B("10"), B("11")]

    def test_k_beyond_support_rejected(self):
        d = OutcomeDistribution.from_counts({"00": 1})
        with pytest.raises(ValueError):
            select_initial_centroids(d, 2)


class TestQubitwiseMajorityVote:
    def test_hand_counted_vote(self):
        members = OutcomeDistribution.from_counts({"110": 3, "100": 1})
        assert qubitwise_majority_vote(members) == B("110")

    def test_single_member_is_unanimous(self):
        members = OutcomeDistribution.from_counts({"0101": 17})
        assert qubitwise_majority_vote(members) == B("0101")

    def test_tie_keeps_incumbent(self):
        members = OutcomeDistribution.from_counts({"10": 2, "01": 2})
        assert qubitwise_majority_vote(members, incumbent=B("10")) == B("10")
        assert qubitwise_majority_vote(members, incumbent=B("01")) == B("01")

    def test_tie_without_incumbent_falls_to_zero(self):
        members = OutcomeDistribution.from_counts({"10": 2, "01": 2})
        assert qubitwise_majority_vote(members) == B("00")

    def test_empty_cluster_signaled(self):
        with pytest.raises(EmptyClusterError):
            qubitwise_majority_vote(OutcomeDistribution(3, {}))

    def test_shot_weighting(self):
        # one string observed 50 times outvotes three distinct singletons
        members = OutcomeDistribution.from_counts({"1111": 50, "0000": 1, "0001": 1, "0010": 1})
        assert qubitwise_majority_vote(members) == B("1111")


def _noisy_instance(width, dominant, rate, shots, seed):
    rng = np.random.default_rng(seed)
    ideal = generate_ideal(SyntheticSpec(width, dominant, rng))
    return ideal, apply_bitflip(sample_shots(ideal, shots, rng), NoiseSpec(rate, rng))


class TestCluster:
    def test_zero_rate_makes_singletons(self):
        d = OutcomeDistribution.from_counts({"000": 5, "011": 3, "110": 2})
        model = cluster(d, ClusterConfig(k=3, flip_rate=0.0))
        assert model.threshold == 0
        assert set(model.centroids) == {B("000"), B("011"), B("110")}
        assert all(model.assignments[c] == i for i, c in enumerate(model.centroids))
        assert not model.outliers

    def test_threshold_filters_distant_strings(self):
        # single centroid at 111000; strings beyond distance 2 stay outliers
        d = OutcomeDistribution.from_counts(
            {"111000": 50, "111010": 5, "011010": 4, "000111": 3}
        )
        model = cluster(d, ClusterConfig(k=1, flip_rate=0.15))
        assert model.threshold == 2
        assert model.centroids == (B("111000"),)
        assert B("111010") in model.assignments
        assert B("011010") in model.assignments  # distance exactly 2
        assert B("000111") in model.outliers
        assert model.weights[0] == pytest.approx(59 / 62)

    def test_single_cluster_recovers_dominant_string(self):
        ideal, noisy = _noisy_instance(10, 1, 0.1, 4096, seed=14)
        truth = next(iter(ideal))
        model = cluster(noisy, ClusterConfig(k=1, flip_rate=0.1))
        assert model.centroids == (truth,)

    def test_vote_recovery_rate_under_noise(self):
        # maximum-likelihood behavior: the voted centroid finds the planted
        # string in almost every seeded replay
        hits = 0
        for seed in range(20):
            ideal, noisy = _noisy_instance(8, 1, 0.2, 4096, seed=seed)
            model = cluster(noisy, ClusterConfig(k=1, flip_rate=0.2))
            hits += model.centroids == (next(iter(ideal)),)
        assert hits >= 19

    def test_assigned_members_respect_threshold(self):
        _, noisy = _noisy_instance(8, 3, 0.2, 2048, seed=5)
        model = cluster(noisy, ClusterConfig(k=3, flip_rate=0.2))
        for b, idx in model.assignments.items():
            assert hamming_distance(b, model.centroids[idx]) <= model.threshold

    def test_centroids_are_a_vote_fixed_point(self):
        _, noisy = _noisy_instance(8, 2, 0.15, 2048, seed=6)
        model = cluster(noisy, ClusterConfig(k=2, flip_rate=0.15))
        assert model.converged
        for i, c in enumerate(model.centroids):
            members = OutcomeDistribution(
                noisy.width,
                {b: noisy.get(b) for b, idx in model.assignments.items() if idx == i},
            )
            assert qubitwise_majority_vote(members, incumbent=c) == c

    def test_deterministic(self):
        _, noisy = _noisy_instance(9, 4, 0.25, 2048, seed=7)
        a = cluster(noisy, ClusterConfig(k=4, flip_rate=0.25))
        b = cluster(noisy, ClusterConfig(k=4, flip_rate=0.25))
        assert a == b

    def test_weights_exclude_outlier_mass(self):
        _, noisy = _noisy_instance(8, 2, 0.3, 2048, seed=8)
        model = cluster(noisy, ClusterConfig(k=2, flip_rate=0.3))
        assigned = sum(noisy.get(b) for b in model.assignments)
        assert sum(model.weights) == pytest.approx(assigned / noisy.total)
        assert sum(model.weights) <= 1.0 + 1e-12

    def test_k_beyond_support_rejected(self):
        d = OutcomeDistribution.from_counts({"00": 1, "01": 1})
        with pytest.raises(ValueError):
            cluster(d, ClusterConfig(k=3, flip_rate=0.1))

    def test_starved_clusters_are_dropped(self, monkeypatch):
        # collapse every vote onto one row to force duplicate centroids;
        # the duplicate loses all members on reassignment and is dropped
        def collapse(packed, mask, incumbent):
            return packed.bits[packed.top_order()[0]].copy()

        monkeypatch.setattr(clustering, "_vote_rows", collapse)
        d = OutcomeDistribution.from_counts({"0000": 10, "1111": 8, "0011": 5})
        model = cluster(d, ClusterConfig(k=3, flip_rate=0.25))
        assert model.requested_k == 3
        assert model.k < 3
        assert model.centroids == (B("0000"),)

    @given(st.integers(min_value=0, max_value=50))
    @settings(max_examples=15, deadline=None)
    def test_model_invariants_on_random_instances(self, seed):
        rng = np.random.default_rng(seed)
        ideal = generate_ideal(SyntheticSpec(6, int(rng.integers(1, 5)), rng))
        noisy = apply_bitflip(sample_shots(ideal, 512, rng), NoiseSpec(0.2, rng))
        k = int(rng.integers(1, min(4, len(noisy)) + 1))
        model = cluster(noisy, ClusterConfig(k=k, flip_rate=0.2))
        assert 1 <= model.k <= k
        assert len(model.weights) == model.k
        for b, idx in model.assignments.items():
            assert hamming_distance(b, model.centroids[idx]) <= model.threshold
        assert set(model.assignments) | set(model.outliers) == set(noisy)
        assert not set(model.assignments) & set(model.outliers)


class TestClusterConfigValidation:
    def test_bounds(self):
        with pytest.raises(ValueError):
            ClusterConfig(k=0, flip_rate=0.1)
        with pytest.raises(ValueError):
            ClusterConfig(k=1, flip_rate=0.7)
        with pytest.raises(ValueError):
            ClusterConfig(k=1, flip_rate=0.1, max_rounds=0)
