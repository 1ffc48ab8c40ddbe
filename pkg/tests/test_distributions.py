import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qemclust import (
    BitString,
    OutcomeDistribution,
    hamming_distance,
    hellinger_fidelity,
    improvement_ratio,
    normalized_entropy,
)

B = BitString.from_text


def bitstrings(width: int):
    return st.integers(min_value=0, max_value=(1 << width) - 1).map(
        lambda v: BitString(v, width)
    )


def distributions(width: int, max_support: int = 8):
    return st.dictionaries(
        bitstrings(width),
        st.floats(min_value=1e-6, max_value=1.0),
        min_size=1,
        max_size=max_support,
    ).map(lambda d: OutcomeDistribution(width, d))


class TestBitString:
    def test_text_round_trip(self):
        assert B("111000").text == "111000"
        assert B("0001").value == 1
        assert B("0001").width == 4

    def test_leftmost_character_is_qubit_zero(self):
        b = B("10")
        assert b.bit(0) == 1
        assert b.bit(1) == 0

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            B("10a0")
        with pytest.raises(ValueError):
            B("")
        with pytest.raises(ValueError):
            BitString(4, 2)
        with pytest.raises(ValueError):
            BitString(0, 0)

    def test_ordering_matches_text_for_equal_width(self):
        assert B("0011") < B("0100")


class TestOutcomeDistribution:
    def test_total_and_probability_view(self):
        d = OutcomeDistribution.from_counts({"00": 3, "11": 1})
        assert d.total == 4
        assert d.probability(B("00")) == 0.75
        view = d.normalized()
        assert view.get(B("11")) == 0.25

    def test_rejects_mixed_widths(self):
        with pytest.raises(ValueError):
            OutcomeDistribution(2, {B("00"): 1, B("000"): 1})

    def test_rejects_negative_weight(self):
        with pytest.raises(ValueError):
            OutcomeDistribution(2, {B("00"): -1.0})

    def test_zero_total_has_no_probability_view(self):
        d = OutcomeDistribution(2, {B("00"): 0.0})
        with pytest.raises(ValueError):
            d.normalized()

    @given(distributions(5))
    def test_probability_view_sums_to_one(self, dist):
        assert abs(sum(w for _, w in dist.normalized().items()) - 1.0) < 1e-9


class TestHammingDistance:
    def test_identity_case(self):
        assert hamming_distance(B("111000"), B("111000")) == 0

    def test_worked_pair(self):
        assert hamming_distance(B("111000"), B("011010")) == 2

    def test_complement_case(self):
        assert hamming_distance(B("000000"), B("111111")) == 6

    def test_width_mismatch_rejected(self):
        with pytest.raises(ValueError):
            hamming_distance(B("00"), B("000"))

    @given(bitstrings(8), bitstrings(8), bitstrings(8))
    def test_is_a_metric(self, a, b, c):
        assert hamming_distance(a, a) == 0
        assert hamming_distance(a, b) == hamming_distance(b, a)
        assert hamming_distance(a, c) <= hamming_distance(a, b) + hamming_distance(b, c)
        if a != b:
            assert hamming_distance(a, b) > 0


class TestNormalizedEntropy:
    def test_degenerate_distribution(self):
        assert normalized_entropy(OutcomeDistribution.from_counts({"0000": 7})) == 0.0

    def test_uniform_is_max_entropy(self):
        full = {format(v, "04b"): 1 for v in range(16)}
        assert normalized_entropy(OutcomeDistribution.from_counts(full)) == pytest.approx(1.0)

    def test_one_bit_over_two_qubits(self):
        d = OutcomeDistribution.from_counts({"00": 0.5, "11": 0.5})
        assert normalized_entropy(d) == pytest.approx(0.5)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            normalized_entropy(OutcomeDistribution(3, {}))

    @given(distributions(4, max_support=6), st.randoms(use_true_random=False))
    def test_invariant_under_relabeling(self, dist, rnd):
        weights = [w for _, w in dist.items()]
        values = rnd.sample(range(16), len(weights))
        relabeled = OutcomeDistribution(
            4, {BitString(v, 4): w for v, w in zip(values, weights)}
        )
        assert normalized_entropy(relabeled) == pytest.approx(normalized_entropy(dist))


class TestHellingerFidelity:
    def test_self_fidelity_examples(self):
        d = OutcomeDistribution.from_counts({"01": 2, "10": 5})
        assert hellinger_fidelity(d, d) == pytest.approx(1.0)

    def test_disjoint_supports(self):
        a = OutcomeDistribution.from_counts({"00": 1})
        b = OutcomeDistribution.from_counts({"11": 1})
        assert hellinger_fidelity(a, b) == 0.0

    def test_hand_computed_overlap(self):
        a = OutcomeDistribution.from_counts({"0": 1.0})
        b = OutcomeDistribution.from_counts({"0": 0.5, "1": 0.5})
        assert hellinger_fidelity(a, b) == pytest.approx(0.5)

    def test_width_mismatch_rejected(self):
        with pytest.raises(ValueError):
            hellinger_fidelity(
                OutcomeDistribution.from_counts({"00": 1}),
                OutcomeDistribution.from_counts({"000": 1}),
            )

    @given(distributions(4), distributions(4))
    def test_symmetric_and_bounded(self, a, b):
        f = hellinger_fidelity(a, b)
        assert 0.0 <= f <= 1.0
        assert f == pytest.approx(hellinger_fidelity(b, a))

    @given(distributions(4))
    def test_self_fidelity_is_one(self, d):
        assert hellinger_fidelity(d, d) == pytest.approx(1.0, abs=1e-12)


class TestImprovementRatio:
    def test_no_change(self):
        assert improvement_ratio(0.5, 0.5) == 1.0

    def test_full_recovery_from_nothing(self):
        assert improvement_ratio(1.0, 0.0, 0.01) == pytest.approx(101.0)

    def test_geometric_mean_across_benchmarks(self):
        ratios = [improvement_ratio(m, n) for m, n in [(0.9, 0.5), (0.7, 0.7), (0.2, 0.4)]]
        gm = math.prod(ratios) ** (1 / len(ratios))
        assert gm == pytest.approx((ratios[0] * ratios[1] * ratios[2]) ** (1 / 3))

    def test_domain_checks(self):
        with pytest.raises(ValueError):
            improvement_ratio(1.2, 0.5)
        with pytest.raises(ValueError):
            improvement_ratio(0.5, 0.5, epsilon=0.0)
