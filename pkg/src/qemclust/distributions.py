"""Bit-string outcome distributions and the metrics defined over them.

Measurement results are sparse maps from fixed-width bit-strings to
nonnegative weights. Weights are shot counts on ingestion and real-valued
probabilities after mitigation; both live in the same container and the
probability view is obtained by dividing by the total weight.

Bit-order convention: character position ``i`` (counted from the left) of
the textual form denotes qubit ``i``. The mitigation algorithms are
order-invariant, so this only matters for file round-trips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping

__all__ = [
    "BitString",
    "OutcomeDistribution",
    "hamming_distance",
    "normalized_entropy",
    "hellinger_fidelity",
    "improvement_ratio",
]


@dataclass(frozen=True, order=True)
class BitString:
    """One measured outcome: ``width`` bits packed into an integer.

    Instances are immutable, hashable and totally ordered (numerically by
    ``value``, which for equal widths coincides with lexicographic order of
    the textual form).
    """

    value: int
    width: int

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ValueError(f"width must be a positive integer, got {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"value {self.value} does not fit in {self.width} bits")

    @classmethod
    def from_text(cls, text: str) -> "BitString":
        """Parse a textual bit-string such as ``"111000"``."""
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a bit-string: {text!r}")
        return cls(int(text, 2), len(text))

    @property
    def text(self) -> str:
        return format(self.value, f"0{self.width}b")

    def bit(self, i: int) -> int:
        """Value of qubit ``i`` (position ``i`` from the left of ``text``)."""
        if not 0 <= i < self.width:
            raise IndexError(f"qubit index {i} out of range for width {self.width}")
        return (self.value >> (self.width - 1 - i)) & 1

    def __str__(self) -> str:
        return self.text


class OutcomeDistribution:
    """Sparse distribution over bit-strings of one common width.

    Immutable value object: all mutating access goes through constructors.
    Weights must be nonnegative; ``total`` is their sum. Operations that
    need a probability view require ``total > 0``.
    """

    __slots__ = ("_width", "_entries", "_total")

    def __init__(self, width: int, entries: Mapping[BitString, float]):
        if width < 1:
            raise ValueError(f"width must be a positive integer, got {width}")
        store: dict[BitString, float] = {}
        total = 0.0
        for b, w in entries.items():
            if b.width != width:
                raise ValueError(
                    f"bit-string {b.text!r} has width {b.width}, expected {width}"
                )
            w = float(w)
            if w < 0 or not math.isfinite(w):
                raise ValueError(f"weight for {b.text!r} must be finite and >= 0, got {w}")
            store[b] = w
            total += w
        self._width = width
        self._entries = store
        self._total = total

    @classmethod
    def from_counts(cls, counts: Mapping[str, float], width: int | None = None) -> "OutcomeDistribution":
        """Build from textual keys, inferring the width when not given."""
        if width is None:
            if not counts:
                raise ValueError("cannot infer width from an empty mapping")
            width = len(next(iter(counts)))
        return cls(width, {BitString.from_text(k): v for k, v in counts.items()})

    @property
    def width(self) -> int:
        return self._width

    @property
    def total(self) -> float:
        return self._total

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[BitString]:
        return iter(self._entries)

    def __contains__(self, b: BitString) -> bool:
        return b in self._entries

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OutcomeDistribution):
            return NotImplemented
        return self._width == other._width and self._entries == other._entries

    def __repr__(self) -> str:
        return f"OutcomeDistribution(width={self._width}, n={len(self._entries)}, total={self._total:g})"

    def items(self):
        return self._entries.items()

    def get(self, b: BitString, default: float = 0.0) -> float:
        return self._entries.get(b, default)

    def probability(self, b: BitString) -> float:
        if self._total <= 0:
            raise ValueError("distribution has zero total weight")
        return self._entries.get(b, 0.0) / self._total

    def normalized(self) -> "OutcomeDistribution":
        """Probability view: every weight divided by the total."""
        if self._total <= 0:
            raise ValueError("distribution has zero total weight")
        out = OutcomeDistribution.__new__(OutcomeDistribution)
        out._width = self._width
        out._entries = {b: w / self._total for b, w in self._entries.items()}
        out._total = 1.0
        return out

    def is_integral(self, tol: float = 1e-9) -> bool:
        """True when every weight is (numerically) a nonnegative integer."""
        return all(abs(w - round(w)) <= tol for w in self._entries.values())


def hamming_distance(a: BitString, b: BitString) -> int:
    """Number of positions at which two equal-width bit-strings differ."""
    if a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} != {b.width}")
    return (a.value ^ b.value).bit_count()


def normalized_entropy(dist: OutcomeDistribution) -> float:
    """Shannon entropy of the probability view divided by the qubit count.

    Lies in [0, 1]; zero-probability entries contribute nothing. The
    maximum 1.0 is reached by the uniform distribution over all 2^width
    bit-strings.
    """
    if dist.total <= 0:
        raise ValueError("distribution has zero total weight")
    h = 0.0
    for _, w in dist.items():
        if w > 0:
            p = w / dist.total
            h -= p * math.log2(p)
    return h / dist.width


def hellinger_fidelity(p: OutcomeDistribution, q: OutcomeDistribution) -> float:
    """Squared Bhattacharyya coefficient (sum over sqrt(p_i * q_i))^2.

    Computed over the union of supports of the probability views, so
    distributions with different supports compare naturally; absent
    bit-strings contribute zero. Symmetric, in [0, 1], and equal to 1
    exactly when the probability views coincide.
    """
    if p.width != q.width:
        raise ValueError(f"width mismatch: {p.width} != {q.width}")
    if p.total <= 0 or q.total <= 0:
        raise ValueError("distributions must have positive total weight")
    small, big = (p, q) if len(p) <= len(q) else (q, p)
    acc = 0.0
    for b, w in small.items():
        v = big.get(b)
        if w > 0 and v > 0:
            acc += math.sqrt((w / small.total) * (v / big.total))
    return min(acc * acc, 1.0)


def improvement_ratio(hf_mitigated: float, hf_noisy: float, epsilon: float = 0.01) -> float:
    """Regularized fidelity ratio (hf_mitigated + eps) / (hf_noisy + eps).

    Values above 1 mean mitigation helped. The regularization constant
    keeps ratios finite when fidelities approach zero and makes geometric
    averaging across benchmarks well behaved.
    """
    if not 0.0 <= hf_mitigated <= 1.0 or not 0.0 <= hf_noisy <= 1.0:
        raise ValueError("fidelities must lie in [0, 1]")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return (hf_mitigated + epsilon) / (hf_noisy + epsilon)
