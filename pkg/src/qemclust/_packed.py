"""Internal dense views of sparse distributions for the clustering kernels.

The hot loops (nearest-centroid assignment, majority votes, joint-mass
tables) all operate on a (n_strings, width) uint8 bit matrix plus a float
weight vector. Packing happens once per mitigation run and the resulting
arrays are shared across all cluster counts.
"""

from __future__ import annotations

import numpy as np

from .distributions import BitString, OutcomeDistribution

__all__ = ["PackedDistribution", "bits_to_value", "value_to_bits"]


def value_to_bits(value: int, width: int) -> np.ndarray:
    return np.frombuffer(format(value, f"0{width}b").encode(), dtype=np.uint8) - ord("0")


def bits_to_value(row: np.ndarray) -> int:
    v = 0
    for bit in row:
        v = (v << 1) | int(bit)
    return v


class PackedDistribution:
    """Array view of an OutcomeDistribution, sorted by bit-string value."""

    __slots__ = ("width", "strings", "weights", "bits", "total", "_top_order")

    def __init__(self, dist: OutcomeDistribution):
        if dist.total <= 0:
            raise ValueError("distribution has zero total weight")
        strings = sorted(dist, key=lambda b: b.value)
        self.width = dist.width
        self.strings = strings
        self.weights = np.array([dist.get(b) for b in strings], dtype=np.float64)
        blob = "".join(b.text for b in strings).encode()
        self.bits = (np.frombuffer(blob, dtype=np.uint8) - ord("0")).reshape(len(strings), dist.width)
        self.total = float(self.weights.sum())
        self._top_order: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.strings)

    def top_order(self) -> np.ndarray:
        """Row indices sorted by descending weight, ties by ascending value."""
        if self._top_order is None:
            # rows are already value-sorted, so a stable sort on -weight
            # leaves ties in ascending value order
            self._top_order = np.argsort(-self.weights, kind="stable")
        return self._top_order

    def hamming_to(self, centroid_bits: np.ndarray) -> np.ndarray:
        """(n, k) Hamming distances between every row and every centroid row."""
        return (self.bits[:, None, :] ^ centroid_bits[None, :, :]).sum(axis=2, dtype=np.int64)

    def string_for_bits(self, row: np.ndarray) -> BitString:
        return BitString(bits_to_value(row), self.width)
