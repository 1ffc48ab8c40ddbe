"""Noise-aware reshaping of a noisy distribution around cluster centroids.

Every non-centroid bit-string owes each centroid the joint probability of
"the true outcome was that centroid and the channel flipped it here":
``(1-p)^(width-hd) * p^hd * cluster_weight``. The owed mass (capped at
what the string actually has) is moved onto the owning centroids, split
in proportion to the individual joint terms; strings whose entire mass is
explained away are removed. Because centroids collect the mass that the
noise smeared off them, a centroid never observed in the input can still
end up with positive probability, which is the point of voting centroids
instead of picking observed strings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ._packed import PackedDistribution, value_to_bits
from .clustering import ClusterModel
from .distributions import BitString, OutcomeDistribution, hamming_distance

__all__ = [
    "DegenerateMitigationError",
    "RedistributionResult",
    "joint_probability",
    "redistribute",
]


class DegenerateMitigationError(ValueError):
    """Raised when redistribution leaves no bit-string with positive mass."""


@dataclass(frozen=True)
class RedistributionResult:
    """Mitigated probability view plus removal diagnostics.

    ``per_string_subtractions`` records, for every non-centroid string of
    the input support, the raw joint-mass sum claimed against it (before
    capping at the string's own probability).
    """

    mitigated: OutcomeDistribution
    removed: frozenset[BitString]
    per_string_subtractions: Mapping[BitString, float]


def joint_probability(b: BitString, centroid: BitString, cluster_weight: float, flip_rate: float) -> float:
    """Probability of observing ``b`` while the true outcome is ``centroid``.

    Bit-flip likelihood times the centroid's cluster weight. With
    ``flip_rate`` 0 this is ``cluster_weight`` when the strings coincide
    and 0 otherwise.
    """
    if b.width != centroid.width:
        raise ValueError(f"width mismatch: {b.width} != {centroid.width}")
    if not 0.0 <= flip_rate <= 0.5:
        raise ValueError(f"flip_rate must lie in [0, 0.5], got {flip_rate}")
    if not 0.0 <= cluster_weight <= 1.0:
        raise ValueError(f"cluster_weight must lie in [0, 1], got {cluster_weight}")
    hd = hamming_distance(b, centroid)
    n = b.width
    if flip_rate == 0.0:
        return cluster_weight if hd == 0 else 0.0
    return (1.0 - flip_rate) ** (n - hd) * flip_rate**hd * cluster_weight


def _likelihood_table(width: int, flip_rate: float) -> np.ndarray:
    if flip_rate == 0.0:
        table = np.zeros(width + 1)
        table[0] = 1.0
        return table
    h = np.arange(width + 1)
    return (1.0 - flip_rate) ** (width - h) * flip_rate**h


def redistribute(noisy: OutcomeDistribution, model: ClusterModel, flip_rate: float) -> RedistributionResult:
    """Reassign noise-explained mass from the support onto the centroids.

    Returns the renormalized probability view. Raises
    DegenerateMitigationError when nothing survives (callers fall back to
    the unmitigated input).
    """
    if noisy.width != model.width:
        raise ValueError(f"width mismatch: {noisy.width} != {model.width}")
    if not 0.0 <= flip_rate <= 0.5:
        raise ValueError(f"flip_rate must lie in [0, 0.5], got {flip_rate}")
    if noisy.total <= 0:
        raise ValueError("distribution has zero total weight")
    if not model.centroids:
        raise ValueError("cluster model has no centroids")

    if flip_rate == 0.0:
        # a zero-rate channel explains no flips: every claim is zero, so
        # the input view passes through bit-exactly
        centroid_set = set(model.centroids)
        return RedistributionResult(
            noisy.normalized(),
            frozenset(),
            {b: 0.0 for b in noisy if b not in centroid_set},
        )

    packed = PackedDistribution(noisy)
    masses, removed_idx, centroid_masses, claims = _redistribute_packed(
        packed,
        np.array([value_to_bits(c.value, model.width) for c in model.centroids], dtype=np.uint8),
        np.array(model.weights, dtype=np.float64),
        flip_rate,
    )

    out: dict[BitString, float] = {}
    for i, b in enumerate(packed.strings):
        if masses[i] > 0:
            out[b] = float(masses[i])
    for c, m in zip(model.centroids, centroid_masses):
        if m > 0:
            # duplicate centroids (possible in unconverged models) accumulate
            out[c] = out.get(c, 0.0) + float(m)
    total = sum(out.values())
    if total <= 0:
        raise DegenerateMitigationError("redistribution removed every bit-string")
    mitigated = OutcomeDistribution(noisy.width, {b: m / total for b, m in out.items()})
    removed = frozenset(packed.strings[i] for i in removed_idx)
    subtractions = {
        packed.strings[i]: float(claims[i])
        for i in range(len(packed))
        if claims[i] is not None
    }
    return RedistributionResult(mitigated, removed, subtractions)


def _redistribute_packed(
    packed: PackedDistribution,
    centroid_bits: np.ndarray,
    cluster_weights: np.ndarray,
    flip_rate: float,
):
    """Array core shared with the mitigation engine.

    Returns (per-string surviving non-centroid masses, removed row indices,
    per-centroid masses, per-string raw claims with None on centroid rows).
    Masses are unnormalized but sum to the input's probability total.
    """
    pr = packed.weights / packed.total
    hd = packed.hamming_to(centroid_bits)
    joint = _likelihood_table(packed.width, flip_rate)[hd] * cluster_weights[None, :]

    centroid_values = [int("".join(map(str, row)), 2) for row in centroid_bits]
    value_row = {b.value: i for i, b in enumerate(packed.strings)}
    is_centroid = np.zeros(len(packed), dtype=bool)
    for v in centroid_values:
        row = value_row.get(v)
        if row is not None:
            is_centroid[row] = True

    claim = joint.sum(axis=1)
    give = np.minimum(claim, pr)
    give[is_centroid] = 0.0
    # split each string's surrendered mass across centroids in proportion
    # to their individual joint terms
    with np.errstate(invalid="ignore", divide="ignore"):
        share = np.where(claim[:, None] > 0, joint / claim[:, None], 0.0)
    gains = give @ share

    masses = pr - give
    masses[is_centroid] = 0.0  # centroid rows are reported separately
    removed_idx = [
        i for i in range(len(packed)) if not is_centroid[i] and masses[i] <= 0
    ]
    centroid_masses = gains.copy()
    seen: set[int] = set()
    for j, v in enumerate(centroid_values):
        row = value_row.get(v)
        if row is not None and v not in seen:
            centroid_masses[j] += pr[row]
        seen.add(v)
    claims = [None if is_centroid[i] else float(claim[i]) for i in range(len(packed))]
    return masses, removed_idx, centroid_masses, claims
