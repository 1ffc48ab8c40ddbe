"""Independent brute-force references used by several test modules.

These deliberately avoid the package's vectorized kernels: everything is
scalar dict arithmetic driven by the published formulas, so agreement is
evidence rather than tautology.
"""

from __future__ import annotations

import math

from qemclust import BitString, ClusterModel, OutcomeDistribution, hamming_distance


def brute_force_joint(b: BitString, c: BitString, weight: float, p: float) -> float:
    hd = hamming_distance(b, c)
    n = b.width
    acc = weight
    for _ in range(hd):
        acc *= p
    for _ in range(n - hd):
        acc *= 1.0 - p
    return acc


def brute_force_redistribute(noisy: OutcomeDistribution, model: ClusterModel, p: float):
    """Scalar re-implementation of the redistribution step.

    Returns (pre_normalization_masses, removed_set, claims) where
    ``pre_normalization_masses`` maps every output bit-string to its mass
    before the final renormalization and ``claims`` maps each non-centroid
    input string to its raw joint-mass sum.
    """
    total = sum(w for _, w in noisy.items())
    probs = {b: w / total for b, w in noisy.items()}
    centroids = list(model.centroids)
    centroid_set = set(centroids)

    claims: dict[BitString, float] = {}
    masses: dict[BitString, float] = {}
    gains = [0.0] * len(centroids)
    removed = set()
    for b, pr in probs.items():
        if b in centroid_set:
            continue
        joints = [
            brute_force_joint(b, c, model.weights[i], p) for i, c in enumerate(centroids)
        ]
        claim = sum(joints)
        claims[b] = claim
        give = min(claim, pr)
        if claim > 0:
            for i, j in enumerate(joints):
                gains[i] += give * (j / claim)
        out = pr - give
        if out > 0:
            masses[b] = out
        else:
            removed.add(b)
    seen = set()
    for i, c in enumerate(centroids):
        mass = gains[i]
        if c in probs and c not in seen:
            mass += probs[c]
        seen.add(c)
        if mass > 0:
            masses[c] = masses.get(c, 0.0) + mass
    return masses, removed, claims


def shannon_entropy_bits(probs) -> float:
    return -sum(p * math.log2(p) for p in probs if p > 0)
