"""Effective bit-flip error-rate estimation from circuit features.

A device run is summarized by eight features (circuit gate counts, the
entropy of its noisy output and the calibration-derived estimated success
probability); labels come from comparing the noisy and ideal output of a
reference string under the bit-flip model. An extremely-randomized-trees
regressor maps features to the rate. The trees are grown here rather
than borrowed so models serialize to a self-contained, versioned text
format with bit-exact round-trips and fixed hyperparameter semantics:
at each node a random subset of max(1, n_features // 3) non-constant
features is considered, one uniform-random threshold is drawn per
candidate inside the node's value range, and the split minimizing the
weighted child variance wins; nodes grow until pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .distributions import BitString, OutcomeDistribution, normalized_entropy
from .noise import NoiseSpec, SyntheticSpec, apply_bitflip, generate_ideal, sample_shots

__all__ = [
    "FEATURE_NAMES",
    "RATE_MIN",
    "RATE_MAX",
    "CircuitFeatures",
    "CalibrationSnapshot",
    "compute_esp",
    "effective_error_rate",
    "TreeEnsemble",
    "fit_tree_ensemble",
    "CrossValidationResult",
    "cross_validate",
    "make_synthetic_corpus",
]

# Order is part of the model-file contract; never reorder, only append.
FEATURE_NAMES = (
    "num_qubits",
    "num_measurements",
    "num_2q_gates",
    "num_sx_gates",
    "num_x_gates",
    "num_rz_gates",
    "entropy",
    "esp",
)

# Symmetric bit-flip rates above 0.5 are unidentifiable, so both labels
# and predictions are clamped to this range.
RATE_MIN = 0.0
RATE_MAX = 0.5


@dataclass(frozen=True)
class CircuitFeatures:
    """The feature vector for one circuit execution."""

    num_qubits: int
    num_measurements: int
    num_2q_gates: int
    num_sx_gates: int
    num_x_gates: int
    num_rz_gates: int
    entropy: float
    esp: float

    def __post_init__(self) -> None:
        counts = {
            "num_qubits": self.num_qubits,
            "num_measurements": self.num_measurements,
            "num_2q_gates": self.num_2q_gates,
            "num_sx_gates": self.num_sx_gates,
            "num_x_gates": self.num_x_gates,
            "num_rz_gates": self.num_rz_gates,
        }
        for name, v in counts.items():
            if v < 0:
                raise ValueError(f"{name} must be >= 0, got {v}")
        if self.num_qubits < 1:
            raise ValueError(f"num_qubits must be >= 1, got {self.num_qubits}")
        if self.num_measurements > self.num_qubits:
            raise ValueError(
                f"num_measurements ({self.num_measurements}) exceeds "
                f"num_qubits ({self.num_qubits})"
            )
        if not 0.0 <= self.entropy <= 1.0:
            raise ValueError(f"entropy must lie in [0, 1], got {self.entropy}")
        if not 0.0 <= self.esp <= 1.0:
            raise ValueError(f"esp must lie in [0, 1], got {self.esp}")

    def to_vector(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES], dtype=np.float64)


@dataclass(frozen=True)
class CalibrationSnapshot:
    """Per-gate-kind error rates and per-qubit readout error rates."""

    gate_errors: Mapping[str, float]
    readout_errors: tuple[float, ...]

    def __post_init__(self) -> None:
        for kind, rate in self.gate_errors.items():
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"gate error for {kind!r} must lie in [0, 1], got {rate}")
        for q, rate in enumerate(self.readout_errors):
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"readout error for qubit {q} must lie in [0, 1], got {rate}")


def compute_esp(
    gate_counts: Mapping[str, int],
    measured_qubits: Sequence[int],
    calibration: CalibrationSnapshot,
) -> float:
    """Estimated success probability from calibration data.

    Product over every gate instance of (1 - gate error rate) times the
    product over measured qubits of (1 - readout error rate).
    """
    esp = 1.0
    for kind, count in gate_counts.items():
        if count < 0:
            raise ValueError(f"gate count for {kind!r} must be >= 0, got {count}")
        if count == 0:
            continue
        if kind not in calibration.gate_errors:
            raise ValueError(f"calibration has no error rate for gate kind {kind!r}")
        esp *= (1.0 - calibration.gate_errors[kind]) ** count
    for q in measured_qubits:
        if not 0 <= q < len(calibration.readout_errors):
            raise ValueError(f"calibration has no readout error rate for qubit {q}")
        esp *= 1.0 - calibration.readout_errors[q]
    return esp


def effective_error_rate(ideal: OutcomeDistribution, noisy: OutcomeDistribution) -> float:
    """Single bit-flip rate explaining the damping of the ideal mode.

    Uses the highest-probability string b of the ideal distribution
    (ties broken toward the smallest value): under the bit-flip model its
    probability decays by (1 - p)^width, so
    p = 1 - (Pr_noisy(b) / Pr_ideal(b))^(1 / width). The result is clamped
    to [0, 0.5]; a mode that was never observed in the noisy data clamps
    to the maximum, a ratio above 1 (sampling fluctuation) to 0.
    """
    if ideal.width != noisy.width:
        raise ValueError(f"width mismatch: {ideal.width} != {noisy.width}")
    if ideal.total <= 0 or noisy.total <= 0:
        raise ValueError("distributions must have positive total weight")
    mode = min((b for b in ideal), key=lambda b: (-ideal.get(b), b.value))
    p_ideal = ideal.probability(mode)
    p_noisy = noisy.probability(mode)
    if p_noisy <= 0.0:
        return RATE_MAX
    ratio = p_noisy / p_ideal
    if ratio >= 1.0:
        return RATE_MIN
    return min(max(1.0 - ratio ** (1.0 / ideal.width), RATE_MIN), RATE_MAX)


@dataclass(frozen=True)
class _Tree:
    """Flat array form of one regression tree.

    ``feature[i] < 0`` marks a leaf whose prediction is ``value[i]``;
    internal nodes route samples with x[feature] < threshold to ``left``
    and the rest to ``right``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(len(X), dtype=np.float64)
        for i, x in enumerate(X):
            node = 0
            while self.feature[node] >= 0:
                if x[self.feature[node]] < self.threshold[node]:
                    node = self.left[node]
                else:
                    node = self.right[node]
            out[i] = self.value[node]
        return out


@dataclass(frozen=True)
class TreeEnsemble:
    """Extremely-randomized-trees regressor for the effective error rate."""

    trees: tuple[_Tree, ...]
    feature_names: tuple[str, ...]
    n_trees: int
    min_samples_leaf: int
    max_features: int
    seed: int
    importances: tuple[float, ...]

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise ValueError(
                f"expected feature matrix with {len(self.feature_names)} columns, "
                f"got shape {X.shape}"
            )
        acc = np.zeros(len(X), dtype=np.float64)
        for tree in self.trees:
            acc += tree.predict(X)
        return np.clip(acc / len(self.trees), RATE_MIN, RATE_MAX)

    def predict(self, features: CircuitFeatures) -> float:
        return float(self.predict_matrix(features.to_vector()[None, :])[0])

    def feature_importance(self) -> dict[str, float]:
        """Normalized mean decrease in weighted variance per split feature."""
        return dict(zip(self.feature_names, self.importances))


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    min_samples_leaf: int,
    max_features: int,
    importance_acc: np.ndarray,
) -> _Tree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    root = new_node()
    stack: list[tuple[int, np.ndarray]] = [(root, np.arange(len(y)))]
    while stack:
        node, idx = stack.pop()
        y_node = y[idx]
        value[node] = float(y_node.mean())
        if len(idx) < 2 * min_samples_leaf or np.all(y_node == y_node[0]):
            continue
        X_node = X[idx]
        lo = X_node.min(axis=0)
        hi = X_node.max(axis=0)
        candidates = np.flatnonzero(hi > lo)
        if len(candidates) == 0:
            continue
        if len(candidates) > max_features:
            candidates = rng.choice(candidates, size=max_features, replace=False)
        best = None
        parent_score = float(np.var(y_node)) * len(idx)
        for f in candidates:
            t = rng.uniform(lo[f], hi[f])
            mask = X_node[:, f] < t
            n_left = int(mask.sum())
            if n_left < min_samples_leaf or len(idx) - n_left < min_samples_leaf:
                continue
            score = float(np.var(y_node[mask])) * n_left + float(
                np.var(y_node[~mask])
            ) * (len(idx) - n_left)
            if best is None or score < best[0]:
                best = (score, int(f), float(t), mask)
        if best is None:
            continue
        score, f, t, mask = best
        importance_acc[f] += parent_score - score
        feature[node] = f
        threshold[node] = t
        left[node] = new_node()
        right[node] = new_node()
        stack.append((right[node], idx[~mask]))
        stack.append((left[node], idx[mask]))
    return _Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
    )


def _as_matrix(features) -> np.ndarray:
    if isinstance(features, np.ndarray):
        return np.asarray(features, dtype=np.float64)
    return np.array([f.to_vector() for f in features], dtype=np.float64)


def fit_tree_ensemble(
    features: "Sequence[CircuitFeatures] | np.ndarray",
    labels: Sequence[float],
    n_trees: int = 100,
    min_samples_leaf: int = 1,
    max_features: int | None = None,
    seed: int = 0,
) -> TreeEnsemble:
    """Grow the ensemble; deterministic for a fixed seed.

    ``max_features`` defaults to max(1, n_features // 3). Labels must lie
    in the identifiable rate range [0, 0.5].
    """
    X = _as_matrix(features)
    y = np.asarray(labels, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("training set must be a nonempty feature matrix")
    if len(X) != len(y):
        raise ValueError(f"{len(X)} feature rows but {len(y)} labels")
    if np.any((y < RATE_MIN) | (y > RATE_MAX)):
        raise ValueError(f"labels must lie in [{RATE_MIN}, {RATE_MAX}]")
    if n_trees < 1:
        raise ValueError(f"n_trees must be positive, got {n_trees}")
    if min_samples_leaf < 1:
        raise ValueError(f"min_samples_leaf must be positive, got {min_samples_leaf}")
    n_features = X.shape[1]
    if max_features is None:
        max_features = max(1, n_features // 3)
    if not 1 <= max_features <= n_features:
        raise ValueError(f"max_features must lie in [1, {n_features}], got {max_features}")

    streams = np.random.SeedSequence(seed).spawn(n_trees)
    importance_acc = np.zeros(n_features, dtype=np.float64)
    trees = tuple(
        _grow_tree(X, y, np.random.default_rng(s), min_samples_leaf, max_features, importance_acc)
        for s in streams
    )
    total = importance_acc.sum()
    importances = importance_acc / total if total > 0 else importance_acc
    return TreeEnsemble(
        trees=trees,
        feature_names=FEATURE_NAMES if n_features == len(FEATURE_NAMES) else tuple(
            f"f{i}" for i in range(n_features)
        ),
        n_trees=n_trees,
        min_samples_leaf=min_samples_leaf,
        max_features=max_features,
        seed=seed,
        importances=tuple(float(v) for v in importances),
    )


@dataclass(frozen=True)
class CrossValidationResult:
    mse: float
    r2: float
    fold_mse: tuple[float, ...]
    fold_r2: tuple[float, ...]


def cross_validate(
    features,
    labels: Sequence[float],
    folds: int = 5,
    seed: int = 0,
    n_trees: int = 100,
    min_samples_leaf: int = 1,
    max_features: int | None = None,
) -> CrossValidationResult:
    """K-fold cross-validation with held-out scoring.

    Fold membership is a seeded permutation, so results repeat exactly;
    every sample is scored by a model that never saw it.
    """
    X = _as_matrix(features)
    y = np.asarray(labels, dtype=np.float64)
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    if folds > len(X):
        raise ValueError(f"cannot split {len(X)} samples into {folds} folds")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(X))
    parts = np.array_split(order, folds)
    fold_mse: list[float] = []
    fold_r2: list[float] = []
    for i, test_idx in enumerate(parts):
        train_idx = np.concatenate([parts[j] for j in range(folds) if j != i])
        model = fit_tree_ensemble(
            X[train_idx],
            y[train_idx],
            n_trees=n_trees,
            min_samples_leaf=min_samples_leaf,
            max_features=max_features,
            seed=seed + i,
        )
        pred = model.predict_matrix(X[test_idx])
        resid = y[test_idx] - pred
        mse = float(np.mean(resid**2))
        denom = float(np.mean((y[test_idx] - y[test_idx].mean()) ** 2))
        fold_mse.append(mse)
        fold_r2.append(1.0 - mse / denom if denom > 0 else 0.0)
    return CrossValidationResult(
        mse=float(np.mean(fold_mse)),
        r2=float(np.mean(fold_r2)),
        fold_mse=tuple(fold_mse),
        fold_r2=tuple(fold_r2),
    )


def _spiked_ideal(width: int, rng: np.random.Generator) -> OutcomeDistribution:
    """High-entropy ideal with one dominant mode over a wide uniform tail.

    The tail spreads over a quarter to half of the space, so output
    entropy is high while the mode's damping (hence the rate label) stays
    identifiable: tail inflow into any single string is O(2^-width).
    """
    spike = float(rng.uniform(0.3, 0.6))
    d_tail = int(rng.integers(1 << max(width - 2, 1), (1 << max(width - 1, 1)) + 1))
    values: set[int] = set()
    while len(values) < d_tail + 1:
        draw = rng.integers(0, 1 << width, size=d_tail + 1 - len(values))
        values.update(int(v) for v in draw)
    ordered = sorted(values)
    mode = ordered[int(rng.integers(0, len(ordered)))]
    tail_w = (1.0 - spike) / (len(ordered) - 1)
    return OutcomeDistribution(
        width, {BitString(v, width): (spike if v == mode else tail_w) for v in ordered}
    )


def make_synthetic_corpus(
    n_samples: int, seed: int = 0, shots: int = 16384
) -> tuple[list[CircuitFeatures], np.ndarray]:
    """Desk-scale training corpus from the bit-flip simulator.

    Each sample draws a circuit profile (qubit count, measured subset,
    gate counts) and a calibration snapshot from documented ranges, sets
    the true flip rate from the per-measured-qubit success budget implied
    by the ESP, then labels the sample by running the simulator and
    inverting the mode damping. Gate-count ranges: 2q 5-150, sx 10-300,
    x 0-40, rz 20-400; error ranges: 2q 0.002-0.02, sx/x 1e-4-1e-3,
    rz 0 (virtual), readout 0.005-0.05.

    Three quarters of the ideals are low-entropy (1-4 dominant strings);
    the rest are spiked high-entropy outputs, which keeps the entropy
    feature ambiguous about the noise level the way mixed benchmark
    suites are.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be positive, got {n_samples}")
    rng = np.random.default_rng(seed)
    features: list[CircuitFeatures] = []
    labels = np.empty(n_samples, dtype=np.float64)
    for i in range(n_samples):
        num_qubits = int(rng.integers(4, 17))
        num_meas = int(rng.integers(3, min(num_qubits, 12) + 1))
        gate_counts = {
            "2q": int(rng.integers(5, 151)),
            "sx": int(rng.integers(10, 301)),
            "x": int(rng.integers(0, 41)),
            "rz": int(rng.integers(20, 401)),
        }
        calibration = CalibrationSnapshot(
            gate_errors={
                "2q": float(rng.uniform(0.002, 0.02)),
                "sx": float(rng.uniform(1e-4, 1e-3)),
                "x": float(rng.uniform(1e-4, 1e-3)),
                "rz": 0.0,
            },
            readout_errors=tuple(float(r) for r in rng.uniform(0.005, 0.05, size=num_qubits)),
        )
        esp = compute_esp(gate_counts, range(num_meas), calibration)
        true_rate = min(max(1.0 - esp ** (1.0 / num_meas), 0.005), 0.4)
        if rng.uniform() < 0.25:
            ideal = _spiked_ideal(num_meas, rng)
        else:
            ideal = generate_ideal(SyntheticSpec(num_meas, int(rng.integers(1, 5)), rng))
        noisy = apply_bitflip(sample_shots(ideal, shots, rng), NoiseSpec(true_rate, rng))
        features.append(
            CircuitFeatures(
                num_qubits=num_qubits,
                num_measurements=num_meas,
                num_2q_gates=gate_counts["2q"],
                num_sx_gates=gate_counts["sx"],
                num_x_gates=gate_counts["x"],
                num_rz_gates=gate_counts["rz"],
                entropy=normalized_entropy(noisy),
                esp=esp,
            )
        )
        labels[i] = effective_error_rate(ideal, noisy)
    return features, labels
