"""Top-level mitigation: iterative cluster-count discovery plus sweeps.

The iterative mode reruns clustering and redistribution with k = 1, 2, ...
and stops once the Hellinger fidelity between two successive outputs
exceeds the stop threshold, returning the earlier of the pair (the last
cluster added did not change anything, so it was not needed). k is capped
by the number of unique bit-strings observed. A fixed-k mode runs exactly
one pass for callers that know the number of dominant outcomes a priori.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._packed import PackedDistribution
from .clustering import _cluster_packed, outlier_threshold
from .distributions import (
    BitString,
    OutcomeDistribution,
    hellinger_fidelity,
    improvement_ratio,
)
from .noise import NoiseSpec, SyntheticSpec, apply_bitflip, generate_ideal, sample_shots
from .redistribution import DegenerateMitigationError, _redistribute_packed

__all__ = [
    "MitigationConfig",
    "IterationRecord",
    "MitigationReport",
    "mitigate",
    "SweepCell",
    "ExperimentRecord",
    "run_trial",
    "sweep",
    "cell_means",
]


@dataclass(frozen=True)
class MitigationConfig:
    """Error rate, stopping threshold and mode for one mitigation run.

    ``fixed_k`` of None selects the iterative mode. ``max_rounds`` caps the
    assignment/vote rounds inside each clustering pass.
    """

    flip_rate: float
    stop_threshold: float = 0.95
    fixed_k: int | None = None
    max_rounds: int = 100

    def __post_init__(self) -> None:
        if not 0.0 <= self.flip_rate <= 0.5:
            raise ValueError(f"flip_rate must lie in [0, 0.5], got {self.flip_rate}")
        if not 0.0 < self.stop_threshold < 1.0:
            raise ValueError(
                f"stop_threshold must lie in (0, 1), got {self.stop_threshold}"
            )
        if self.fixed_k is not None and self.fixed_k < 1:
            raise ValueError(f"fixed_k must be >= 1, got {self.fixed_k}")
        if self.max_rounds < 1:
            raise ValueError(f"max_rounds must be positive, got {self.max_rounds}")


@dataclass(frozen=True)
class IterationRecord:
    """One k-iteration: its output and the fidelity to the previous output.

    For k = 1 the fidelity is measured against the noisy input view; it is
    recorded for diagnostics but never triggers termination. ``degenerate``
    marks iterations whose redistribution removed everything and fell back
    to the unmitigated view.
    """

    k: int
    centroids: tuple[BitString, ...]
    distribution: OutcomeDistribution
    hf_to_previous: float
    degenerate: bool = False


@dataclass(frozen=True)
class MitigationReport:
    final: OutcomeDistribution
    k_used: int
    iterations: tuple[IterationRecord, ...]
    terminated_by: str  # "convergence" | "k_max" | "fixed"

    @property
    def final_record(self) -> IterationRecord:
        for rec in self.iterations:
            if rec.k == self.k_used:
                return rec
        raise LookupError(f"no iteration record for k={self.k_used}")


def _one_pass(
    packed: PackedDistribution,
    noisy_view: OutcomeDistribution,
    k: int,
    theta: int,
    flip_rate: float,
    max_rounds: int,
) -> tuple[OutcomeDistribution, tuple[BitString, ...]]:
    """Cluster at the given k and redistribute; raises on degenerate output."""
    centroid_bits, weights, _nearest, _outlier, _conv, _rounds = _cluster_packed(
        packed, k, theta, max_rounds
    )
    centroids = tuple(packed.string_for_bits(row) for row in centroid_bits)
    if flip_rate == 0.0:
        # zero-rate channel: redistribution is the identity, bit-exactly
        return noisy_view, centroids
    masses, _removed, centroid_masses, _claims = _redistribute_packed(
        packed, centroid_bits, weights, flip_rate
    )
    out: dict[BitString, float] = {}
    for i, b in enumerate(packed.strings):
        if masses[i] > 0:
            out[b] = float(masses[i])
    for c, m in zip(centroids, centroid_masses):
        if m > 0:
            out[c] = out.get(c, 0.0) + float(m)
    total = sum(out.values())
    if total <= 0:
        raise DegenerateMitigationError("redistribution removed every bit-string")
    return (
        OutcomeDistribution(packed.width, {b: m / total for b, m in out.items()}),
        centroids,
    )


def mitigate(noisy: OutcomeDistribution, cfg: MitigationConfig) -> MitigationReport:
    """Mitigate a noisy counts (or probability) distribution.

    Iterative mode: run k = 1, 2, ... and return the previous iteration's
    output as soon as HF(current, previous) exceeds the stop threshold;
    when k reaches the number of unique bit-strings without converging,
    the last output is returned. Fixed mode: one pass at the configured k
    (capped at the unique-string count). Deterministic for identical
    inputs and configuration.
    """
    if noisy.total <= 0:
        raise ValueError("distribution has zero total weight")
    packed = PackedDistribution(noisy)
    theta = outlier_threshold(noisy.width, cfg.flip_rate)
    noisy_view = noisy.normalized()

    if cfg.fixed_k is not None:
        k = min(cfg.fixed_k, len(packed))
        try:
            out, centroids = _one_pass(packed, noisy_view, k, theta, cfg.flip_rate, cfg.max_rounds)
            degenerate = False
        except DegenerateMitigationError:
            out, centroids, degenerate = noisy_view, (), True
        rec = IterationRecord(k, centroids, out, hellinger_fidelity(out, noisy_view), degenerate)
        return MitigationReport(out, k, (rec,), "fixed")

    records: list[IterationRecord] = []
    previous = noisy_view
    k_max = len(packed)
    for k in range(1, k_max + 1):
        try:
            out, centroids = _one_pass(packed, noisy_view, k, theta, cfg.flip_rate, cfg.max_rounds)
            degenerate = False
        except DegenerateMitigationError:
            out, centroids, degenerate = noisy_view, (), True
        hf_prev = hellinger_fidelity(out, previous)
        records.append(IterationRecord(k, centroids, out, hf_prev, degenerate))
        if k >= 2 and hf_prev > cfg.stop_threshold:
            return MitigationReport(previous, k - 1, tuple(records), "convergence")
        previous = out
    return MitigationReport(previous, k_max, tuple(records), "k_max")


@dataclass(frozen=True)
class SweepCell:
    """One grid cell of a synthetic-noise experiment.

    ``supplied_rate`` is the error rate handed to the mitigator (defaults
    to the true rate); keeping them separate supports mis-estimation
    studies. ``fixed_k`` switches the cell to single-pass fixed-k mode.
    """

    width: int
    num_dominant: int
    flip_rate: float
    supplied_rate: float | None = None
    stop_threshold: float = 0.95
    shots: int = 8192
    fixed_k: int | None = None

    @property
    def mitigation_rate(self) -> float:
        return self.flip_rate if self.supplied_rate is None else self.supplied_rate


@dataclass(frozen=True)
class ExperimentRecord:
    """One (cell, trial) outcome with the fidelities against ground truth."""

    cell: SweepCell
    trial: int
    seed: int
    hf_noisy: float
    hf_mitigated: float
    improvement: float
    k_used: int
    terminated_by: str
    wall_time_s: float
    error: str = ""


def trial_seed(base_seed: int, trial: int) -> int:
    """Per-trial derived seed: base XOR trial index.

    Cells sharing generation parameters therefore see identical synthetic
    data for the same trial index, which pairs comparisons such as
    mis-estimation studies.
    """
    return base_seed ^ trial


def run_trial(cell: SweepCell, trial: int, base_seed: int, epsilon: float = 0.01) -> ExperimentRecord:
    """Generate one synthetic instance for the cell, mitigate and score it."""
    seed = trial_seed(base_seed, trial)
    try:
        rng = np.random.default_rng(seed)
        ideal = generate_ideal(SyntheticSpec(cell.width, cell.num_dominant, rng))
        counts = sample_shots(ideal, cell.shots, rng)
        noisy = apply_bitflip(counts, NoiseSpec(cell.flip_rate, rng))
        cfg = MitigationConfig(
            flip_rate=cell.mitigation_rate,
            stop_threshold=cell.stop_threshold,
            fixed_k=cell.fixed_k,
        )
        t0 = time.perf_counter()
        report = mitigate(noisy, cfg)
        wall = time.perf_counter() - t0
        hf_noisy = hellinger_fidelity(noisy, ideal)
        hf_mit = hellinger_fidelity(report.final, ideal)
        return ExperimentRecord(
            cell=cell,
            trial=trial,
            seed=seed,
            hf_noisy=hf_noisy,
            hf_mitigated=hf_mit,
            improvement=improvement_ratio(hf_mit, hf_noisy, epsilon),
            k_used=report.k_used,
            terminated_by=report.terminated_by,
            wall_time_s=wall,
        )
    except Exception as exc:  # record the failure, keep the sweep running
        return ExperimentRecord(
            cell=cell,
            trial=trial,
            seed=seed,
            hf_noisy=math.nan,
            hf_mitigated=math.nan,
            improvement=math.nan,
            k_used=-1,
            terminated_by="error",
            wall_time_s=math.nan,
            error=f"{type(exc).__name__}: {exc}",
        )


def sweep(
    cells: Iterable[SweepCell],
    trials: int,
    base_seed: int = 0,
    epsilon: float = 0.01,
    workers: int = 1,
) -> list[ExperimentRecord]:
    """Run every (cell, trial) pair; optionally across a process pool.

    Results are returned in canonical (cell order, trial) order regardless
    of worker scheduling, and each trial's data depends only on
    ``base_seed ^ trial`` and the cell parameters.
    """
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    cells = list(cells)
    jobs = [(cell, t) for cell in cells for t in range(trials)]
    if workers <= 1:
        return [run_trial(cell, t, base_seed, epsilon) for cell, t in jobs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_trial, cell, t, base_seed, epsilon) for cell, t in jobs]
        return [f.result() for f in futures]


def cell_means(records: Sequence[ExperimentRecord]) -> dict[SweepCell, dict[str, float]]:
    """Arithmetic per-cell means of the scoring columns (failed rows skipped)."""
    grouped: dict[SweepCell, list[ExperimentRecord]] = {}
    for rec in records:
        grouped.setdefault(rec.cell, []).append(rec)
    out: dict[SweepCell, dict[str, float]] = {}
    for cell, recs in grouped.items():
        ok = [r for r in recs if not r.error]
        if not ok:
            out[cell] = {"trials": len(recs), "failures": len(recs)}
            continue
        out[cell] = {
            "trials": len(recs),
            "failures": len(recs) - len(ok),
            "hf_noisy": sum(r.hf_noisy for r in ok) / len(ok),
            "hf_mitigated": sum(r.hf_mitigated for r in ok) / len(ok),
            "improvement": sum(r.improvement for r in ok) / len(ok),
            "k_used": sum(r.k_used for r in ok) / len(ok),
        }
    return out
