"""File formats: counts, distributions, calibration, features, corpora,
tree-ensemble models and sweep CSVs.

Everything structured is JSON with a ``format`` tag and integer
``version`` so files are self-describing; floats are written with
``repr`` semantics and round-trip bit-exactly. Writers emit sorted keys,
making identical inputs produce byte-identical files (timestamps are
opt-in metadata).
"""

from __future__ import annotations

import csv
import json
from typing import Iterable, Mapping, Sequence

import numpy as np

from .distributions import BitString, OutcomeDistribution
from .engine import ExperimentRecord, SweepCell, cell_means
from .estimator import (
    FEATURE_NAMES,
    CalibrationSnapshot,
    CircuitFeatures,
    TreeEnsemble,
    _Tree,
)

__all__ = [
    "DataFormatError",
    "read_counts",
    "write_counts",
    "read_distribution",
    "write_distribution",
    "read_any_distribution",
    "read_calibration",
    "write_calibration",
    "read_features_file",
    "build_features",
    "write_features_file",
    "read_corpus",
    "write_corpus",
    "save_model",
    "load_model",
    "SWEEP_CSV_COLUMNS",
    "write_sweep_csv",
]

COUNTS_FORMAT = "qemclust-counts"
DISTRIBUTION_FORMAT = "qemclust-distribution"
CALIBRATION_FORMAT = "qemclust-calibration"
FEATURES_FORMAT = "qemclust-features"
MODEL_FORMAT = "qemclust-extratrees"
FORMAT_VERSION = 1


class DataFormatError(ValueError):
    """A file failed validation; the message names the file and offender."""


def _load_json(path: str, expected_format: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise DataFormatError(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise DataFormatError(f"{path}: expected a JSON object")
    if doc.get("format") != expected_format:
        raise DataFormatError(
            f"{path}: expected format {expected_format!r}, got {doc.get('format')!r}"
        )
    if doc.get("version") != FORMAT_VERSION:
        raise DataFormatError(f"{path}: unsupported version {doc.get('version')!r}")
    return doc


def _dump_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_counts(path: str) -> tuple[OutcomeDistribution, dict]:
    """Load a counts file; returns the distribution and its metadata."""
    doc = _load_json(path, COUNTS_FORMAT)
    width = doc.get("width")
    counts = doc.get("counts")
    if not isinstance(width, int) or width < 1:
        raise DataFormatError(f"{path}: 'width' must be a positive integer")
    if not isinstance(counts, dict) or not counts:
        raise DataFormatError(f"{path}: 'counts' must be a nonempty object")
    entries: dict[BitString, float] = {}
    positive = False
    for key, val in counts.items():
        if len(key) != width or set(key) - {"0", "1"}:
            raise DataFormatError(f"{path}: key {key!r} is not a width-{width} bit-string")
        if not isinstance(val, int) or val < 0:
            raise DataFormatError(f"{path}: count for key {key!r} must be an integer >= 0")
        positive = positive or val > 0
        entries[BitString.from_text(key)] = val
    if not positive:
        raise DataFormatError(f"{path}: at least one count must be positive")
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise DataFormatError(f"{path}: 'metadata' must be an object")
    return OutcomeDistribution(width, entries), metadata


def write_counts(dist: OutcomeDistribution, path: str, metadata: Mapping | None = None) -> None:
    if not dist.is_integral():
        raise ValueError("counts files hold integer counts; normalize first?")
    doc = {
        "format": COUNTS_FORMAT,
        "version": FORMAT_VERSION,
        "width": dist.width,
        "counts": {b.text: int(round(w)) for b, w in sorted(dist.items(), key=lambda kv: kv[0].value)},
    }
    if metadata:
        doc["metadata"] = dict(metadata)
    _dump_json(path, doc)


def read_distribution(path: str) -> OutcomeDistribution:
    doc = _load_json(path, DISTRIBUTION_FORMAT)
    width = doc.get("width")
    probs = doc.get("probabilities")
    if not isinstance(width, int) or width < 1:
        raise DataFormatError(f"{path}: 'width' must be a positive integer")
    if not isinstance(probs, dict) or not probs:
        raise DataFormatError(f"{path}: 'probabilities' must be a nonempty object")
    entries: dict[BitString, float] = {}
    for key, val in probs.items():
        if len(key) != width or set(key) - {"0", "1"}:
            raise DataFormatError(f"{path}: key {key!r} is not a width-{width} bit-string")
        if not isinstance(val, (int, float)) or val < 0:
            raise DataFormatError(f"{path}: probability for key {key!r} must be >= 0")
        entries[BitString.from_text(key)] = float(val)
    return OutcomeDistribution(width, entries)


def write_distribution(dist: OutcomeDistribution, path: str) -> None:
    _dump_json(
        path,
        {
            "format": DISTRIBUTION_FORMAT,
            "version": FORMAT_VERSION,
            "width": dist.width,
            "probabilities": {
                b.text: w for b, w in sorted(dist.items(), key=lambda kv: kv[0].value)
            },
        },
    )


def read_any_distribution(path: str) -> OutcomeDistribution:
    """Accept either a counts file or a probability-distribution file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise DataFormatError(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    fmt = doc.get("format") if isinstance(doc, dict) else None
    if fmt == COUNTS_FORMAT:
        return read_counts(path)[0]
    if fmt == DISTRIBUTION_FORMAT:
        return read_distribution(path)
    raise DataFormatError(f"{path}: not a counts or distribution file (format={fmt!r})")


def read_calibration(path: str) -> CalibrationSnapshot:
    doc = _load_json(path, CALIBRATION_FORMAT)
    gate_errors = doc.get("gate_errors")
    readout = doc.get("readout_errors")
    if not isinstance(gate_errors, dict):
        raise DataFormatError(f"{path}: 'gate_errors' must be an object")
    if not isinstance(readout, list):
        raise DataFormatError(f"{path}: 'readout_errors' must be a list")
    try:
        return CalibrationSnapshot(
            gate_errors={k: float(v) for k, v in gate_errors.items()},
            readout_errors=tuple(float(v) for v in readout),
        )
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def write_calibration(calibration: CalibrationSnapshot, path: str) -> None:
    _dump_json(
        path,
        {
            "format": CALIBRATION_FORMAT,
            "version": FORMAT_VERSION,
            "gate_errors": dict(calibration.gate_errors),
            "readout_errors": list(calibration.readout_errors),
        },
    )


_COUNT_FIELDS = (
    "num_qubits",
    "num_measurements",
    "num_2q_gates",
    "num_sx_gates",
    "num_x_gates",
    "num_rz_gates",
)


def read_features_file(path: str) -> dict:
    """Raw feature record; 'esp' and 'entropy' may be absent (derivable)."""
    doc = _load_json(path, FEATURES_FORMAT)
    out: dict = {}
    for field in _COUNT_FIELDS:
        v = doc.get(field)
        if not isinstance(v, int) or v < 0:
            raise DataFormatError(f"{path}: {field!r} must be an integer >= 0")
        out[field] = v
    for field in ("entropy", "esp"):
        if field in doc:
            v = doc[field]
            if not isinstance(v, (int, float)) or not 0.0 <= v <= 1.0:
                raise DataFormatError(f"{path}: {field!r} must lie in [0, 1]")
            out[field] = float(v)
    if "measured_qubits" in doc:
        mq = doc["measured_qubits"]
        if not isinstance(mq, list) or not all(isinstance(q, int) and q >= 0 for q in mq):
            raise DataFormatError(f"{path}: 'measured_qubits' must be a list of qubit indices")
        out["measured_qubits"] = mq
    return out


def write_features_file(features: CircuitFeatures, path: str) -> None:
    doc = {"format": FEATURES_FORMAT, "version": FORMAT_VERSION}
    for name in FEATURE_NAMES:
        doc[name] = getattr(features, name)
    _dump_json(path, doc)


def build_features(
    raw: Mapping,
    calibration: CalibrationSnapshot | None = None,
    entropy: float | None = None,
) -> CircuitFeatures:
    """Assemble the full vector, deriving ESP from calibration when absent.

    The measured-qubit set defaults to the first ``num_measurements``
    qubits unless the record lists one explicitly.
    """
    from .estimator import compute_esp

    esp = raw.get("esp")
    if esp is None:
        if calibration is None:
            raise DataFormatError(
                "feature record has no 'esp' and no calibration file was given"
            )
        gate_counts = {
            "2q": raw["num_2q_gates"],
            "sx": raw["num_sx_gates"],
            "x": raw["num_x_gates"],
            "rz": raw["num_rz_gates"],
        }
        measured = raw.get("measured_qubits", range(raw["num_measurements"]))
        esp = compute_esp(gate_counts, measured, calibration)
    ent = raw.get("entropy", entropy)
    if ent is None:
        raise DataFormatError(
            "feature record has no 'entropy' and none could be derived from counts"
        )
    return CircuitFeatures(
        num_qubits=raw["num_qubits"],
        num_measurements=raw["num_measurements"],
        num_2q_gates=raw["num_2q_gates"],
        num_sx_gates=raw["num_sx_gates"],
        num_x_gates=raw["num_x_gates"],
        num_rz_gates=raw["num_rz_gates"],
        entropy=ent,
        esp=esp,
    )


CORPUS_COLUMNS = FEATURE_NAMES + ("effective_error_rate",)


def write_corpus(features: Sequence[CircuitFeatures], labels: Sequence[float], path: str) -> None:
    if len(features) != len(labels):
        raise ValueError(f"{len(features)} feature rows but {len(labels)} labels")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CORPUS_COLUMNS)
        for f, y in zip(features, labels):
            row = [int(getattr(f, n)) for n in _COUNT_FIELDS]
            row += [repr(float(f.entropy)), repr(float(f.esp)), repr(float(y))]
            writer.writerow(row)


def read_corpus(path: str) -> tuple[list[CircuitFeatures], np.ndarray]:
    features: list[CircuitFeatures] = []
    labels: list[float] = []
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except FileNotFoundError:
        raise DataFormatError(f"{path}: file not found") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(CORPUS_COLUMNS):
            raise DataFormatError(f"{path}: expected header {','.join(CORPUS_COLUMNS)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CORPUS_COLUMNS):
                raise DataFormatError(f"{path}: line {lineno}: expected {len(CORPUS_COLUMNS)} fields")
            try:
                features.append(
                    CircuitFeatures(
                        num_qubits=int(row[0]),
                        num_measurements=int(row[1]),
                        num_2q_gates=int(row[2]),
                        num_sx_gates=int(row[3]),
                        num_x_gates=int(row[4]),
                        num_rz_gates=int(row[5]),
                        entropy=float(row[6]),
                        esp=float(row[7]),
                    )
                )
                labels.append(float(row[8]))
            except ValueError as exc:
                raise DataFormatError(f"{path}: line {lineno}: {exc}") from None
    if not features:
        raise DataFormatError(f"{path}: corpus holds no samples")
    return features, np.array(labels, dtype=np.float64)


def save_model(model: TreeEnsemble, path: str) -> None:
    doc = {
        "format": MODEL_FORMAT,
        "version": FORMAT_VERSION,
        "feature_names": list(model.feature_names),
        "hyperparameters": {
            "n_trees": model.n_trees,
            "min_samples_leaf": model.min_samples_leaf,
            "max_features": model.max_features,
            "seed": model.seed,
        },
        "feature_importances": list(model.importances),
        "trees": [
            {
                "feature": t.feature.tolist(),
                "threshold": t.threshold.tolist(),
                "left": t.left.tolist(),
                "right": t.right.tolist(),
                "value": t.value.tolist(),
            }
            for t in model.trees
        ],
    }
    _dump_json(path, doc)


def load_model(path: str) -> TreeEnsemble:
    doc = _load_json(path, MODEL_FORMAT)
    try:
        hp = doc["hyperparameters"]
        trees = tuple(
            _Tree(
                feature=np.array(t["feature"], dtype=np.int64),
                threshold=np.array(t["threshold"], dtype=np.float64),
                left=np.array(t["left"], dtype=np.int64),
                right=np.array(t["right"], dtype=np.int64),
                value=np.array(t["value"], dtype=np.float64),
            )
            for t in doc["trees"]
        )
        return TreeEnsemble(
            trees=trees,
            feature_names=tuple(doc["feature_names"]),
            n_trees=int(hp["n_trees"]),
            min_samples_leaf=int(hp["min_samples_leaf"]),
            max_features=int(hp["max_features"]),
            seed=int(hp["seed"]),
            importances=tuple(float(v) for v in doc["feature_importances"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: malformed model file ({exc})") from None


SWEEP_CSV_COLUMNS = (
    "row_type",
    "width",
    "num_dominant",
    "flip_rate",
    "supplied_rate",
    "stop_threshold",
    "shots",
    "fixed_k",
    "trial",
    "seed",
    "hf_noisy",
    "hf_mitigated",
    "improvement",
    "k_used",
    "terminated_by",
    "wall_time_s",
    "error",
)


def _cell_key(cell: SweepCell) -> tuple:
    return (
        cell.width,
        cell.num_dominant,
        cell.flip_rate,
        cell.mitigation_rate,
        cell.stop_threshold,
        cell.shots,
        cell.fixed_k if cell.fixed_k is not None else -1,
    )


def _cell_fields(cell: SweepCell) -> list:
    return [
        cell.width,
        cell.num_dominant,
        repr(cell.flip_rate),
        repr(cell.mitigation_rate),
        repr(cell.stop_threshold),
        cell.shots,
        "" if cell.fixed_k is None else cell.fixed_k,
    ]


def write_sweep_csv(records: Iterable[ExperimentRecord], path: str, include_timing: bool = True) -> None:
    """One row per (cell, trial) plus one ``cell_mean`` row per cell.

    Rows are sorted on the grid keys, so output bytes do not depend on
    execution order; pass ``include_timing=False`` for byte-reproducible
    files.
    """
    records = sorted(records, key=lambda r: (_cell_key(r.cell), r.trial))
    means = cell_means(records)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_CSV_COLUMNS)
        for rec in records:
            writer.writerow(
                ["trial"]
                + _cell_fields(rec.cell)
                + [
                    rec.trial,
                    rec.seed,
                    repr(rec.hf_noisy),
                    repr(rec.hf_mitigated),
                    repr(rec.improvement),
                    rec.k_used,
                    rec.terminated_by,
                    repr(rec.wall_time_s) if include_timing else "",
                    rec.error,
                ]
            )
        for cell in sorted(means, key=_cell_key):
            stats = means[cell]
            if "improvement" not in stats:
                continue
            writer.writerow(
                ["cell_mean"]
                + _cell_fields(cell)
                + [
                    "mean",
                    "",
                    repr(stats["hf_noisy"]),
                    repr(stats["hf_mitigated"]),
                    repr(stats["improvement"]),
                    repr(stats["k_used"]),
                    "",
                    "",
                    "",
                ]
            )
