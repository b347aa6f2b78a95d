"""On-disk activation format, validation, and input-axis filtering.

Binary layout (little-endian): magic ``ACTV``, version u32 = 1, n_nodes u64,
n_inputs u64, flag u8 (bit 0 = labels present), then n_nodes x n_inputs
row-major float64 activations, then (if flagged) n_inputs u32 labels.
A sidecar ``<stem>.meta.json`` carries model_id, accuracies and node_ids.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    AllNodesConstantError,
    LabelAbsentError,
    MalformedFileError,
    NonFiniteEntryError,
    SizeTooLargeError,
)

MAGIC = b"ACTV"
FORMAT_VERSION = 1

# Rows with population variance at or below this are treated as constant;
# exact-zero tests are fragile under float extraction pipelines.
VARIANCE_TOL = 1e-18

_HEADER = struct.Struct("<4sIQQB")


@dataclass(frozen=True)
class ActivationMatrix:
    """Per-node activation vectors over an input sample.

    ``values`` has one row per node and one column per input.
    """

    values: np.ndarray
    node_ids: tuple[str, ...]
    model_id: str = ""
    input_labels: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise ValueError("activation values must be a 2-D matrix")
        if values.shape[0] != len(self.node_ids):
            raise ValueError(
                f"{values.shape[0]} rows but {len(self.node_ids)} node ids"
            )
        if self.input_labels is not None:
            labels = np.asarray(self.input_labels, dtype=np.int64)
            if labels.ndim != 1 or labels.shape[0] != values.shape[1]:
                raise ValueError("input_labels must have one entry per column")
            if labels.size and labels.min() < 0:
                raise ValueError("labels must be nonnegative")
            labels.setflags(write=False)
            object.__setattr__(self, "input_labels", labels)
        bad = ~np.isfinite(values)
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise NonFiniteEntryError(int(r), int(c))
        values.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ModelRecord:
    """Accuracy metadata for one source network."""

    model_id: str
    train_accuracy: float
    test_accuracy: float | None = None

    def __post_init__(self):
        for name in ("train_accuracy", "test_accuracy"):
            v = getattr(self, name)
            if v is not None and not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v} outside [0, 1]")

    @property
    def generalization_gap(self) -> float | None:
        if self.test_accuracy is None:
            return None
        return self.train_accuracy - self.test_accuracy


def write_activation_file(path, m: ActivationMatrix) -> None:
    """Serialize ``m`` (without metadata sidecar) to ``path``."""
    path = Path(path)
    flag = 1 if m.input_labels is not None else 0
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, FORMAT_VERSION, m.n_nodes, m.n_inputs, flag))
        f.write(np.ascontiguousarray(m.values, dtype="<f8").tobytes())
        if flag:
            f.write(np.ascontiguousarray(m.input_labels, dtype="<u4").tobytes())


def load_activation_file(path, node_ids=None, model_id: str = "") -> ActivationMatrix:
    """Load and validate an activation file.

    ``node_ids``/``model_id`` usually come from the metadata sidecar; when
    absent, synthetic ids ``n0..n{k-1}`` are used.
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise MalformedFileError(f"{path}: truncated header")
    magic, version, n_nodes, n_inputs, flag = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise MalformedFileError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise MalformedFileError(f"{path}: unsupported version {version}")
    if n_nodes == 0 or n_inputs == 0:
        raise MalformedFileError(f"{path}: empty payload ({n_nodes}x{n_inputs})")
    need = _HEADER.size + 8 * n_nodes * n_inputs + (4 * n_inputs if flag & 1 else 0)
    if len(raw) < need:
        raise MalformedFileError(f"{path}: expected {need} bytes, got {len(raw)}")
    off = _HEADER.size
    values = np.frombuffer(raw, dtype="<f8", count=n_nodes * n_inputs, offset=off)
    values = values.reshape(n_nodes, n_inputs).copy()
    labels = None
    if flag & 1:
        off += 8 * n_nodes * n_inputs
        labels = np.frombuffer(raw, dtype="<u4", count=n_inputs, offset=off)
        labels = labels.astype(np.int64)
    if node_ids is None:
        node_ids = tuple(f"n{i}" for i in range(n_nodes))
    bad = ~np.isfinite(values)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise NonFiniteEntryError(int(r), int(c))
    return ActivationMatrix(
        values=values, node_ids=tuple(node_ids), model_id=model_id,
        input_labels=labels,
    )


def load_model_record(meta_path) -> ModelRecord:
    meta = json.loads(Path(meta_path).read_text())
    return ModelRecord(
        model_id=meta["model_id"],
        train_accuracy=meta["train_accuracy"],
        test_accuracy=meta.get("test_accuracy"),
    )


def load_with_metadata(actv_path) -> tuple[ActivationMatrix, ModelRecord]:
    """Load ``<stem>.actv`` together with its ``<stem>.meta.json`` sidecar."""
    actv_path = Path(actv_path)
    meta_path = actv_path.with_suffix("").with_suffix(".meta.json")
    meta = json.loads(meta_path.read_text())
    record = ModelRecord(
        model_id=meta["model_id"],
        train_accuracy=meta["train_accuracy"],
        test_accuracy=meta.get("test_accuracy"),
    )
    m = load_activation_file(
        actv_path, node_ids=meta.get("node_ids"), model_id=record.model_id
    )
    return m, record


def filter_zero_variance(m: ActivationMatrix, tol: float = VARIANCE_TOL) -> ActivationMatrix:
    """Drop rows whose population variance is at or below ``tol``."""
    var = np.var(m.values, axis=1)
    keep = var > tol
    if not keep.any():
        raise AllNodesConstantError(f"all {m.n_nodes} rows are constant")
    if keep.all():
        return m
    idx = np.flatnonzero(keep)
    return replace(
        m,
        values=m.values[idx],
        node_ids=tuple(m.node_ids[i] for i in idx),
    )


def subsample_inputs(m: ActivationMatrix, size: int, seed: int) -> ActivationMatrix:
    """Uniform without-replacement column sample, deterministic per seed.

    PRNG: numpy PCG64 via ``default_rng(seed)``.
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    if size > m.n_inputs:
        raise SizeTooLargeError(f"size {size} > {m.n_inputs} columns")
    rng = np.random.default_rng(seed)
    cols = rng.choice(m.n_inputs, size=size, replace=False)
    return replace(
        m,
        values=m.values[:, cols],
        input_labels=None if m.input_labels is None else m.input_labels[cols],
    )


def restrict_to_label(m: ActivationMatrix, label: int) -> ActivationMatrix:
    """Keep exactly the columns whose class label matches."""
    if m.input_labels is None:
        raise ValueError("matrix carries no input labels")
    mask = m.input_labels == label
    if not mask.any():
        raise LabelAbsentError(f"label {label} absent")
    if mask.all():
        return m
    return replace(
        m,
        values=m.values[:, mask],
        input_labels=m.input_labels[mask],
    )
