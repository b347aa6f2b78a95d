"""End-to-end orchestration: diagrams -> summaries -> bootstrap -> CV report.

Stages operate on a directory of ``<stem>.actv`` + ``<stem>.meta.json`` pairs
and persist intermediate diagram CSVs so reruns resume cheaply. All
randomness flows from a single 64-bit seed through a documented mixing
function, so parallel or re-ordered execution cannot change results.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .activation_io import (
    ActivationMatrix,
    ModelRecord,
    filter_zero_variance,
    load_with_metadata,
    restrict_to_label,
    subsample_inputs,
)
from .errors import LabelAbsentError, MissingGapLabelError, TopogapError
from .functional_graph import (
    CORRECTED_D_PRIME,
    RAW_D,
    apply_metric_correction,
    correlation_distance_matrix,
    importance_distribution,
    importance_scores,
    sample_nodes,
    subgraph,
)
from .persistence import (
    PersistenceDiagram,
    persistence_dim0,
    persistence_dim1,
    read_diagrams_csv,
    write_diagrams_csv,
)
from .stats import bootstrap_summary, five_by_two_cv, paired_5x2_test
from .summaries import (
    ALL_COMBINATIONS,
    DIMENSION_MODES,
    H0,
    H0_AND_H1,
    H1,
    build_combination,
    lifetime_density,
)

log = logging.getLogger("topogap")

# Redraw budget for node samples whose diagrams come out empty.
MAX_SAMPLE_RETRIES = 5

DENSITY_GRID_POINTS = 256


@dataclass
class PipelineConfig:
    input_dir: Path
    out_dir: Path
    n_diagram_samples: int = 20
    n_nodes: int = 3000
    n_inputs: int = 2000
    n_resamples: int = 1000
    resample_size: int = 20
    seed: int = 0
    combinations: tuple[int, ...] = ALL_COMBINATIONS
    dimension_modes: tuple[str, ...] = DIMENSION_MODES
    metric_mode: str = RAW_D
    label_restrict: int | None = None

    def __post_init__(self):
        self.input_dir = Path(self.input_dir)
        self.out_dir = Path(self.out_dir)
        for name in ("n_diagram_samples", "n_nodes", "n_inputs",
                     "n_resamples", "resample_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        self.combinations = tuple(sorted(set(int(c) for c in self.combinations)))
        if any(c not in ALL_COMBINATIONS for c in self.combinations):
            raise ValueError("combinations must be within 1..11")
        self.dimension_modes = tuple(
            m for m in DIMENSION_MODES if m in set(self.dimension_modes)
        )
        if not self.dimension_modes:
            raise ValueError("at least one dimension mode required")
        if self.metric_mode not in (RAW_D, CORRECTED_D_PRIME):
            raise ValueError(f"unknown metric mode {self.metric_mode!r}")

    @property
    def homology_dims(self) -> tuple[int, ...]:
        """Homological dimensions the diagram stage must compute."""
        dims = set()
        for mode in self.dimension_modes:
            if mode in (H0, H0_AND_H1):
                dims.add(0)
            if mode in (H1, H0_AND_H1):
                dims.add(1)
        return tuple(sorted(dims))

    def to_json_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["input_dir"] = str(self.input_dir)
        d["out_dir"] = str(self.out_dir)
        d["combinations"] = list(self.combinations)
        d["dimension_modes"] = list(self.dimension_modes)
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "PipelineConfig":
        return cls(**d)


def derive_seed(base: int, *parts) -> int:
    """64-bit seed mix: blake2b over the part tuple, xored with the base."""
    h = hashlib.blake2b(repr(parts).encode(), digest_size=8)
    return (base ^ int.from_bytes(h.digest(), "little")) & 0xFFFFFFFFFFFFFFFF


def _safe_stem(model_id: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in model_id)


def _diagram_path(cfg: PipelineConfig, model_id: str, sample: int) -> Path:
    return cfg.out_dir / "diagrams" / f"{_safe_stem(model_id)}__sample{sample:03d}.csv"


def discover_models(input_dir) -> list[Path]:
    return sorted(Path(input_dir).glob("*.actv"))


def _build_graph(values_subset: ActivationMatrix, cfg: PipelineConfig):
    g = correlation_distance_matrix(values_subset)
    if cfg.metric_mode == CORRECTED_D_PRIME:
        g = apply_metric_correction(g)
    return g


def _prepare_model(cfg: PipelineConfig, path: Path):
    m, record = load_with_metadata(path)
    if cfg.label_restrict is not None:
        m = restrict_to_label(m, cfg.label_restrict)
    m = filter_zero_variance(m)
    # One input subsample per model; node samples all see the same columns.
    n_in = min(cfg.n_inputs, m.n_inputs)
    m = subsample_inputs(m, n_in, derive_seed(cfg.seed, "inputs", record.model_id))
    scores = importance_scores(m)
    dist = importance_distribution(scores, m.n_inputs)
    return m, record, dist


def _sample_diagrams(cfg: PipelineConfig, m, dist, model_id: str, sample: int):
    """Diagrams for one node sample; redraws on empty required diagrams."""
    n_nodes = min(cfg.n_nodes, m.n_nodes)
    dims = cfg.homology_dims
    last = None
    for attempt in range(MAX_SAMPLE_RETRIES + 1):
        seed = derive_seed(cfg.seed, "nodes", model_id, sample, attempt)
        idx = sample_nodes(dist, n_nodes, seed)
        sub = ActivationMatrix(
            values=m.values[idx],
            node_ids=tuple(m.node_ids[i] for i in idx),
            model_id=m.model_id,
        )
        g = _build_graph(sub, cfg)
        diagrams = []
        for dim in dims:
            diagrams.append(
                persistence_dim0(g) if dim == 0 else persistence_dim1(g)
            )
        last = diagrams
        if all(len(d) > 0 for d in diagrams):
            return diagrams
        log.warning(
            "model %s sample %d attempt %d produced an empty diagram; redrawing",
            model_id, sample, attempt,
        )
    return last


def run_diagrams(cfg: PipelineConfig) -> dict:
    """Stage 1: persist k diagram CSVs per model. Returns a status map."""
    (cfg.out_dir / "diagrams").mkdir(parents=True, exist_ok=True)
    status: dict[str, str] = {}
    for path in discover_models(cfg.input_dir):
        try:
            m, record, dist = _prepare_model(cfg, path)
        except TopogapError as exc:
            log.error("model file %s failed: %s", path.name, exc)
            status[path.stem] = f"failed: {exc}"
            continue
        for sample in range(cfg.n_diagram_samples):
            out = _diagram_path(cfg, record.model_id, sample)
            if out.exists():
                continue
            diagrams = _sample_diagrams(cfg, m, dist, record.model_id, sample)
            tmp = out.with_suffix(".tmp")
            write_diagrams_csv(diagrams, tmp)
            tmp.rename(out)
        status[record.model_id] = "ok"
    return status


def _load_model_diagrams(cfg: PipelineConfig, model_id: str):
    """Per-sample {dim: diagram} maps; missing dims become empty diagrams."""
    out = []
    for sample in range(cfg.n_diagram_samples):
        path = _diagram_path(cfg, model_id, sample)
        if not path.exists():
            raise FileNotFoundError(f"missing diagram store entry {path}")
        by_dim = read_diagrams_csv(path)
        for dim in cfg.homology_dims:
            if dim not in by_dim:
                by_dim[dim] = PersistenceDiagram(
                    dimension=dim, points=np.empty((0, 2)), n_vertices=0
                )
        out.append(by_dim)
    return out


def _metadata_records(cfg: PipelineConfig) -> list[ModelRecord]:
    records = []
    for path in discover_models(cfg.input_dir):
        _, record = load_with_metadata(path)
        records.append(record)
    return records


def run_evaluate(cfg: PipelineConfig) -> dict:
    """Stage 2: summaries, bootstrap, per-combination 5x2 CV report."""
    records = [r for r in _metadata_records(cfg)
               if _diagram_path(cfg, r.model_id, 0).exists()]
    usable, skipped = [], []
    for r in records:
        if r.generalization_gap is None:
            skipped.append(r.model_id)
            log.error("model %s: %s", r.model_id,
                      MissingGapLabelError("no test accuracy"))
        else:
            usable.append(r)
    if len(usable) < 4:
        raise MissingGapLabelError(
            f"only {len(usable)} models with gap labels; need >= 4"
        )

    diagrams = {r.model_id: _load_model_diagrams(cfg, r.model_id) for r in usable}
    gaps = np.asarray([r.generalization_gap for r in usable])

    summary_rows = []
    results = []
    cv_by_key = {}
    for combo in cfg.combinations:
        for mode in cfg.dimension_modes:
            feature_rows = []
            ok = True
            for r in usable:
                vectors = []
                for sample, by_dim in enumerate(diagrams[r.model_id]):
                    try:
                        sv = build_combination(
                            by_dim.get(0), by_dim.get(1), combo, mode
                        )
                    except TopogapError as exc:
                        log.warning(
                            "model %s sample %d combo %d/%s skipped: %s",
                            r.model_id, sample, combo, mode, exc,
                        )
                        continue
                    vectors.append(sv)
                    for ci, v in enumerate(sv.values):
                        summary_rows.append(
                            (r.model_id, sample, combo, mode, ci, v)
                        )
                if not vectors:
                    log.error("combo %d/%s unusable: model %s has no valid "
                              "samples", combo, mode, r.model_id)
                    ok = False
                    break
                bs = bootstrap_summary(
                    vectors,
                    n_resamples=cfg.n_resamples,
                    resample_size=cfg.resample_size,
                    seed=derive_seed(cfg.seed, "bootstrap", r.model_id, combo, mode),
                    model_id=r.model_id,
                    combination_id=combo,
                    dimension_mode=mode,
                )
                feature_rows.append(bs.values)
            if not ok:
                continue
            # Shared partitions across combinations: CV seed depends only on
            # the task seed, as the paired test requires.
            cv = five_by_two_cv(
                np.stack(feature_rows), gaps,
                seed=derive_seed(cfg.seed, "cv"),
                combination_id=combo, dimension_mode=mode,
            )
            cv_by_key[(combo, mode)] = cv
            results.append(cv)

    p_values = []
    keys = sorted(cv_by_key)
    for i, ka in enumerate(keys):
        for kb in keys[i + 1:]:
            p_values.append({
                "a": {"combination_id": ka[0], "dimension_mode": ka[1]},
                "b": {"combination_id": kb[0], "dimension_mode": kb[1]},
                "p_value": paired_5x2_test(cv_by_key[ka], cv_by_key[kb]),
            })

    report = {
        "software_version": __version__,
        "seed": cfg.seed,
        "config": cfg.to_json_dict(),
        "n_models": len(usable),
        "skipped_models": sorted(skipped),
        "polynomial_point_map": "b + i*d (direct map; no point "
                                "transformation applied before the roots)",
        "combinations": [
            {
                "combination_id": cv.combination_id,
                "dimension_mode": cv.dimension_mode,
                "r2_scores": [float(s) for s in cv.r2_scores],
                "mean_r2": cv.mean_r2,
                "std_r2": cv.std_r2,
            }
            for cv in results
        ],
        "pairwise_p_values": p_values,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    with open(cfg.out_dir / "summaries.csv", "w") as f:
        f.write("model_id,sample_index,combination_id,dimension_mode,"
                "component_index,value\n")
        for row in summary_rows:
            f.write("%s,%d,%d,%s,%d,%.17g\n" % row)
    with open(cfg.out_dir / "report.json", "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    return report


def run_label_analysis(cfg: PipelineConfig) -> dict:
    """Per-label diagrams and dimension-0 lifetime density curves."""
    dens_dir = cfg.out_dir / "densities"
    dens_dir.mkdir(parents=True, exist_ok=True)
    status: dict[str, str] = {}
    for path in discover_models(cfg.input_dir):
        m_full, record = load_with_metadata(path)
        if m_full.input_labels is None:
            raise LabelAbsentError(f"{path.name} carries no input labels")
        stem = _safe_stem(record.model_id)
        for label in np.unique(m_full.input_labels):
            label = int(label)
            m = restrict_to_label(m_full, label)
            if m.n_inputs < 2:
                log.warning("model %s label %d has < 2 inputs; skipped",
                            record.model_id, label)
                continue
            try:
                m = filter_zero_variance(m)
            except TopogapError as exc:
                log.warning("model %s label %d skipped: %s",
                            record.model_id, label, exc)
                continue
            scores = importance_scores(m)
            dist = importance_distribution(scores, m.n_inputs)
            n_nodes = min(cfg.n_nodes, m.n_nodes)
            idx = sample_nodes(
                dist, n_nodes, derive_seed(cfg.seed, "label", record.model_id, label)
            )
            sub = ActivationMatrix(
                values=m.values[idx],
                node_ids=tuple(m.node_ids[i] for i in idx),
                model_id=m.model_id,
            )
            g = _build_graph(sub, cfg)
            diagrams = [persistence_dim0(g)]
            if 1 in cfg.homology_dims:
                diagrams.append(persistence_dim1(g))
            write_diagrams_csv(
                diagrams, dens_dir / f"{stem}__label{label}__diagrams.csv"
            )
            d0 = diagrams[0]
            if len(d0) == 0:
                log.warning("model %s label %d: empty H0 diagram, no density",
                            record.model_id, label)
                continue
            life = d0.lifetimes
            span = life.max() - life.min()
            pad = max(span, life.max(), 1e-3)
            grid = np.linspace(life.min() - pad, life.max() + pad,
                               DENSITY_GRID_POINTS)
            dens = lifetime_density(d0, grid)
            with open(dens_dir / f"{stem}__label{label}__dim0_density.csv",
                      "w") as f:
                f.write("lifetime,density\n")
                for x, y in zip(grid, dens):
                    f.write(f"{x:.17g},{y:.17g}\n")
        status[record.model_id] = "ok"
    return status
