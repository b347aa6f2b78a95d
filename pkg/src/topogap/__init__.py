"""Generalization-gap prediction from persistence summaries of neuron
activation-correlation graphs."""

__version__ = "0.1.0"

from .activation_io import (
    ActivationMatrix,
    ModelRecord,
    filter_zero_variance,
    load_activation_file,
    load_model_record,
    load_with_metadata,
    restrict_to_label,
    subsample_inputs,
    write_activation_file,
)
from .functional_graph import (
    FunctionalGraph,
    ImportanceDistribution,
    apply_metric_correction,
    correlation_distance_matrix,
    export_lower_triangle_csv,
    importance_distribution,
    importance_scores,
    sample_nodes,
    subgraph,
)
from .persistence import (
    PersistenceDiagram,
    brute_force_persistence,
    mst_edge_weights,
    persistence_dim0,
    persistence_dim1,
    read_diagrams_csv,
    write_diagrams_csv,
)
from .stats import (
    BootstrappedSummary,
    CvResult,
    bootstrap_summary,
    fit_linear,
    five_by_two_cv,
    paired_5x2_statistic,
    paired_5x2_test,
    predict_linear,
    r_squared,
)
from .summaries import (
    ALL_COMBINATIONS,
    COMBINATION_LENGTHS,
    DIMENSION_MODES,
    SummaryVector,
    births_deaths_stats,
    build_combination,
    complex_polynomial_coeffs,
    lifetime_density,
    lives_midlives_stats,
    persistence_entropy,
    pooling_vector,
)
from .pipeline import (
    PipelineConfig,
    derive_seed,
    run_diagrams,
    run_evaluate,
    run_label_analysis,
)
