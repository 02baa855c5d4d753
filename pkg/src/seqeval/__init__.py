"""Model-agnostic evaluation metrics for generative biological-sequence design."""

from .core import (
    Cache,
    EmbeddingMatrix,
    EvalContext,
    EvaluationConfigError,
    IterationSeries,
    MetricHeader,
    MetricResult,
    MetricSpec,
    PropertyColumn,
    PropertyTable,
    ReportTable,
    SequenceSet,
    TrajectoryTable,
    evaluate,
    evaluate_iterations,
    fold_wrap,
)
from .diagnostics import (
    PcaProjection,
    SpearmanAlignmentParams,
    knn_feature_alignment,
    pca_project,
    spearman_alignment,
    spearman_rho,
)
from .embed_metrics import (
    DegenerateInputWarning,
    FkeaParams,
    GaussianSummary,
    KernelSpec,
    NeighborhoodParams,
    authenticity,
    fbd,
    frechet_distance,
    gaussian_summary,
    improved_precision,
    improved_recall,
    kernel_matrix,
    matrix_sqrt_psd,
    mmd,
    vendi_exact,
    vendi_fkea,
)
from .metrics import (
    authenticity_metric,
    conformity_metric,
    diversity_metric,
    fbd_metric,
    hit_rate_metric,
    hypervolume_metric,
    identity_metric,
    kl_metric,
    metric_from_entry,
    mmd_metric,
    ngram_metric,
    novelty_metric,
    precision_metric,
    recall_metric,
    threshold_metric,
    uniqueness_metric,
    vendi_fkea_metric,
    vendi_metric,
)
from .prop_metrics import (
    ConformityParams,
    HypervolumeParams,
    KdeParams,
    conformity_score,
    convex_hull_volume,
    hit_rate,
    hypervolume_indicator,
    identity_stat,
    kl_divergence_categorical,
    kl_divergence_continuous,
    property_volume,
    threshold_fraction,
)
from .report import ChartSpec, render_chart, render_scatter, render_table, report_from_json, report_to_json, show
from .representations import (
    KmerSpec,
    Representations,
    kmer_embed,
    kmer_embedder,
    length_property,
    load_embeddings,
    load_properties,
)
from .seq_metrics import (
    DiversityParams,
    NgramParams,
    diversity,
    levenshtein,
    ngram_jaccard,
    normalized_levenshtein,
    novelty,
    uniqueness,
)

__version__ = "0.1.0"
