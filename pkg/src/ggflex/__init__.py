"""Gabriel-graph large-margin classification with a flexible quality filter."""

__version__ = "0.1.0"

from ._accel import NUMBA_AVAILABLE, backend
from .chipclass import (
    ChipclassModel,
    SupportEdge,
    class_weights,
    extract_support_edges,
    gating_weights,
    load_model,
    predict,
    predict_proba,
    save_model,
    train,
    train_fixed,
)
from .dataset import (
    DataError,
    Dataset,
    FoldPlan,
    Normalization,
    deduplicate,
    gen_gaussian_pair,
    load_csv,
    normalize_zscore,
    save_csv,
    stratified_kfold,
)
from .evaluation import (
    BenchmarkReport,
    RankSummary,
    ScoreTable,
    average_ranks,
    bonferroni_dunn_cd,
    bonferroni_dunn_q,
    friedman_test,
    load_score_table,
    rank_summary,
    run_benchmark,
)
from .graph import (
    DuplicatePointsError,
    EdgeCertificate,
    GabrielGraph,
    build_gabriel,
    is_gabriel_edge,
    vertex_degrees,
)
from .margin import (
    MarginReport,
    MarginSurface,
    fixed_threshold_mean_margin,
    filtered_mean_margin,
    margin_curve,
    margin_surface,
    mean_margin,
    sample_margin,
    sample_margins,
)
from .metrics import auc
from .quality import (
    EmptyClassError,
    FilterResult,
    QualityProfile,
    class_thresholds,
    fixed_filter,
    flexible_filter,
    quality_index,
    quality_profile,
    removal_mask,
)
from .tuner import (
    ChoiceParam,
    FloatParam,
    SearchSpace,
    TrialRecord,
    TuneResult,
    TuningError,
    cv_objective,
    h_search_space,
    tune,
)
