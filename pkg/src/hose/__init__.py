"""Higher-order spectral shrinkage of tensors with SURE-based tuning."""

from .errors import (
    CapacityError,
    DegenerateSpectrum,
    EmptyActiveSet,
    GsureUndefined,
    HoseError,
    InvalidMode,
    InvalidRank,
    NonFinite,
    RankDeficient,
    ShapeError,
    StudyFailed,
    TensorFormatError,
    ThresholdAtKink,
)
from .hosvd import Hosvd, hosvd, mode_singular_values, multilinear_rank, reconstruct
from .kernels import BACKEND
from .relational import (
    AnovaDecomposition,
    PipelineResult,
    anova_decompose,
    arcsine_transform,
    inverse_arcsine,
    shrink_residual_pipeline,
)
from .risk import (
    RiskEstimate,
    c_array,
    divergence_core_shrinkage,
    divergence_fd,
    divergence_full_spectrum,
    divergence_spectral,
    sure_core_shrinkage,
    sure_matrix,
    sure_spectral,
)
from .shrinkage import (
    apply_core_shrinkage,
    apply_spectral,
    james_stein,
    matrix_baseline,
    matrix_spectral,
    truncated_hosvd,
)
from .simulation import ScenarioSpec, StudyResult, add_noise, generate_mean, rank_recovery_study, run_study
from .spectral import (
    AdaptiveTrace,
    CoreShrinkagePlan,
    EfronMorris,
    HardThreshold,
    Identity,
    ImprovedEfronMorris,
    ShrinkagePlan,
    SoftThreshold,
    Stein,
    Truncation,
)
from .tensor import (
    dematricize,
    frobenius_norm_sq,
    matricize,
    mode_multiply,
    read_ten,
    tucker_product,
    unvec,
    vec,
    write_ten,
)
from .tuning import (
    TuningResult,
    closed_form_scale,
    optimize_soft_threshold,
    select_rank,
    tune_efron_morris,
    tune_matrix_soft,
)

__version__ = "0.1.0"
