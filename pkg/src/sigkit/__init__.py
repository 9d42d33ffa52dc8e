"""Exact and Monte Carlo system signatures for systems sharing components."""

__version__ = "0.1.0"

from ._accel import BACKEND
from .errors import (
    DimensionMismatch,
    EmptyPathList,
    EmptySetList,
    InvariantViolation,
    NotSemicoherent,
    OutOfRange,
    PathOutOfRange,
    SigkitError,
    SizeLimitExceeded,
    SubsetOutOfRange,
    TieResampleExhausted,
)
from .lifetimes import (
    EmpiricalPermutationModel,
    EstimateReport,
    Exponential,
    LifetimeModel,
    Uniform,
    Weibull,
    empirical_joint_signature,
    empirical_permutation_model,
    empirical_signature,
    sample,
)
from .quality import (
    BivariateQuality,
    PermutationModel,
    QualityFunction,
    UniformQuality,
    q0,
    q0_multi,
    q_bivariate_from_model,
    q_from_model,
    q_multi_from_model,
    uniform_model,
)
from .reliability import (
    ComponentStateModel,
    EmpiricalStates,
    IIDProductStates,
    IndependentProductStates,
    JointReliabilitySurface,
    OrderStatisticSurfaces,
    TabularStates,
    check_condition_12,
    check_state_exchangeability,
    decompose_joint_reliability,
    exponential_counterexample,
    joint_reliability_direct,
    order_stat_joint_reliability,
)
from .signature import (
    SignatureMatrix,
    SignatureVector,
    TailMatrix,
    TailVector,
    boland_signature,
    joint_from_tail,
    joint_signature,
    joint_structure_tail,
    joint_tail,
    multi_tail,
    probability_signature,
    signature_from_tail,
    tail_from_joint,
    tail_from_signature,
    tail_signature,
)
from .structure import (
    LifetimeSample,
    StructureFunction,
    from_min_path_sets,
    from_truth_table,
    k_out_of_n,
    system_lifetime,
)
