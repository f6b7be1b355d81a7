"""Tests for shared loading structure across high-dimensional factor models.

The package decides whether two panels (or the two regimes around a known
break date) are driven by the same loading matrix up to a nonsingular
linear transformation: loadings are estimated by PCA, one series is passed
through averaged projection operators that plant a midpoint break exactly
when the loading spaces differ, and a chi-squared Wald statistic on the
transformed factors delivers the verdict. A Monte Carlo harness reproduces
the empirical size and power of the procedure over a catalog of
data-generating processes.
"""

__version__ = "0.1.0"

from .errors import (
    AsymmetryExceedsTolerance,
    ConstantColumn,
    DimensionMismatch,
    EigenFailure,
    EmptyFile,
    ExcessiveFailures,
    InvalidDgpSpec,
    InvalidFactorOrder,
    ParseError,
    RaggedRows,
    RankDeficient,
    SegmentTooShort,
    SingularLongRunVariance,
    SpantestError,
    UnknownFamily,
)
from .panel import (
    SymmetricEigenResult,
    TimeSeriesPanel,
    standardize,
    sym_eig_top,
    unvech,
    vech,
)
from .pca import (
    FactorEstimate,
    ProjectionOperator,
    estimate_num_factors,
    estimate_pca,
    projection,
    projection_from_loadings,
)
from .transform import (
    SegmentOperators,
    TransformedSeries,
    transform_changepoint,
    transform_diff_r,
    transform_two_subject,
)
from .wald import (
    SupWaldReport,
    WaldReport,
    baseline_changepoint_wald,
    default_bandwidth,
    gamma_j,
    long_run_variance,
    sup_wald,
    sup_wald_critical_value,
    v_statistic,
    wald,
)
from .simulation import (
    FAMILIES,
    DgpSpec,
    MonteCarloResult,
    ar1_path,
    generate,
    monte_carlo,
    random_nonsingular_phi,
)
from .csvio import load_csv

__all__ = [
    "__version__",
    # errors
    "SpantestError",
    "ConstantColumn",
    "AsymmetryExceedsTolerance",
    "EigenFailure",
    "RankDeficient",
    "DimensionMismatch",
    "SegmentTooShort",
    "InvalidFactorOrder",
    "SingularLongRunVariance",
    "UnknownFamily",
    "InvalidDgpSpec",
    "ExcessiveFailures",
    "ParseError",
    "RaggedRows",
    "EmptyFile",
    # panel
    "TimeSeriesPanel",
    "SymmetricEigenResult",
    "standardize",
    "vech",
    "unvech",
    "sym_eig_top",
    # pca
    "FactorEstimate",
    "ProjectionOperator",
    "estimate_pca",
    "projection",
    "projection_from_loadings",
    "estimate_num_factors",
    # transform
    "TransformedSeries",
    "SegmentOperators",
    "transform_two_subject",
    "transform_changepoint",
    "transform_diff_r",
    # wald
    "WaldReport",
    "SupWaldReport",
    "default_bandwidth",
    "v_statistic",
    "gamma_j",
    "long_run_variance",
    "wald",
    "sup_wald",
    "sup_wald_critical_value",
    "baseline_changepoint_wald",
    # simulation
    "DgpSpec",
    "MonteCarloResult",
    "FAMILIES",
    "random_nonsingular_phi",
    "ar1_path",
    "generate",
    "monte_carlo",
    # io
    "load_csv",
]
