"""Robust functional data analysis with the spatial sign covariance operator."""

from .errors import (
    AmbiguousAlignment,
    DegenerateEigenvalue,
    DegenerateObservation,
    IncompatibleGrids,
    InsufficientRank,
    InvalidArgument,
    NotSelfAdjoint,
    NumericalFailure,
    SpatialSignError,
)
from .hilbert import (
    Curve,
    Grid,
    HSOperator,
    Sample,
    apply,
    as_sample,
    compose,
    hs_inner,
    hs_norm,
    inner,
    make_equidistant_grid,
    norm,
    sample_from_array,
    sign,
    tensor,
)
from .location import (
    MedianResult,
    pointwise_mean,
    spatial_median_asgd,
    spatial_median_weiszfeld,
)
from .signcov import (
    SignCovResult,
    empirical_F,
    empirical_G,
    empirical_S,
    shift_correction,
    sign_cov,
)
from .simgen import (
    SimDesign,
    contaminate,
    gen_bm,
    gen_elliptical_t,
    gen_model1,
    gen_model2,
    gen_samples,
)
from .spca import (
    EigenSystem,
    align_sign,
    eigendecompose,
    eigenprojection,
    resolvent_delta,
    shrinkage_factor_mc,
)
from .twosample import (
    TestResult,
    ThetaSpectrum,
    bootstrap_null,
    estimate_theta_spectrum,
    half_vec,
    run_test,
    statistic_classical,
    statistic_sign,
)
from .experiment import ExperimentConfig, classify_size, run_experiment, size_band

__version__ = "0.1.0"
