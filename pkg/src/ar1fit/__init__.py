"""Estimate the AR(1) parameter of a stationary series from one assumed noise autocovariance."""

__version__ = "0.1.0"

from .core import (
    AcvfConfig,
    AcvfEstimate,
    TimeSeries,
    acvf_vector,
    ar1_true_acvf,
    arma_true_acvf,
    bartlett_matrix,
    bartlett_sigma,
    estimate_acvf,
    sample_autocovariance,
)
from .errors import (
    Ar1FitError,
    DomainError,
    InconsistencyError,
    TestUnavailableError,
    UninformativeLagError,
)
from .estimator import EstimatorConfig, NoiseSpec, PhiEstimate, estimate
from .hypothesis import TestResult, test_a_equal, test_g_zero, test_gamma_equals_r, test_gamma_zero
from .noise import recover_noise_acvf
from .mc import GridSpec, run_grid
from .simgen import ProcessSpec, simulate

__all__ = [
    "__version__",
    "AcvfConfig",
    "AcvfEstimate",
    "TimeSeries",
    "acvf_vector",
    "ar1_true_acvf",
    "arma_true_acvf",
    "bartlett_matrix",
    "bartlett_sigma",
    "estimate_acvf",
    "sample_autocovariance",
    "Ar1FitError",
    "DomainError",
    "InconsistencyError",
    "TestUnavailableError",
    "UninformativeLagError",
    "EstimatorConfig",
    "NoiseSpec",
    "PhiEstimate",
    "estimate",
    "TestResult",
    "test_a_equal",
    "test_g_zero",
    "test_gamma_equals_r",
    "test_gamma_zero",
    "recover_noise_acvf",
    "GridSpec",
    "run_grid",
    "ProcessSpec",
    "simulate",
]
