"""volkit: GARCH-family volatility modelling, innovation goodness-of-fit
testing via a martingale-transformed empirical process, and VaR/ES risk
figures under Gaussian or generalized-error innovations."""

__version__ = "0.1.0"

from .distributions import Gaussian, Ged, MgfRegion, Sged, ged_mgf, mgf_region, moments, var_es
from .garch import (
    AugParams,
    GarchParams,
    GarchSpec,
    filter_volatility,
    forecast_sigma_sq,
    information_criteria,
    params_from_dict,
    params_to_dict,
    simulate,
    stationarity,
)
from .estimation import FitOptions, FitResult, fit, loglikelihood
from .gof import (
    CRITICAL_VALUES,
    GofReport,
    c_matrix,
    edf_ks_cvm,
    gdot,
    khmaladze_transform,
    ks_cvm,
    pseudo_observations,
    test_gaussian_innovations,
    test_ged_innovations_edf,
)
from .bootstrap import BootstrapConfig, BootstrapResult, bootstrap_pvalue
from .data import CsvSchema, PriceSeries, ReturnSeries, diagnostics, load_csv, log_returns
from .numerics import QuadratureRule, integrate_gk, invert3, rng_stream, special_gamma_suite

__all__ = [
    "__version__",
    "Gaussian", "Ged", "Sged", "MgfRegion", "ged_mgf", "mgf_region", "moments", "var_es",
    "AugParams", "GarchParams", "GarchSpec", "filter_volatility", "forecast_sigma_sq",
    "information_criteria", "params_from_dict", "params_to_dict", "simulate", "stationarity",
    "FitOptions", "FitResult", "fit", "loglikelihood",
    "CRITICAL_VALUES", "GofReport", "c_matrix", "edf_ks_cvm", "gdot",
    "khmaladze_transform", "ks_cvm", "pseudo_observations",
    "test_gaussian_innovations", "test_ged_innovations_edf",
    "BootstrapConfig", "BootstrapResult", "bootstrap_pvalue",
    "CsvSchema", "PriceSeries", "ReturnSeries", "diagnostics", "load_csv", "log_returns",
    "QuadratureRule", "integrate_gk", "invert3", "rng_stream", "special_gamma_suite",
]
