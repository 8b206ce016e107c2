"""thintail: operational-risk capital for aggregated conduct-risk losses.

Severity is modeled with very-thin-tailed power-exponential
distributions (Exp4 and the power-n family ExpN), fitted and validated
with an enclosed-area goodness-of-fit statistic, and convolved with a
frequency model by Monte Carlo to obtain the 99.9% value-at-risk.
"""

from .dist import (
    Exp4MixtureParams,
    Exp4Params,
    ExpNParams,
    LogNormalParams,
    NormalParams,
    ParetoParams,
    PointMassParams,
    SeverityModel,
    WeibullParams,
    baseline_cdf,
    baseline_pdf,
    baseline_quantile,
    baseline_sample,
    exp4_cdf,
    exp4_mixture_cdf,
    exp4_mixture_pdf,
    exp4_mixture_sample,
    exp4_pdf,
    exp4_quantile,
    exp4_sample,
    expn_cdf,
    expn_pdf,
    expn_quantile,
    expn_sample,
)
from .fit import FitConfig, FitResult, fit_exp4, fit_expn, scale_losses
from .ingest import (
    AggregatedLossSet,
    LossCsvError,
    LossRecord,
    aggregate,
    parse_csv,
    parse_pre_aggregated,
    summary,
    write_csv,
)
from .lda import (
    CapitalResult,
    LdaConfig,
    NegativeBinomialFreq,
    NormalApproxFreq,
    PoissonFreq,
    annual_frequency,
    compare_models,
    percentile_vs_n,
    run_lda,
)
from .specfun import Accuracy, log_gamma, regularized_upper_gamma, upper_inc_gamma
from .tna import (
    EmpiricalDistribution,
    TnaResult,
    critical_value,
    decisions_for_area,
    empirical_from_losses,
    enclosed_area,
    invert_significance,
    significance_area,
    tna_test,
    to_probability_space,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # specfun
    "Accuracy",
    "log_gamma",
    "upper_inc_gamma",
    "regularized_upper_gamma",
    # dist
    "Exp4Params",
    "ExpNParams",
    "Exp4MixtureParams",
    "NormalParams",
    "LogNormalParams",
    "WeibullParams",
    "ParetoParams",
    "PointMassParams",
    "SeverityModel",
    "exp4_pdf",
    "exp4_cdf",
    "exp4_quantile",
    "exp4_sample",
    "expn_pdf",
    "expn_cdf",
    "expn_quantile",
    "expn_sample",
    "exp4_mixture_pdf",
    "exp4_mixture_cdf",
    "exp4_mixture_sample",
    "baseline_pdf",
    "baseline_cdf",
    "baseline_quantile",
    "baseline_sample",
    # tna
    "EmpiricalDistribution",
    "TnaResult",
    "empirical_from_losses",
    "to_probability_space",
    "enclosed_area",
    "significance_area",
    "critical_value",
    "invert_significance",
    "decisions_for_area",
    "tna_test",
    # fit
    "FitConfig",
    "FitResult",
    "scale_losses",
    "fit_exp4",
    "fit_expn",
    # lda
    "PoissonFreq",
    "NegativeBinomialFreq",
    "NormalApproxFreq",
    "LdaConfig",
    "CapitalResult",
    "annual_frequency",
    "run_lda",
    "compare_models",
    "percentile_vs_n",
    # ingest
    "LossRecord",
    "AggregatedLossSet",
    "LossCsvError",
    "parse_csv",
    "parse_pre_aggregated",
    "write_csv",
    "aggregate",
    "summary",
]
