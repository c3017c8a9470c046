"""Sparse D-vine copula quantile regression for high-dimensional data.

Submodules
----------
bicop     parametric bivariate copulas: pdf, h-functions, inverses, MLE,
          AIC/BIC family selection
margins   Gaussian-kernel margins with analytic CDF/quantile and PIT
dvine     D-vine model, sequential extension, conditional loglik/cdf/quantile
select    forward selection (residual-guided, partial-correlation, baseline)
          with the conditional-AIC stop
simbench  simulation benchmark: DGP generators, TPR/FDR, pinball loss,
          seeded replication runner
genomics  SNP preprocessing, Wald screening, grouped latent features
cli       command-line entry point (fit / predict / simulate /
          extract-features / evaluate)
"""

from . import bicop, dvine, genomics, margins, select, simbench
from .bicop import FittedBicop, fit_mle, select_family
from .dvine import DVineModel, conditional_quantile, predict_quantiles
from .select import SelectionConfig, vinereg_baseline, vinereg_parcor, vinereg_res
from .simbench import DGPConfig, gen_dgp1, gen_dgp2, pinball, run_benchmark, tpr_fdr

__all__ = [
    "bicop",
    "margins",
    "dvine",
    "select",
    "simbench",
    "genomics",
    "FittedBicop",
    "fit_mle",
    "select_family",
    "DVineModel",
    "conditional_quantile",
    "predict_quantiles",
    "SelectionConfig",
    "vinereg_res",
    "vinereg_parcor",
    "vinereg_baseline",
    "DGPConfig",
    "gen_dgp1",
    "gen_dgp2",
    "tpr_fdr",
    "pinball",
    "run_benchmark",
]
__version__ = "0.1.0"
