"""Space/momentum variances and uncertainty products of zonal functions on S^n,
with the Abel-Poisson wavelet worked out in full."""

from .abel_poisson import (
    AbelPoissonWavelet,
    ap_abc,
    ap_alpha_extract,
    ap_asymptotics,
    ap_coefficients,
    ap_limit_uncertainty,
    ap_rest_term,
    ap_uncertainty,
    ap_var_momentum_closed,
    ap_var_space,
)
from .localization import (
    CenterOfMassZeroError,
    CoefficientSequence,
    LocalizationReport,
    ZonalFunction,
    uncertainty_product,
    uncertainty_product_quadrature,
    var_momentum_coeff,
    var_momentum_quadrature,
    var_space_coeff,
    var_space_quadrature,
)
from .qseries import QRational, SeriesIndex, SummationResult, s_closed_form, s_numeric, qrational_eval
from .special_fn import Lambda, gamma0, gegenbauer_eval, gen_binomial

__version__ = "0.1.0"
