"""depthlab: statistical depth functions, deepest estimators, maximum-bias
curves, and a contamination benchmark for robust scatter estimators."""

from .numerics import (
    RngStream,
    SpdMatrix,
    m_scale,
    mahalanobis_sq,
    std_normal_cdf,
    std_normal_quantile,
    sym_eigen,
    unit_directions,
)
from .depth import (
    ls_depth1,
    ls_depth2,
    mvreg_depth,
    mvreg_depth_residual,
    read_dataset,
    regression_depth,
    scatter_depth,
    scatter_depth_gaussian,
    scatter_depth_pointmass,
    tukey_depth,
    tukey_depth_1d,
)
from .deepest import (
    SearchConfig,
    deepest_locscale1,
    deepest_locscale2,
    deepest_regression,
    deepest_scatter,
    tukey_median,
)
from .maxbias import (
    DivergenceError,
    curve_table,
    g_function,
    ls2_breakdown,
    pointmass_depth_limit,
    regdepth_maxbias,
    scatter_breakdown,
    scatter_eigen_bounds,
    scatter_maxbias,
    tukey_median_maxbias,
    univ_median_maxbias,
)

__version__ = "0.1.0"
