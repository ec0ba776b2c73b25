"""Quadrature-based feature maps for Gaussian and sparse ANOVA kernels."""

from ._core import (
    AnovaKernel,
    ArgumentError,
    ConfigError,
    ConstructionFailed,
    ContractError,
    ConvergenceError,
    Error,
    FeatureMap,
    GridQuadrature,
    ParseError,
    SizeError,
    UnsupportedEmbedding,
    bisect_lambda,
    construct_poly_exact,
    counts,
    dense_grid,
    embed_grid_fast,
    error_curve,
    eval_anova,
    eval_gaussian,
    exactness_residual,
    feature_map_from_json,
    gauss_hermite,
    max_error_empirical,
    nnls,
    poly_bound,
    qmc_halton,
    reweight,
    rff,
    sparse_bound,
    sparse_grid,
    subsample_dense,
    subsample_grid,
    sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
