"""Latent structure random graphs: sampling, embedding, estimation, testing.

The pipeline in one line: sample (or ingest) a graph whose latent
positions live on a curve, recover the positions spectrally, project them
onto the (known or fitted) support curve, pull them back to the unit
interval through the arclength map, and treat the pullbacks as data for
parameter estimation or two-sample testing.
"""

from .curves import (
    ArclengthCurve,
    BezierFit,
    ParametricCurve,
    QuadraticBezier,
    TubeConfig,
    arclength_reparameterize,
    default_tube,
    fit_quadratic_bezier,
    hardy_weinberg,
    minimal_subspace_dimension,
)
from .distributions import BetaParams, DiscreteDistribution
from .experiments import (
    MseConfig,
    MseReport,
    PvalueSamples,
    PvalueSimConfig,
    mse_experiment,
    pvalue_distribution_experiment,
)
from .graphs import (
    LsmSpec,
    SbmSpec,
    probability_matrix,
    sample_lsm,
    sample_rdpg,
    sample_sbm,
    validate_inner_product,
)
from .inference import (
    FitResult,
    PullbackFitResult,
    beta_fisher_information,
    beta_loglik,
    clamp_to_interior,
    fit_beta,
    lsm_m_estimate,
    mollified_loglik,
)
from .manifold import (
    UnitIntervalEmbedding,
    geodesic_distances,
    isomap_unit_interval,
    knn_graph,
    orientation_pair,
)
from .rng import experiment_rng, replicate_rng
from .spectral import (
    AlignmentResult,
    EmbeddingResult,
    ase,
    ase_directed,
    asymptotic_covariance,
    procrustes,
    profile_likelihood_split,
    select_dimension,
)
from .twosample import KsResult, TwoSampleReport, ks_pvalue, ks_statistic, ks_test, two_sample_lsm_test

__version__ = "0.1.0"

__all__ = [
    "ArclengthCurve",
    "AlignmentResult",
    "BetaParams",
    "BezierFit",
    "DiscreteDistribution",
    "EmbeddingResult",
    "FitResult",
    "KsResult",
    "LsmSpec",
    "MseConfig",
    "MseReport",
    "ParametricCurve",
    "PullbackFitResult",
    "PvalueSamples",
    "PvalueSimConfig",
    "QuadraticBezier",
    "SbmSpec",
    "TubeConfig",
    "TwoSampleReport",
    "UnitIntervalEmbedding",
    "arclength_reparameterize",
    "ase",
    "ase_directed",
    "asymptotic_covariance",
    "beta_fisher_information",
    "beta_loglik",
    "clamp_to_interior",
    "default_tube",
    "experiment_rng",
    "fit_beta",
    "fit_quadratic_bezier",
    "geodesic_distances",
    "hardy_weinberg",
    "isomap_unit_interval",
    "knn_graph",
    "ks_pvalue",
    "ks_statistic",
    "ks_test",
    "lsm_m_estimate",
    "minimal_subspace_dimension",
    "mollified_loglik",
    "mse_experiment",
    "orientation_pair",
    "probability_matrix",
    "procrustes",
    "profile_likelihood_split",
    "pvalue_distribution_experiment",
    "replicate_rng",
    "sample_lsm",
    "sample_rdpg",
    "sample_sbm",
    "select_dimension",
    "two_sample_lsm_test",
    "validate_inner_product",
]
