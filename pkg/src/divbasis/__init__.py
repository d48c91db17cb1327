"""Estimation of density functionals and Bayes-error bounds directly from
two-class samples, via neighborhood label-count statistics and fitted
polynomial-basis weights."""

from .basis import basis_matrix, bernstein_eval, bernstein_weights
from .datasets import (
    DistributionSpec,
    GaussianSpec,
    LabeledDataset,
    UniformCubeSpec,
    dataset_from_csv,
    dataset_to_csv,
    estimate_priors,
    experiment_specs,
    fukunaga_specs,
    gen_gaussian,
    gen_uniform_cube,
    make_experiment_dataset,
    make_fukunaga_dataset,
)
from .estimators import (
    BoundPair,
    EstimateReport,
    bhattacharyya_bounds,
    dp_bounds,
    estimate_ber_upper_bound,
    estimate_functional,
    euclidean_mst,
    mst_dp_estimate,
    parametric_plugin,
    theoretical_bound_curves,
)
from .functionals import (
    PosteriorGrid,
    PosteriorMap,
    ber_map,
    default_eta_grid,
    dp_map,
    hellinger_map,
    kl_map,
    map_from_phi,
    posterior_map,
)
from .neighborhood import (
    CountFractions,
    PosteriorDensityEstimate,
    count_fractions,
    interp_density,
    knn_neighborhoods,
    label_counts,
    posterior_density_estimate,
)
from .optimize import (
    BasisWeights,
    FitConfig,
    QPConvergenceError,
    QPInfeasibleError,
    fit_bound,
    fit_density_weighted,
    fit_uniform,
    solve_constrained_qp,
    solve_ridge,
    weights_for_method,
)
from .oracles import (
    GroundTruth,
    analytic_gaussian_divergence,
    asymptotic_fractions,
    error_decomposition,
    mc_integral_functional,
    normal_cdf,
    posterior_draws,
    true_ber,
)

__version__ = "0.1.0"
