"""Hamilton-Jacobi (p-eikonal) equations on weighted graphs.

Fast marching and Dijkstra solvers, density weighting, p-eikonal medians and
data depth, nearest-labeled-set classification with class priors, and a set of
numerical checks for robustness and discrete-to-continuum convergence.
"""

from .graph import (
    Graph,
    KernelSpec,
    Perturbation,
    add_perturbation,
    build_knn_graph,
    build_proximity_graph,
    compute_sigma_p,
    inject_corrupted_edges,
    max_unweighted_in_degree,
    power_graph,
)
from .solver import (
    SolutionField,
    SolverParams,
    apply_operator,
    extract_descent_path,
    local_update,
    residual,
    solve_graph_eikonal,
    solve_peikonal,
)
from .density import DensityField, knn_density, rhs_from_density
from .datasets import LabeledPointCloud, sample_ball, sample_gaussian_mixture, sample_manifold, sample_two_moons
from .depth import DepthResult, compute_depth, compute_median, extremal_points
from .ssl import (
    LabelResult,
    PriorWeights,
    accuracy,
    class_distances,
    fit_class_priors,
    predict_labels,
)
from .analysis import (
    BetaMatrix,
    beta_star_cycles,
    beta_star_minmax,
    continuum_distance_oracle,
    convergence_experiment,
    robustness_bound,
    sandwich_check,
    verify_robustness,
)

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "KernelSpec",
    "Perturbation",
    "add_perturbation",
    "build_knn_graph",
    "build_proximity_graph",
    "compute_sigma_p",
    "inject_corrupted_edges",
    "max_unweighted_in_degree",
    "power_graph",
    "SolutionField",
    "SolverParams",
    "apply_operator",
    "extract_descent_path",
    "local_update",
    "residual",
    "solve_graph_eikonal",
    "solve_peikonal",
    "LabeledPointCloud",
    "sample_ball",
    "sample_gaussian_mixture",
    "sample_manifold",
    "sample_two_moons",
    "DensityField",
    "knn_density",
    "rhs_from_density",
    "DepthResult",
    "compute_depth",
    "compute_median",
    "extremal_points",
    "LabelResult",
    "PriorWeights",
    "accuracy",
    "class_distances",
    "fit_class_priors",
    "predict_labels",
    "BetaMatrix",
    "beta_star_cycles",
    "beta_star_minmax",
    "continuum_distance_oracle",
    "convergence_experiment",
    "robustness_bound",
    "sandwich_check",
    "verify_robustness",
    "__version__",
]
