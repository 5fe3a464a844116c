"""Nonparametric spectral graph analysis.

One construction drives everything here: the correlation field of a
weighted graph (the joint vertex-pair measure divided by the product of
its marginals) is expanded in a piecewise-constant basis on the vertex
quantile grid, and the generalized eigenproblem of the resulting
transform matrix yields the Karhunen-Loeve vertex basis.  Choosing the
raw or smoothed probability estimates and the basis family recovers the
normalized Laplacian, modularity, diffusion-map, regularized Laplacian,
and teleporting random-walk analyses, which then power community
detection and graph-structured regression.
"""

__version__ = "0.1.0"

from .clustering import (
    ClusterResult,
    algebraic_connectivity,
    choose_k_spectral_gap,
    kmeans,
    misclassification,
    spectral_cluster,
)
from .errors import (
    DataError,
    DegenerateTauError,
    GraphValidationError,
    IsolatedVertexError,
    NumericalError,
)
from .field import GraFieldMatrix, empirical_grafield, graph_entropy
from .graphs import (
    Graph,
    NetworkPMF,
    VertexPMF,
    from_adjacency,
    load_graph,
    make_vertex_pmf,
    network_pmf_mle,
    read_edge_list,
    read_graph,
    read_labels,
    read_matrix_market,
    vertex_pmf_mle,
    write_edge_list,
)
from .regression import (
    RegressionFit,
    SpatialDataset,
    build_spatial_graph,
    kkt_gap,
    lambda_grid,
    lasso_solve,
    soft_threshold,
    spectral_regression,
)
from .smoothing import (
    TauPolicy,
    TransitionMatrix,
    additive_smooth,
    as_tau_policy,
    good_turing_pmf,
    good_turing_raw,
    smooth_network_pmf,
    smooth_transition,
    smooth_vertex_pmf,
    stein_tau,
    stein_tau_from_counts,
)
from .spectral import (
    BLOCK_PULSE,
    CHARACTERISTIC,
    OPERATOR_KINDS,
    REGULARIZED_BLOCK_PULSE,
    BasisFamily,
    GMatrix,
    ShiftOperator,
    SpectralDecomposition,
    build_basis,
    diffusion_coords,
    diffusion_distance,
    g_matrix,
    g_matrix_from_graph,
    gft,
    kl_decomposition,
    pagerank_spectrum,
    shift_operator,
    solve_spectrum,
)

__all__ = [name for name in dir() if not name.startswith("_")]
