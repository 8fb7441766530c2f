"""Bridge detection and geodesic repair for nearest-neighbor graphs of
noisily sampled manifolds.

Noise lets nearby sheets of a manifold touch, so neighbor graphs grow
shortcut ("bridge") edges that wreck shortest-path distance estimates.
This package scores every edge with one of four decision rules, flags
the extreme tail, and re-estimates geodesics on a penalized graph that
avoids flagged edges whenever possible.  Two benchmark pipelines (a
noisy spiral sheet and blind-angle tomography) exercise the full loop.
"""

from .errors import (
    ConvergenceFailureError,
    GraphDenoiseError,
    InsufficientDataError,
    InvalidGraphError,
    InvalidParameterError,
    SingularMatrixError,
    UndefinedSimilarityError,
)
from .linalg import EigenPairs, SparseMatrix, dense_solve, matvec, top_eigenpairs
from .graph import (
    BridgeSet,
    NNGraph,
    PenalizedGraph,
    PointCloud,
    adjusted_geodesics,
    build_ball_graph,
    build_knn_graph,
    dijkstra_sssp,
    read_graph,
    shortest_path_tree,
    write_graph,
)
from .kernels import (
    DiffusionKernel,
    NeighborProbability,
    diffusion_kernel,
    edge_scores_lowrank,
    graph_laplacian,
    median_half_epsilon,
    neighbor_probability_dense,
    neighbor_probability_series,
    regularized_laplacian_identity_check,
)
from .rules import (
    ecdr,
    edge_betweenness,
    jaccard_overlaps,
    jdr,
    ldr,
    normalized_lengths,
    npdr,
    quantile,
    read_bridge_set,
    run_rule,
    write_bridge_set,
)
from .swissroll import (
    BenchmarkConfig,
    BenchmarkReport,
    apply_noise,
    bridge_labels,
    count_bridges,
    embed,
    geodesic_diameter,
    mean_error,
    reference_nodes,
    run_benchmark,
    sample_swiss_roll,
    surface_normals,
    true_geodesic,
)
from .tomography import (
    AngularOrdering,
    PhantomImage,
    Sinogram,
    backproject_adjoint,
    blind_trial,
    fbp_from_rows,
    fbp_reconstruct,
    ordering_agreement,
    prune_and_order,
    radon_project,
    random_sinogram,
    read_sinogram,
    render_ellipses,
    shepp_logan,
    similarity_rho,
    write_pgm,
    write_sinogram,
)

__version__ = "0.1.0"
