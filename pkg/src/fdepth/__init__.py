"""Half-region depth, its local variants, and depth-based clustering of curves."""

__version__ = "0.1.0"

from .dataset import (
    DatasetError,
    FunctionalDataset,
    Grid,
    TauSelection,
    affine_transform,
    as_tau,
    load_csv,
    pairwise_sup_distances,
    select_tau,
    standardize_mad,
    sup_distance,
    validate,
    write_csv,
)
from .depth import (
    DepthMethod,
    DepthReport,
    depth_all,
    depth_hr,
    depth_mhr,
    hypo_epi_proportions,
    length_proportions,
)
from .local_depth import (
    band_contains,
    local_depth_all,
    local_depth_hr,
    local_depth_mhr,
    local_hypo_epi_proportions,
    local_length_proportions,
)
from .similarity import (
    DissimilarityMatrix,
    SimilarityMatrix,
    SimilarityMethod,
    envelope,
    gower_dissimilarity,
    local_sim_hr,
    local_sim_mhr,
    sim_hr,
    similarity_matrix,
)
from .clustering import ClusterLabels, Dendrogram, SilhouetteReport, cut_tree, silhouette, ward_linkage
