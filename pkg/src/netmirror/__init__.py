"""netmirror: Euclidean mirrors and changepoint localization for network time series.

Pipeline: simulate a latent-position random walk with a jump-probability
changepoint, sample conditionally independent dot-product graphs, embed each
snapshot spectrally, estimate the pairwise d_MV dissimilarities, mirror them
into low-dimensional coordinates with classical MDS (optionally unrolled to
one dimension by ISOMAP), and localize the changepoint with a minimax
one-knot piecewise-linear fit.
"""

from .dissim import DissimilarityMatrix
from .embed import (
    Embedding,
    EigensolverError,
    ase,
    estimated_dissimilarity_matrix,
    estimated_dmv,
    select_dimension,
)
from .experiments import (
    McReport,
    NetworkSummary,
    dimension_sweep,
    largest_common_component,
    mc_localization,
    network_summaries,
)
from .graphs import AdjacencyTimeSeries, connection_probability_matrix, sample_tsg
from .isomirror import IsoMirror, iso_reduce
from .localize import (
    DetectionResult,
    PiecewiseLinearFit,
    bootstrap_detect,
    detection_statistic,
    fit_at_knot,
    localize,
)
from .mirror import (
    MirrorEmbedding,
    RealizabilityReport,
    cmds,
    first_dimension,
    realizability_report,
)
from .walks import (
    LatentTrajectorySet,
    WalkConfig,
    asymptotic_mirror,
    deterministic_mirror,
    simulate_walk,
    true_dmv_matrix,
    true_dmv_squared,
)

__version__ = "0.1.0"

__all__ = [
    "AdjacencyTimeSeries",
    "DetectionResult",
    "DissimilarityMatrix",
    "Embedding",
    "EigensolverError",
    "IsoMirror",
    "LatentTrajectorySet",
    "McReport",
    "MirrorEmbedding",
    "NetworkSummary",
    "PiecewiseLinearFit",
    "RealizabilityReport",
    "WalkConfig",
    "ase",
    "asymptotic_mirror",
    "bootstrap_detect",
    "cmds",
    "connection_probability_matrix",
    "deterministic_mirror",
    "detection_statistic",
    "dimension_sweep",
    "estimated_dissimilarity_matrix",
    "estimated_dmv",
    "first_dimension",
    "fit_at_knot",
    "iso_reduce",
    "largest_common_component",
    "localize",
    "mc_localization",
    "network_summaries",
    "realizability_report",
    "sample_tsg",
    "select_dimension",
    "simulate_walk",
    "true_dmv_matrix",
    "true_dmv_squared",
    "__version__",
]
