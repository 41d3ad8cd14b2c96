"""Numerical laboratory for free-energy fluctuations of mean-field spin glasses
under weak external fields: exact partition functions, loop/path cluster
statistics, overlap fixed points, exchangeable-pair checks, and the predicted
Gaussian / compound-Poisson limit laws for the SK, bipartite-SK, and
diluted-SK models at desk scale."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    CompleteBipartiteGraph,
    CompleteGraph,
    DisorderDistribution,
    DisorderSample,
    EdgeWeightField,
    ModelParams,
    SparseGraph,
    edge_weights,
    field_strength,
    hamiltonian,
    sample_disorder,
)
from .exact import (  # noqa: F401
    Decomposition,
    GibbsSummary,
    decompose,
    gibbs_summary,
    log_partition,
    zhat_subset_sum,
)
from .fixed_point import (  # noqa: F401
    FixedPointResult,
    PredictedLaw,
    predicted_law,
    solve_q,
    v1_squared,
    v2_squared,
    var_logcosh,
)
from .clusters import (  # noqa: F401
    ClusterStats,
    TruncationReport,
    cluster_stats,
    limit_constants,
    truncation_bound,
    truncation_report,
    zbar_shift,
    ztilde,
)
from .harness import ExperimentConfig, ExperimentResult, emit_report, run_experiment  # noqa: F401
