"""BaryScore: optimal-transport evaluation of generated text.

Token embeddings from every layer of a contextual encoder are treated as
discrete probability measures; each text is summarized by the free-support
Wasserstein barycenter of its layer measures, and a candidate/reference pair
is scored by the exact 2-Wasserstein distance between the two barycenters
(lower is better). The package also ships the correlation-with-human-judgment
harness used to evaluate such metrics.
"""

from .barycenter import (
    BarycenterConfig,
    BarycenterResult,
    free_support_barycenter,
    init_support,
    update_locations,
)
from .embeddings import (
    IdfTable,
    LayeredEmbedding,
    MeasureBundle,
    build_measures,
    compute_idf,
    load_bundle,
    write_bundle,
)
from .errors import (
    AllRowsDegenerate,
    BaryScoreError,
    DegenerateInput,
    DimensionMismatch,
    DomainError,
    EmptyCorpus,
    EmptyText,
    InfeasibleMarginals,
    MissingScores,
    NonConvergence,
    NonFinite,
    ParseError,
    SchemaError,
    SizeMismatch,
    SolverFailure,
)
from .evaluation import (
    CorrelationReport,
    EvalDataset,
    kendall,
    pearson,
    spearman,
    system_level,
    text_level,
    williams_test,
)
from .measures import CostMatrix, DiscreteMeasure, TransportPlan
from .ot import cost_matrix, sinkhorn_transport, solve_transport, wasserstein
from .scoring import ScoreConfig, ScoreRecord, bary_score, batch_score

__version__ = "0.1.0"

__all__ = [
    "AllRowsDegenerate",
    "BarycenterConfig",
    "BarycenterResult",
    "BaryScoreError",
    "CorrelationReport",
    "CostMatrix",
    "DegenerateInput",
    "DimensionMismatch",
    "DiscreteMeasure",
    "DomainError",
    "EmptyCorpus",
    "EmptyText",
    "EvalDataset",
    "IdfTable",
    "InfeasibleMarginals",
    "LayeredEmbedding",
    "MeasureBundle",
    "MissingScores",
    "NonConvergence",
    "NonFinite",
    "ParseError",
    "SchemaError",
    "ScoreConfig",
    "ScoreRecord",
    "SizeMismatch",
    "SolverFailure",
    "TransportPlan",
    "bary_score",
    "batch_score",
    "build_measures",
    "compute_idf",
    "cost_matrix",
    "free_support_barycenter",
    "init_support",
    "kendall",
    "load_bundle",
    "pearson",
    "sinkhorn_transport",
    "solve_transport",
    "spearman",
    "system_level",
    "text_level",
    "update_locations",
    "wasserstein",
    "williams_test",
    "write_bundle",
]
