"""Central-smoothing hypergraph network for drug-drug interaction prediction."""

import json

from ._core import (
    CentsmoothError,
    Hypergraph,
    Method,
    ModelParams,
    Optimizer,
    TrainConfig,
    auc,
    aupr,
    baseline_laplacian,
    build_hypergraph,
    central_laplacian,
    central_laplacian_oracle,
    embed,
    extract_significant,
    fisher_exact_one_sided,
    generate_synthetic,
    incidence,
    load_dataset,
    loss_and_gradients,
    parse_method,
    sample_negatives,
    score,
    train,
)
from ._core import cross_validate as _cross_validate

__version__ = "0.1.0"


def cross_validate(graph, config, folds=20, seed=0, jobs=1):
    """Cross-validated report as a dict."""
    return json.loads(_cross_validate(graph, config, folds, seed, jobs))
