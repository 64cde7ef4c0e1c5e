"""Faithfulness evaluation for textual counterfactual explanations.

Quantifies how attainable, connected, and stable a set of counterfactual
texts is relative to labeled ground-truth data, working purely on
precomputed sentence/token embeddings. Ships as a library, an HTTP
service (:mod:`faithbench.service`), and a CLI (:mod:`faithbench.cli`).
"""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    DatasetError,
    EpsRule,
    EvaluationInstance,
    GroundTruthCorpus,
    LabeledText,
    MetricConfig,
    ValidationReport,
    load_corpus,
    load_dataset,
    load_instances,
    save_corpus,
    save_dataset,
    validate_dataset,
)
from .engine import ALL_METRICS, evaluate_content, run_pipeline  # noqa: F401
from .geometry import (  # noqa: F401
    EmbeddingIndex,
    GeometryError,
    cosine_distance,
    cosine_similarity,
    knn,
    word_levenshtein,
)
