"""querysum: query-steered video summarization with a hand-rolled autodiff core.

The engine decomposes a video into per-intent shot scores (query-independent)
and a per-query intent distribution, then mixes them client- or server-side
into one relevance curve from which the summary is selected.
"""

from .errors import (
    ConfigError,
    ConvergenceError,
    DataFormatError,
    DegenerateGraphError,
    DimensionError,
    GradCheckError,
    GraphIntegrityError,
    InputError,
    QuerysumError,
    VocabularyError,
)
from .evaluation import EvalResult, evaluate_summary, max_weight_matching, semantic_iou
from .model import (
    ModelConfig,
    QuerysumModel,
    TextQuery,
    VisualQuery,
    default_budget,
    mix_scores,
    representative_shots,
    select_summary,
)
from .querygen import eigenvector_centrality, generate_visual_query
from .store import load_checkpoint, save_checkpoint, synth_dataset
from .training import TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DataFormatError",
    "DegenerateGraphError",
    "DimensionError",
    "EvalResult",
    "GradCheckError",
    "GraphIntegrityError",
    "InputError",
    "ModelConfig",
    "QuerysumError",
    "QuerysumModel",
    "TextQuery",
    "TrainConfig",
    "VisualQuery",
    "VocabularyError",
    "default_budget",
    "eigenvector_centrality",
    "evaluate_summary",
    "generate_visual_query",
    "load_checkpoint",
    "max_weight_matching",
    "mix_scores",
    "representative_shots",
    "save_checkpoint",
    "select_summary",
    "semantic_iou",
    "synth_dataset",
    "train",
]
