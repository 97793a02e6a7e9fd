"""Few-shot temporal knowledge graph completion."""

from ._filt import (
    ArgumentError,
    Dataset,
    FiltError,
    NumericError,
    ParseError,
    ShapeError,
    apportion,
    complex_score,
    gradcheck,
    metrics_from_ranks,
    pessimistic_rank,
    synthetic_corpus,
    time_weights,
    train_and_evaluate,
)

__all__ = [
    "ArgumentError",
    "Dataset",
    "FiltError",
    "NumericError",
    "ParseError",
    "ShapeError",
    "apportion",
    "complex_score",
    "gradcheck",
    "metrics_from_ranks",
    "pessimistic_rank",
    "synthetic_corpus",
    "time_weights",
    "train_and_evaluate",
]
