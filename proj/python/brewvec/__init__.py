"""Skip-gram flavor embeddings for beers with dot-product retrieval."""

from ._core import (
    DomainError,
    Error,
    FormatError,
    IoError,
    Model,
    NotFoundError,
    ParseError,
    TrainingError,
    ValidationError,
    Dataset,
    load_checkins,
    pca_beer_vectors,
    synthetic,
    train,
)

__all__ = [
    "Dataset",
    "DomainError",
    "Error",
    "FormatError",
    "IoError",
    "Model",
    "NotFoundError",
    "ParseError",
    "TrainingError",
    "ValidationError",
    "load_checkins",
    "pca_beer_vectors",
    "synthetic",
    "train",
]
