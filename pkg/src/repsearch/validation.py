"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .errors import BuildError, ConfigError

__all__ = [
    "check_positive_int",
    "check_unit_interval",
    "check_sparse_rep",
    "check_doc_ids",
    "as_dense_matrix",
]


def check_positive_int(value: object, name: str) -> int:
    """Require an integer >= 1."""
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ConfigError(f"{name} must be an integer, got {type(value).__name__}")
    if value < 1:
        raise ConfigError(f"{name} must be >= 1, got {value}")
    return int(value)


def check_unit_interval(value: object, name: str) -> float:
    """Require a float in [0, 1]."""
    if isinstance(value, bool) or not isinstance(value, (int, float, np.floating)):
        raise ConfigError(f"{name} must be a number, got {type(value).__name__}")
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must be in [0, 1], got {value}")
    return value


def check_sparse_rep(rep: Mapping[str, int], where: str = "sparse representation") -> None:
    """Require integer weights >= 1 keyed by non-empty strings."""
    for token, weight in rep.items():
        if not isinstance(token, str) or not token:
            raise BuildError(f"{where}: token keys must be non-empty strings")
        if isinstance(weight, bool) or not isinstance(weight, (int, np.integer)):
            raise BuildError(f"{where}: weight for {token!r} must be an integer")
        if weight < 1:
            raise BuildError(f"{where}: weight for {token!r} must be >= 1, got {weight}")


def check_doc_ids(doc_ids: Sequence[str]) -> None:
    """Require non-empty, unique doc ids."""
    seen: set[str] = set()
    for doc_id in doc_ids:
        if not isinstance(doc_id, str) or not doc_id:
            raise BuildError("doc ids must be non-empty strings")
        if doc_id in seen:
            raise BuildError(f"duplicate doc id {doc_id!r}")
        seen.add(doc_id)


def as_dense_matrix(X: object) -> np.ndarray:
    """Coerce to a 2-D float array of finite values."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise BuildError(f"expected a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise BuildError("dense matrix contains non-finite values")
    return arr
