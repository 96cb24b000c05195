"""Small vector helpers used throughout: inner products, norms, alignment."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch

__all__ = ["as_vector", "inner", "norm", "cosine"]


def as_vector(a, name: str = "vector") -> np.ndarray:
    """Coerce to a 1-D float array and validate finiteness."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def inner(a, b) -> float:
    """Euclidean inner product of two equal-length vectors."""
    va = as_vector(a, "a")
    vb = as_vector(b, "b")
    if va.shape != vb.shape:
        raise DimensionMismatch(f"length mismatch: {va.shape[0]} vs {vb.shape[0]}")
    return float(np.dot(va, vb))


def norm(a) -> float:
    """Euclidean norm."""
    return float(np.linalg.norm(as_vector(a, "a")))


def cosine(a, b) -> float | None:
    """Cosine of the angle between a and b, or None if either is zero.

    The None return is deliberate: alignment of a zero vector is undefined
    and callers must decide how to handle it rather than receive NaN.
    """
    va = as_vector(a, "a")
    vb = as_vector(b, "b")
    if va.shape != vb.shape:
        raise DimensionMismatch(f"length mismatch: {va.shape[0]} vs {vb.shape[0]}")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        return None
    c = float(np.dot(va, vb) / (na * nb))
    return min(1.0, max(-1.0, c))
