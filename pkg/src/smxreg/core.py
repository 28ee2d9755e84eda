"""Core data types for softmax-regression training problems.

Convention used across the package: samples live in columns.  The feature
matrix is D x N, the target matrix is C x N and a weight matrix is C x D,
so the activations of the whole batch are just ``w @ x``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Target columns must be probability vectors to this tolerance on construction.
TARGET_COLUMN_SUM_TOL = 1e-12

# Relative singular-value threshold below which X is treated as row-rank
# deficient (shared by the convexity and condition-number machinery).
RANK_RTOL = 1e-10


class InvalidInputError(ValueError):
    """A numeric input violates a documented precondition."""


class InvalidLabelError(InvalidInputError):
    """A class label lies outside 1..C.  ``index`` is the offending position."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class DimensionMismatchError(ValueError):
    """Array shapes do not agree."""


class SizeLimitError(ValueError):
    """A dense materialization would exceed its size guard."""


class UnsupportedShapeError(ValueError):
    """The operation is only defined for a particular class count or shape."""


class RankDeficientError(ValueError):
    """The feature matrix does not have full row rank."""

    def __init__(self, message: str, sv_min: float, sv_max: float):
        super().__init__(message)
        self.sv_min = sv_min
        self.sv_max = sv_max


def as_matrix(a, name: str = "array") -> np.ndarray:
    """Coerce to a float64 2-D array, rejecting non-finite entries."""
    out = np.asarray(a, dtype=float)
    if out.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return out


@dataclass(frozen=True)
class Dataset:
    """A training set: features ``x`` (D x N) and targets ``t`` (C x N).

    Every target column is a probability vector (entries in [0, 1], summing
    to 1 within ``TARGET_COLUMN_SUM_TOL``).  Hard one-hot labels are the
    special case produced by :func:`one_hot`; soft labels are accepted
    everywhere.  Both arrays are copied and frozen, so a dataset can be
    shared read-only across threads.
    """

    x: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        x = as_matrix(self.x, "x")
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 2:
            raise DimensionMismatchError(f"t must be 2-D, got shape {t.shape}")
        if x.shape[1] != t.shape[1]:
            raise DimensionMismatchError(
                f"x has {x.shape[1]} columns but t has {t.shape[1]}"
            )
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise DimensionMismatchError("x must have at least one row and column")
        if t.shape[0] < 2:
            raise InvalidInputError("need at least 2 classes")
        if not np.all(np.isfinite(t)):
            raise InvalidInputError("t contains non-finite entries")
        if np.any(t < 0.0) or np.any(t > 1.0):
            raise InvalidInputError("t entries must lie in [0, 1]")
        worst = float(np.max(np.abs(t.sum(axis=0) - 1.0)))
        if worst > TARGET_COLUMN_SUM_TOL:
            raise InvalidInputError(
                f"t columns must sum to 1 (worst deviation {worst:.3e})"
            )
        x = x.copy()
        t = t.copy()
        x.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", t)

    @property
    def d(self) -> int:
        return self.x.shape[0]

    @property
    def c(self) -> int:
        return self.t.shape[0]

    @property
    def n(self) -> int:
        return self.x.shape[1]


def center_columns(w) -> np.ndarray:
    """Subtract each column's mean.

    The result is the canonical representative with zero column sums: among
    all matrices ``w + ones c^T`` it is the unique one whose columns sum to
    zero, and the one of minimal Frobenius norm.
    """
    w = as_matrix(w, "w")
    return w - w.mean(axis=0, keepdims=True)


def one_hot(labels, c: int) -> np.ndarray:
    """Encode 1-based class labels as one-hot target columns (C x N)."""
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise DimensionMismatchError("labels must be a 1-D sequence")
    c = int(c)
    if c < 2:
        raise InvalidInputError("need at least 2 classes")
    out = np.zeros((c, labels.shape[0]))
    for n, lab in enumerate(labels):
        k = int(lab)
        if k != lab or not 1 <= k <= c:
            raise InvalidLabelError(
                f"label {lab!r} at position {n} outside 1..{c}", n
            )
        out[k - 1, n] = 1.0
    return out
