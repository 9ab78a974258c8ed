"""Container for m x m dissimilarity matrices shared across the pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Allowed provenance tags.
KINDS = ("true_dmv", "estimated_dmv", "euclidean")


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric nonnegative matrix of pairwise dissimilarities.

    values     m x m array, zero diagonal.
    kind       one of KINDS, recording how the entries were produced.
    procrustes for estimated matrices, which orthogonal alignment was used:
               "exact_sign" (d=1, exhaustive over {+1,-1}) or
               "frobenius_surrogate" (d>=2, polar-factor Procrustes).
    """

    values: np.ndarray
    kind: str
    procrustes: str | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"dissimilarity matrix must be square, got shape {v.shape}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown dissimilarity kind {self.kind!r}")
        if not np.isfinite(v).all():
            raise ValueError("dissimilarity matrix has non-finite entries")
        if (v < 0).any():
            raise ValueError("dissimilarity matrix has negative entries")
        if np.abs(np.diag(v)).max(initial=0.0) > 0:
            raise ValueError("dissimilarity matrix diagonal must be zero")
        if not np.array_equal(v, v.T):
            raise ValueError("dissimilarity matrix must be symmetric")
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[0]


def as_matrix(dmat) -> np.ndarray:
    """Accept a DissimilarityMatrix or a bare array, return the array."""
    if isinstance(dmat, DissimilarityMatrix):
        return dmat.values
    return np.asarray(dmat, dtype=float)
