"""Classical multidimensional scaling and realizability diagnostics.

CMDS turns an m x m dissimilarity matrix D into m points in R^c: form
B = -1/2 P D^(2) P with P = I - J/m the centering matrix, keep the c most
positive eigenpairs, zero any negative kept eigenvalues, and scale the
eigenvectors by the square roots.  The full spectrum of B doubles as a
Euclidean-realizability diagnostic: D is exactly c-realizable iff B is PSD
with exactly c positive eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dissim import as_matrix

__all__ = [
    "MirrorEmbedding",
    "RealizabilityReport",
    "cmds",
    "realizability_report",
    "first_dimension",
]

#: Relative scale below which an eigenvalue counts as zero in the
#: realizability report.
ZERO_TOL = 1e-8


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip eigenvector columns so each one's largest-|entry| is positive.

    Ties go to the lowest index (np.argmax).  Shared with the adjacency
    embedding so repeated runs agree bit for bit.
    """
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        lead = np.argmax(np.abs(col))
        if col[lead] < 0:
            out[:, k] = -col
    return out


@dataclass(frozen=True)
class MirrorEmbedding:
    """CMDS output: coordinates plus the full centered-matrix spectrum.

    coords    m x kept matrix, row k = embedded point at the k-th time
    spectrum  all m eigenvalues of B in decreasing order
    kept      number of embedding dimensions requested
    """

    coords: np.ndarray
    spectrum: np.ndarray
    kept: int

    @property
    def m(self) -> int:
        return self.coords.shape[0]


@dataclass(frozen=True)
class RealizabilityReport:
    """Spectral quantities deciding (approximate) Euclidean realizability.

    n_positive     eigenvalues above the relative zero tolerance
    most_negative  smallest eigenvalue of B (>= -tol for realizable D)
    lambda1        largest eigenvalue
    lambda1_over_m lambda1 / m (bounded away from 0 for mirror-dominant D)
    tail_ratio     sum_{i>=2} lambda_i^2 / lambda1 (small when one dimension
                   carries the signal); NaN when lambda1 is zero
    """

    n_positive: int
    most_negative: float
    lambda1: float
    lambda1_over_m: float
    tail_ratio: float


def _centered_gram(dmat) -> np.ndarray:
    d = as_matrix(dmat)
    m = d.shape[0]
    if d.ndim != 2 or d.shape != (m, m):
        raise ValueError(f"dissimilarity matrix must be square, got {d.shape}")
    sq = d * d
    # P A P computed by explicit row/column/grand-mean centering.
    row = sq.mean(axis=1, keepdims=True)
    col = sq.mean(axis=0, keepdims=True)
    grand = sq.mean()
    return -0.5 * (sq - row - col + grand)


def _spectrum(dmat):
    b = _centered_gram(dmat)
    vals, vecs = np.linalg.eigh(b)
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def cmds(dmat, c: int) -> MirrorEmbedding:
    """Embed a dissimilarity matrix into c dimensions by CMDS.

    Negative eigenvalues among the kept c are zeroed, so their columns come
    out identically zero.  The full spectrum is retained for diagnostics.
    """
    d = as_matrix(dmat)
    m = d.shape[0]
    if m < 2:
        raise ValueError("CMDS needs at least 2 points")
    if not 1 <= c <= m - 1:
        raise ValueError(f"embedding dimension c={c} must satisfy 1 <= c <= m-1={m - 1}")
    vals, vecs = _spectrum(d)
    kept_vals = np.maximum(vals[:c], 0.0)
    kept_vecs = fix_signs(vecs[:, :c])
    coords = kept_vecs * np.sqrt(kept_vals)
    return MirrorEmbedding(coords=coords, spectrum=vals, kept=c)


def realizability_report(dmat) -> RealizabilityReport:
    """Summarize the spectrum of B for realizability checks."""
    d = as_matrix(dmat)
    vals, _ = _spectrum(d)
    lambda1 = float(vals[0])
    tol = ZERO_TOL * max(1.0, lambda1)
    n_positive = int(np.sum(vals > tol))
    tail = float(np.sum(vals[1:] ** 2))
    tail_ratio = tail / lambda1 if lambda1 > tol else float("nan")
    return RealizabilityReport(
        n_positive=n_positive,
        most_negative=float(vals[-1]),
        lambda1=lambda1,
        lambda1_over_m=lambda1 / d.shape[0],
        tail_ratio=tail_ratio,
    )


def first_dimension(me: MirrorEmbedding) -> np.ndarray:
    """First mirror coordinate at each time (input to the localizer)."""
    if me.kept < 1:
        raise ValueError("embedding has no kept dimensions")
    return me.coords[:, 0].copy()
