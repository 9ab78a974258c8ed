"""Sampling of conditionally independent RDPG snapshots from latent paths."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _rng
from .walks import LatentTrajectorySet

__all__ = [
    "AdjacencyTimeSeries",
    "sample_tsg",
    "connection_probability_matrix",
]

#: Inner products may stray this far outside [0, 1] from floating-point
#: noise and are clamped; anything worse is a model violation.
CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class AdjacencyTimeSeries:
    """m undirected snapshots on a common vertex set.

    graphs is an (m, n, n) uint8 array; every slice is symmetric with a zero
    diagonal.  Dense byte storage is deliberate: desk-scale n makes sparse
    bookkeeping a net loss.
    """

    n: int
    times: np.ndarray
    graphs: np.ndarray

    @property
    def m(self) -> int:
        return len(self.times)


def connection_probability_matrix(latents: LatentTrajectorySet, time_index: int) -> np.ndarray:
    """P_t = X_t X_t^T with the diagonal zeroed (self-loops excluded)."""
    if not 0 <= time_index < latents.m:
        raise IndexError(f"time_index {time_index} out of range [0, {latents.m})")
    x = latents.positions[:, time_index]
    p = np.outer(x, x)
    np.fill_diagonal(p, 0.0)
    return p


def _checked_probabilities(p: np.ndarray) -> np.ndarray:
    worst_low = p.min()
    worst_high = p.max()
    if worst_low < -CLAMP_TOL or worst_high > 1 + CLAMP_TOL:
        raise ValueError(
            f"connection probabilities outside [0, 1]: range "
            f"[{worst_low}, {worst_high}] exceeds clamp tolerance {CLAMP_TOL}"
        )
    return np.clip(p, 0.0, 1.0)


def sample_tsg(latents: LatentTrajectorySet, seed: int) -> AdjacencyTimeSeries:
    """Sample A_t(i,j) ~ Bernoulli(<X_t^i, X_t^j>) for i < j, each time t.

    Edges are independent across pairs and times given the latents.  Each
    time uses its own Philox stream (seed, GRAPH, t), so snapshots could be
    drawn concurrently without changing the output.
    """
    if latents.n < 2:
        raise ValueError("need at least 2 vertices to sample graphs")
    n, m = latents.n, latents.m
    graphs = np.empty((m, n, n), dtype=np.uint8)
    rows, cols = np.triu_indices(n, k=1)
    for t in range(m):
        x = latents.positions[:, t]
        # inner products on the upper triangle only; n^2 outer is wasted work
        p = _checked_probabilities(x[rows] * x[cols])
        rng = _rng.generator(seed, _rng.GRAPH, t)
        edges = (rng.random(p.size) < p).astype(np.uint8)
        a = np.zeros((n, n), dtype=np.uint8)
        a[rows, cols] = edges
        a += a.T
        graphs[t] = a
    return AdjacencyTimeSeries(n=n, times=np.asarray(latents.times, dtype=float), graphs=graphs)
