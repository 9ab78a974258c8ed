"""ISOMAP reduction of a multi-dimensional mirror to one dimension.

Build the sparsest connected k-nearest-neighbor graph on the mirror points
(union symmetrization: an edge exists if either endpoint selects the other),
weight edges by Euclidean distance, take all-pairs shortest paths, and embed
the geodesic matrix into one dimension with CMDS.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components, csgraph_from_dense, shortest_path

from .mirror import cmds, first_dimension

__all__ = ["IsoMirror", "iso_reduce"]


@dataclass(frozen=True)
class IsoMirror:
    """One-dimensional unrolled mirror.

    values  m geodesic CMDS coordinates, centered (zero mean)
    k_used  smallest neighbor count whose union k-NN graph was connected
    """

    values: np.ndarray
    k_used: int

    @property
    def m(self) -> int:
        return len(self.values)


def _pairwise_distances(points: np.ndarray) -> np.ndarray:
    sq = np.sum(points ** 2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * points @ points.T
    np.fill_diagonal(d2, 0.0)
    d = np.sqrt(np.maximum(d2, 0.0))
    return np.triu(d, 1) + np.triu(d, 1).T


def _knn_union(dist: np.ndarray, k: int) -> np.ndarray:
    """Boolean adjacency of the union k-NN graph, ties to the lower index."""
    m = dist.shape[0]
    adj = np.zeros((m, m), dtype=bool)
    for i in range(m):
        order = np.argsort(dist[i], kind="stable")
        order = order[order != i][:k]
        adj[i, order] = True
    return adj | adj.T


def iso_reduce(points) -> IsoMirror:
    """Reduce m points in R^d to one dimension along their geodesics."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    m = points.shape[0]
    if m < 3:
        raise ValueError(f"need at least 3 points, got {m}")
    dist = _pairwise_distances(points)
    k_used = None
    for k in range(1, m):
        adj = _knn_union(dist, k)
        n_comp, _ = connected_components(adj, directed=False)
        if n_comp == 1:
            k_used = k
            break
    # null_value=inf keeps zero-weight edges between duplicate points alive.
    graph = np.where(adj, dist, np.inf)
    np.fill_diagonal(graph, np.inf)
    geodesic = shortest_path(csgraph_from_dense(graph, null_value=np.inf),
                             method="D", directed=False)
    values = first_dimension(cmds(geodesic, 1))
    return IsoMirror(values=values, k_used=k_used)
