"""Nonparametric support learning: k-NN graphs, geodesics, 1-D scaling.

When the support curve is unknown, scaled geodesic distances between
estimated latent positions stand in for arclength preimages: build a
symmetric k-nearest-neighbor graph, run shortest paths over Euclidean edge
weights, embed the geodesic matrix in one dimension by classical scaling,
and min-max rescale to the unit interval. The resulting coordinate is only
identified up to the flip y -> 1 - y, so pipelines always consider both
orientations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree

_ZERO_WEIGHT = 1e-12


class ManifoldError(ValueError):
    """Neighborhood graph or embedding cannot be built."""


@dataclass(frozen=True)
class NeighborhoodGraph:
    """Symmetric k-NN graph with Euclidean edge weights."""

    weights: sparse.csr_matrix   # (n, n), zero diagonal
    k_requested: int
    k_used: int                  # after any connectivity fallback
    connected: bool

    @property
    def n_points(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class UnitIntervalEmbedding:
    """One-dimensional curve coordinates scaled to [0,1]."""

    values: np.ndarray
    stress: float                # relative misfit of embedded vs geodesic distances
    orientation: str             # "as-is" or "flipped" relative to raw scaling output
    k_used: int

    def flipped(self) -> "UnitIntervalEmbedding":
        new_orientation = "flipped" if self.orientation == "as-is" else "as-is"
        return UnitIntervalEmbedding(
            values=1.0 - self.values,
            stress=self.stress,
            orientation=new_orientation,
            k_used=self.k_used,
        )


def default_neighbors(n: int) -> int:
    """k = max(10, ceil(log2 n)), capped below n."""
    return min(max(10, math.ceil(math.log2(max(n, 2)))), n - 1)


def knn_graph(points: np.ndarray, k: int) -> NeighborhoodGraph:
    """Symmetric k-nearest-neighbor graph; doubles k until connected.

    Edges carry Euclidean distances (duplicates get weight 1e-12 so paths
    through them stay usable). The union symmetrization keeps an edge if
    either endpoint selected the other.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    if k < 1:
        raise ManifoldError("k must be at least 1")
    if n <= k:
        raise ManifoldError(f"need more points ({n}) than neighbors ({k})")

    tree = cKDTree(points)
    k_current = k
    while True:
        dist, idx = tree.query(points, k=k_current + 1)
        rows = np.repeat(np.arange(n), k_current + 1)
        cols = idx.ravel()
        vals = np.maximum(dist.ravel(), _ZERO_WEIGHT)
        off_diag = rows != cols  # with duplicate points, self is not always column 0
        graph = sparse.coo_matrix(
            (vals[off_diag], (rows[off_diag], cols[off_diag])), shape=(n, n)
        ).tocsr()
        graph = graph.maximum(graph.T)
        n_comp, _ = connected_components(graph, directed=False)
        if n_comp == 1 or k_current >= n - 1:
            return NeighborhoodGraph(
                weights=graph,
                k_requested=k,
                k_used=k_current,
                connected=n_comp == 1,
            )
        k_current = min(2 * k_current, n - 1)


def geodesic_distances(graph: NeighborhoodGraph) -> np.ndarray:
    """All-pairs shortest-path distances over the neighborhood graph."""
    if not graph.connected:
        raise ManifoldError("neighborhood graph is disconnected")
    dist = dijkstra(graph.weights, directed=False)
    return 0.5 * (dist + dist.T)  # symmetrize away solver rounding


def _classical_scaling_1d(dist: np.ndarray) -> np.ndarray:
    """Leading coordinate of classical multidimensional scaling."""
    n = dist.shape[0]
    d2 = dist * dist
    row_mean = d2.mean(axis=1)
    grand = d2.mean()
    B = -0.5 * (d2 - row_mean[:, None] - row_mean[None, :] + grand)
    eigvals, eigvecs = np.linalg.eigh(B)
    lead = eigvals[-1]
    if lead <= 0.0:
        raise ManifoldError("geodesic matrix has no positive scaling component")
    return eigvecs[:, -1] * math.sqrt(lead)


def isomap_unit_interval(points: np.ndarray, k: int | None = None) -> UnitIntervalEmbedding:
    """Scaled one-dimensional isomap coordinate of a point cloud.

    Classical scaling of the geodesic matrix followed by a min-max rescale
    to [0,1]. The sign is fixed deterministically: among the two extreme
    points, the one with the smaller index gets coordinate 0.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    if n < 2:
        raise ManifoldError("need at least two points")
    if k is None:
        k = default_neighbors(n)
    graph = knn_graph(points, k)
    dist = geodesic_distances(graph)
    coord = _classical_scaling_1d(dist)

    span = coord.max() - coord.min()
    if span <= 0.0:
        raise ManifoldError("degenerate embedding: all coordinates equal")
    values = (coord - coord.min()) / span

    embed_dist = np.abs(coord[:, None] - coord[None, :])
    denom = np.linalg.norm(dist)
    stress = float(np.linalg.norm(dist - embed_dist) / denom) if denom > 0 else 0.0

    orientation = "as-is"
    if int(np.argmax(values)) < int(np.argmin(values)):
        values = 1.0 - values
        orientation = "flipped"
    return UnitIntervalEmbedding(
        values=values, stress=stress, orientation=orientation, k_used=graph.k_used
    )


def orientation_pair(
    e1: UnitIntervalEmbedding, e2: UnitIntervalEmbedding
) -> tuple[
    tuple[UnitIntervalEmbedding, UnitIntervalEmbedding],
    tuple[UnitIntervalEmbedding, UnitIntervalEmbedding],
]:
    """Both relative orientations of a pair of unit-interval embeddings.

    Returns ((e1, e2), (e1, e2 flipped)); downstream tests evaluate both,
    since the curve coordinate is only identified up to reversal.
    """
    return (e1, e2), (e1, e2.flipped())
