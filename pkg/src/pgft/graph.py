"""Intra-cluster graph construction.

Edges connect points within an epsilon ball; weights come from a
Gaussian kernel of the sine of the angle between the two point normals,
w = exp(-(sin(theta)/sigma)^2).  sin(theta) is taken as the norm of the
cross product of the unit normals, which makes the weight invariant to
normal sign flips.  The generalized Laplacian L + I adds a unit
diagonal potential standing in for the unit-weight temporal edges to
the corresponded reference points.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

log = logging.getLogger(__name__)

COMBINATORIAL = "combinatorial"
GENERALIZED = "generalized"


@dataclass(frozen=True)
class SpatialGraph:
    n: int
    edges_i: np.ndarray   # (m,) int64, i < j
    edges_j: np.ndarray   # (m,) int64
    weights: np.ndarray   # (m,) float64 in (0, 1]
    epsilon_sq: float
    sigma_sq: float

    @property
    def edge_count(self) -> int:
        return self.edges_i.shape[0]

    def degrees(self) -> np.ndarray:
        d = np.zeros(self.n)
        np.add.at(d, self.edges_i, self.weights)
        np.add.at(d, self.edges_j, self.weights)
        return d


@dataclass(frozen=True)
class GeneralizedLaplacian:
    matrix: np.ndarray  # (n, n) dense symmetric
    kind: str           # COMBINATORIAL or GENERALIZED

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def estimate_normals(points: np.ndarray, k: int) -> np.ndarray:
    """Per-point unit normals from local covariance.

    The covariance of each point's k nearest neighbors (self included)
    is eigendecomposed; the normal is the eigenvector of the smallest
    eigenvalue, sign-fixed so its largest-magnitude component is
    positive.  Clusters with fewer than 3 points get (0, 0, 1).
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if n < 3:
        log.debug("normal estimation on %d points; defaulting to +z", n)
        normals = np.zeros((n, 3))
        normals[:, 2] = 1.0
        return normals
    k_eff = min(max(k, 3), n)

    tree = cKDTree(points)
    _, neighbors = tree.query(points, k=k_eff)
    local = points[neighbors]                      # (n, k, 3)
    centered = local - local.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", centered, centered) / k_eff

    _, vecs = np.linalg.eigh(cov)
    normals = vecs[:, :, 0]                        # smallest eigenvalue
    # eigh returns unit vectors; fix sign by the largest-|.| component.
    pick = np.argmax(np.abs(normals), axis=1)
    signs = np.sign(normals[np.arange(n), pick])
    signs[signs == 0] = 1.0
    return normals * signs[:, None]


def build_epsilon_graph(points: np.ndarray, normals: np.ndarray,
                        epsilon_sq: float, sigma_sq: float) -> SpatialGraph:
    """Connect point pairs with squared distance <= epsilon_sq."""
    points = np.asarray(points, dtype=np.float64)
    normals = np.asarray(normals, dtype=np.float64)
    if points.shape[0] != normals.shape[0]:
        raise ValueError("points and normals must have equal length")
    n = points.shape[0]

    d2 = np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=2)
    ii, jj = np.where(np.triu(d2 <= epsilon_sq, k=1))

    cross = np.cross(normals[ii], normals[jj])
    sin_sq = np.sum(cross * cross, axis=1)
    weights = np.exp(-sin_sq / sigma_sq)

    return SpatialGraph(n=n, edges_i=ii.astype(np.int64),
                        edges_j=jj.astype(np.int64), weights=weights,
                        epsilon_sq=float(epsilon_sq), sigma_sq=float(sigma_sq))


def combinatorial_laplacian(g: SpatialGraph) -> GeneralizedLaplacian:
    """L = D - W (dense; clusters are small)."""
    w = np.zeros((g.n, g.n))
    w[g.edges_i, g.edges_j] = g.weights
    w[g.edges_j, g.edges_i] = g.weights
    lap = np.diag(w.sum(axis=1)) - w
    return GeneralizedLaplacian(matrix=lap, kind=COMBINATORIAL)


def generalized_laplacian(lap: GeneralizedLaplacian) -> GeneralizedLaplacian:
    """L + I: unit temporal potential on every vertex; positive definite."""
    if lap.kind != COMBINATORIAL:
        raise ValueError("expected a combinatorial Laplacian")
    return GeneralizedLaplacian(matrix=lap.matrix + np.eye(lap.n),
                                kind=GENERALIZED)
