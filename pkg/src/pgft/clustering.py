"""Deterministic geometry clustering.

The decoder never receives cluster labels: it reruns the exact same
K-means on the shared voxel geometry.  Everything here is therefore
pinned down: farthest-point seeding from the lexicographically
smallest coordinate, first-index tie-breaks in a canonical point
order, and a fixed iteration cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pointcloud import VoxelizedFrame

MAX_LLOYD_ITERATIONS = 100


@dataclass(frozen=True)
class ClusterPartition:
    labels: np.ndarray         # (n,) int32 in [0, k)
    k: int
    cluster_sizes: np.ndarray  # (k,) int64
    centroids: np.ndarray      # (k, 3) float64

    def members(self, cluster_id: int) -> np.ndarray:
        """Indices of the cluster's points, in ascending order."""
        return np.flatnonzero(self.labels == cluster_id)


def _lexicographic_order(points: np.ndarray) -> np.ndarray:
    # np.lexsort keys: last key is primary, so feed columns reversed.
    return np.lexsort((points[:, 2], points[:, 1], points[:, 0]))


def _farthest_point_seeds(points: np.ndarray, k: int) -> np.ndarray:
    """Seed indices by farthest-point sampling.

    `points` must already be in canonical (lexicographic) order so that
    argmax's first-occurrence rule doubles as a lexicographic tie-break.
    """
    n = points.shape[0]
    seeds = np.empty(k, dtype=np.int64)
    seeds[0] = 0  # lexicographically smallest coordinate
    best = np.sum((points - points[0]) ** 2, axis=1)
    for i in range(1, k):
        seeds[i] = int(np.argmax(best))
        d = np.sum((points - points[seeds[i]]) ** 2, axis=1)
        np.minimum(best, d, out=best)
    return seeds


def kmeans_geometry(frame: VoxelizedFrame, target_cluster_size: int) -> ClusterPartition:
    """Partition a frame's voxels into K = ceil(n / target) geometry clusters.

    Lloyd iterations run on 3D voxel coordinates until labels stop
    changing (or the iteration cap).  The result is independent of the
    input point order: points are processed in lexicographic coordinate
    order internally and clusters are relabeled by their
    lexicographically smallest member.
    """
    coords = np.asarray(frame.voxel_coords, dtype=np.float64)
    n = coords.shape[0]
    if n == 0:
        raise ValueError("empty frame")
    k = math.ceil(n / target_cluster_size)

    order = _lexicographic_order(coords)
    pts = coords[order]

    seeds = _farthest_point_seeds(pts, k)
    centroids = pts[seeds].copy()

    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(MAX_LLOYD_ITERATIONS):
        # Assignment; argmin takes the lowest cluster id on ties.
        d2 = np.sum((pts[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)

        # Refill empty clusters with the point farthest from its centroid.
        sizes = np.bincount(new_labels, minlength=k)
        if np.any(sizes == 0):
            dist_to_own = d2[np.arange(n), new_labels]
            for cid in np.flatnonzero(sizes == 0):
                far = int(np.argmax(dist_to_own))
                new_labels[far] = cid
                dist_to_own[far] = -1.0  # don't steal the same point twice
            sizes = np.bincount(new_labels, minlength=k)

        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for cid in range(k):
            centroids[cid] = pts[labels == cid].mean(axis=0)

    # Canonical relabeling: clusters ordered by lexicographically smallest
    # member (pts is lex-sorted, so that member is the first occurrence).
    first_member = np.full(k, n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        first_member[labels[i]] = i
    relabel = np.empty(k, dtype=np.int64)
    relabel[np.argsort(first_member)] = np.arange(k)
    labels = relabel[labels]

    out_labels = np.empty(n, dtype=np.int32)
    out_labels[order] = labels.astype(np.int32)
    sizes = np.bincount(out_labels, minlength=k).astype(np.int64)
    centroids = np.zeros((k, 3))
    for cid in range(k):
        centroids[cid] = coords[out_labels == cid].mean(axis=0)
    return ClusterPartition(labels=out_labels, k=k, cluster_sizes=sizes,
                            centroids=centroids)


def within_cluster_cost(points: np.ndarray, labels: np.ndarray,
                        centroids: np.ndarray) -> float:
    """Total squared distance of points to their assigned centroids."""
    return float(np.sum((points - centroids[labels]) ** 2))
