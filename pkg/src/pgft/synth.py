"""Synthetic test sequences.

Smooth color fields on a jittered sphere surface, in three flavors:
static geometry with a traveling attribute wave, a fully static scene,
and a rigidly moving scene whose colors ride along with the points.
Everything is seeded, and positions are snapped to float32 so that
in-memory sequences match their PLY round-trip exactly.
"""

from __future__ import annotations

import math

import numpy as np

from .pointcloud import RawPointCloud, write_ply

KINDS = ("wave", "static", "rigid-motion")

_RADIUS = 10.0
_JITTER = 0.15
_WAVE_PHASE_STEP = 0.35
_ROTATION_STEP = math.radians(2.0)
_TRANSLATION_STEP = np.array([0.03, 0.0, 0.015])


def _fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n, dtype=np.float64)
    golden = math.pi * (3.0 - math.sqrt(5.0))
    y = 1.0 - 2.0 * (i + 0.5) / n
    r = np.sqrt(np.clip(1.0 - y * y, 0.0, 1.0))
    theta = golden * i
    return np.stack([np.cos(theta) * r, y, np.sin(theta) * r], axis=1)


def _colors(points: np.ndarray, phase: float) -> np.ndarray:
    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    r = 128.0 + 60.0 * np.sin(0.25 * x + phase)
    g = 128.0 + 60.0 * np.sin(0.30 * y + 1.0 + 0.7 * phase)
    b = 128.0 + 60.0 * np.cos(0.22 * z - 0.4 * phase)
    rgb = np.stack([r, g, b], axis=1)
    return np.clip(np.round(rgb), 0, 255).astype(np.uint8)


def _rotate_z(points: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return points @ rot.T


def synthetic_sequence(kind: str, frame_count: int, point_count: int = 2000,
                       seed: int = 0):
    """Generate a list of RawPointCloud frames."""
    if kind not in KINDS:
        raise ValueError(f"unknown synthetic kind {kind!r}; choose from {KINDS}")
    if frame_count < 1:
        raise ValueError("frame_count must be >= 1")
    rng = np.random.default_rng(seed)
    base = _fibonacci_sphere(point_count) * _RADIUS
    base = base + rng.normal(scale=_JITTER, size=base.shape)
    base_colors = _colors(base, phase=0.0)

    frames = []
    for t in range(frame_count):
        if kind == "static":
            pos, col = base, base_colors
        elif kind == "wave":
            pos, col = base, _colors(base, phase=_WAVE_PHASE_STEP * t)
        else:  # rigid-motion: colors stay attached to their points
            pos = _rotate_z(base, _ROTATION_STEP * t) + _TRANSLATION_STEP * t
            col = base_colors
        pos32 = pos.astype(np.float32).astype(np.float64)
        frames.append(RawPointCloud(positions=pos32, colors=col))
    return frames


def write_synthetic_sequence(directory, kind: str, frame_count: int,
                             point_count: int = 2000, seed: int = 0):
    """Write the generated frames as PLY files; returns the paths."""
    import os

    os.makedirs(directory, exist_ok=True)
    frames = synthetic_sequence(kind, frame_count, point_count, seed)
    paths = []
    for t, frame in enumerate(frames):
        path = os.path.join(directory, f"frame_{t:04d}.ply")
        write_ply(path, frame.positions, frame.colors)
        paths.append(path)
    return paths
