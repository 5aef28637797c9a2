import numpy as np
import pytest

from pgft.pointcloud import (RawPointCloud, devoxelize, read_ply, rgb_to_yuv,
                             sequence_bounding_box, voxelize, write_ply,
                             yuv_to_rgb)


def test_read_ply_minimal_ascii(tmp_path):
    path = tmp_path / "one.ply"
    path.write_text(
        "ply\nformat ascii 1.0\nelement vertex 1\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        "end_header\n0 0 0 128 128 128\n")
    raw = read_ply(path)
    assert raw.point_count == 1
    assert np.allclose(raw.positions[0], [0, 0, 0])
    assert np.array_equal(raw.colors[0], [128, 128, 128])


def test_read_ply_missing_color(tmp_path):
    path = tmp_path / "nocolor.ply"
    path.write_text(
        "ply\nformat ascii 1.0\nelement vertex 1\n"
        "property float x\nproperty float y\nproperty float z\n"
        "end_header\n0 0 0\n")
    with pytest.raises(ValueError, match="missing color"):
        read_ply(path)


def test_read_ply_bad_magic(tmp_path):
    path = tmp_path / "bad.ply"
    path.write_bytes(b"pyl\nformat ascii 1.0\nend_header\n")
    with pytest.raises(ValueError, match="magic"):
        read_ply(path)


def test_ply_binary_roundtrip_1000(tmp_path):
    rng = np.random.default_rng(0)
    pos = rng.uniform(-50, 50, size=(1000, 3)).astype(np.float32)
    col = rng.integers(0, 256, size=(1000, 3), dtype=np.uint8)
    path = tmp_path / "cloud.ply"
    write_ply(path, pos, col, binary=True)
    raw = read_ply(path)
    assert np.array_equal(raw.positions, pos.astype(np.float64))
    assert np.array_equal(raw.colors, col)


def test_ply_ascii_roundtrip(tmp_path):
    pos = np.array([[1.5, -2.25, 3.0], [0.0, 0.5, -1.0]], dtype=np.float32)
    col = np.array([[1, 2, 3], [250, 251, 252]], dtype=np.uint8)
    path = tmp_path / "cloud_ascii.ply"
    write_ply(path, pos, col, binary=False)
    raw = read_ply(path)
    assert np.array_equal(raw.positions, pos.astype(np.float64))
    assert np.array_equal(raw.colors, col)


def test_rgb_to_yuv_gray_fixed_point():
    assert np.allclose(rgb_to_yuv([128, 128, 128]), [128, 128, 128])


def test_rgb_to_yuv_white():
    assert np.allclose(rgb_to_yuv([255, 255, 255]), [255, 128, 128])


def test_rgb_to_yuv_red_with_clamp():
    yuv = rgb_to_yuv([255, 0, 0])
    assert yuv[0] == pytest.approx(76.245)
    assert yuv[1] == pytest.approx(84.97232)
    assert yuv[2] == 255.0  # 255.5 clamped


def test_rgb_yuv_roundtrip_random():
    rng = np.random.default_rng(123)
    rgb = rng.integers(0, 256, size=(100_000, 3))
    back = yuv_to_rgb(rgb_to_yuv(rgb))
    assert np.max(np.abs(back - rgb)) <= 0.5


def test_voxelize_single_point_warns():
    raw = RawPointCloud(np.array([[3.7, -1.2, 9.9]]),
                        np.array([[200, 100, 50]], dtype=np.uint8))
    with pytest.warns(UserWarning, match="degenerate"):
        frame = voxelize(raw, 4096)
    assert frame.voxel_count == 1
    assert np.array_equal(frame.voxel_coords[0], [0, 0, 0])
    assert np.allclose(frame.attributes[0] + 128.0, rgb_to_yuv([200, 100, 50]))


def test_voxelize_mean_of_two():
    # gray colors make Y equal the channel value
    pos = np.array([[0.0, 0.0, 0.0], [0.01, 0.0, 0.0], [10.0, 10.0, 10.0]])
    col = np.array([[100] * 3, [200] * 3, [50] * 3], dtype=np.uint8)
    frame = voxelize(RawPointCloud(pos, col), 8)
    shared = frame.point_map[0]
    assert frame.point_map[1] == shared
    assert frame.attributes[shared, 0] + 128.0 == pytest.approx(150.0)


def test_voxelize_geometric_accuracy():
    rng = np.random.default_rng(7)
    pos = rng.uniform(-100, 100, size=(10_000, 3))
    col = rng.integers(0, 256, size=(10_000, 3), dtype=np.uint8)
    raw = RawPointCloud(pos, col)
    lo, hi = sequence_bounding_box(raw)
    frame = voxelize(raw, 4096, (lo, hi))
    scale = (4096 - 1) / np.max(hi - lo)
    scaled = (pos - lo) * scale
    centers = frame.voxel_coords[frame.point_map] + 0.5
    dist = np.linalg.norm(scaled - centers, axis=1)
    assert np.max(dist) <= np.sqrt(3.0) / 2.0 + 1e-9


def test_voxelize_deterministic_and_order_invariant():
    rng = np.random.default_rng(5)
    pos = rng.uniform(0, 10, size=(500, 3))
    col = rng.integers(0, 256, size=(500, 3), dtype=np.uint8)
    raw = RawPointCloud(pos, col)
    box = sequence_bounding_box(raw)
    a = voxelize(raw, 64, box)
    b = voxelize(raw, 64, box)
    assert np.array_equal(a.voxel_coords, b.voxel_coords)
    assert np.array_equal(a.point_map, b.point_map)

    perm = rng.permutation(500)
    c = voxelize(RawPointCloud(pos[perm], col[perm]), 64, box)
    assert np.array_equal(a.voxel_coords, c.voxel_coords)
    assert np.array_equal(a.point_map[perm], c.point_map)


def test_devoxelize_shared_voxel():
    pos = np.zeros((3, 3))
    pos[2, 0] = 5.0
    col = np.array([[100] * 3, [150] * 3, [200] * 3], dtype=np.uint8)
    frame = voxelize(RawPointCloud(pos, col), 16)
    out = devoxelize(frame, frame.point_map, 3)
    assert np.allclose(out[0], out[1])
    assert out[0, 0] == pytest.approx(125.0)


def test_devoxelize_empty():
    pos = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
    col = np.array([[10] * 3, [20] * 3], dtype=np.uint8)
    frame = voxelize(RawPointCloud(pos, col), 16)
    out = devoxelize(frame, np.empty(0, dtype=np.int64), 0)
    assert out.shape == (0, 3)


def test_devoxelize_bad_map():
    pos = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
    col = np.array([[10] * 3, [20] * 3], dtype=np.uint8)
    frame = voxelize(RawPointCloud(pos, col), 16)
    with pytest.raises(ValueError, match="out of range"):
        devoxelize(frame, np.array([0, 99]), 2)


def test_projection_idempotence():
    """Voxel averaging is a projection: re-averaging the devoxelized
    attributes reproduces the voxel attributes exactly."""
    rng = np.random.default_rng(11)
    pos = rng.uniform(0, 4, size=(300, 3))
    col = rng.integers(0, 256, size=(300, 3), dtype=np.uint8)
    frame = voxelize(RawPointCloud(pos, col), 8)
    per_point = devoxelize(frame, frame.point_map, 300)
    for v in range(frame.voxel_count):
        members = frame.point_map == v
        assert np.allclose(per_point[members].mean(axis=0),
                           frame.attributes[v] + 128.0)
