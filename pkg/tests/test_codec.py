import numpy as np
import pytest

from pgft.bitstream import BitstreamError
from pgft.codec import (GopPlan, decode_sequence, encode_sequence)
from pgft.pointcloud import RawPointCloud, SequenceConfig
from pgft.synth import synthetic_sequence

CFG = dict(grid_dim=64, qstep=8.0)


def _cfg(**kw):
    merged = {**CFG, **kw}
    return SequenceConfig(**merged)


def test_gop_plan():
    plan = GopPlan.plan(16, 8)
    assert plan.frame_types[0] == "I"
    assert plan.frame_types[8] == "I"
    assert all(t == "P" for i, t in enumerate(plan.frame_types) if i % 8)


def test_single_frame_is_intra_only():
    frames = synthetic_sequence("wave", 1, point_count=600, seed=0)
    result = encode_sequence(frames, _cfg())
    assert len(result.stats) == 1
    assert result.stats[0].frame_type == "I"
    assert result.stats[0].inter_clusters == 0


def test_roundtrip_bit_exact_and_mirror():
    frames = synthetic_sequence("wave", 3, point_count=1000, seed=1)
    result = encode_sequence(frames, _cfg())
    decoded = decode_sequence(result.data, frames)
    for enc, dec in zip(result.stats, decoded.stats):
        assert enc.mirror_hash == dec.mirror_hash
        assert enc.psnr_y == dec.psnr_y
    for enc, dec in zip(result.recon, decoded.recon):
        assert np.array_equal(enc.attributes, dec.attributes)


def test_near_lossless_at_tiny_qstep():
    frames = synthetic_sequence("wave", 4, point_count=800, seed=2)
    result = encode_sequence(frames, _cfg(qstep=1e-6))
    decoded = decode_sequence(result.data, frames)
    for rec in decoded.recon:
        err = np.abs(rec.attributes - rec.frame.attributes)
        assert np.max(err) < 1e-3


def test_decode_deterministic():
    frames = synthetic_sequence("rigid-motion", 2, point_count=900, seed=3)
    result = encode_sequence(frames, _cfg())
    a = decode_sequence(result.data, frames)
    b = decode_sequence(result.data, frames)
    for ra, rb in zip(a.recon, b.recon):
        assert np.array_equal(ra.attributes, rb.attributes)
    for pa, pb in zip(a.point_attributes, b.point_attributes):
        assert np.array_equal(pa, pb)


def test_encode_deterministic_across_threads():
    frames = synthetic_sequence("wave", 2, point_count=900, seed=4)
    a = encode_sequence(frames, _cfg(), threads=1)
    b = encode_sequence(frames, _cfg(), threads=4)
    assert a.data == b.data
    da = decode_sequence(a.data, frames, threads=1)
    db = decode_sequence(a.data, frames, threads=4)
    for ra, rb in zip(da.recon, db.recon):
        assert np.array_equal(ra.attributes, rb.attributes)


def test_corrupt_payload_byte_detected():
    frames = synthetic_sequence("wave", 2, point_count=800, seed=5)
    result = encode_sequence(frames, _cfg())
    data = bytearray(result.data)
    data[-40] ^= 0xFF  # inside the last frame's payloads
    with pytest.raises(Exception) as info:
        decode_sequence(bytes(data), frames)
    assert isinstance(info.value, (BitstreamError,)) or "stream" in str(info.value)


def test_wrong_geometry_rejected():
    frames = synthetic_sequence("wave", 2, point_count=800, seed=6)
    other = synthetic_sequence("wave", 2, point_count=800, seed=7)
    result = encode_sequence(frames, _cfg())
    with pytest.raises(BitstreamError, match="geometry mismatch"):
        decode_sequence(result.data, other)


def test_frame_count_mismatch():
    frames = synthetic_sequence("wave", 2, point_count=600, seed=8)
    result = encode_sequence(frames, _cfg())
    with pytest.raises(BitstreamError, match="frames"):
        decode_sequence(result.data, frames[:1])


def test_intra_fallback_when_no_reference_candidates():
    """Frame 1 content sits far from every frame 0 point, so expanded
    reference regions are empty and all clusters fall back to intra."""
    rng = np.random.default_rng(9)
    blob_a = rng.uniform(0, 4, size=(300, 3))
    blob_b = rng.uniform(96, 100, size=(300, 3))
    far = rng.uniform([96, 0, 0], [100, 4, 4], size=(300, 3))
    colors = rng.integers(0, 256, size=(300, 3), dtype=np.uint8)
    f0 = RawPointCloud(np.vstack([blob_a, blob_b]).astype(np.float32).astype(np.float64),
                       np.vstack([colors, colors]))
    f1 = RawPointCloud(far.astype(np.float32).astype(np.float64), colors)
    result = encode_sequence([f0, f1], _cfg(qstep=16.0))
    assert result.stats[1].frame_type == "P"
    assert result.stats[1].inter_clusters == 0
    decoded = decode_sequence(result.data, [f0, f1])
    assert np.array_equal(decoded.recon[1].attributes, result.recon[1].attributes)


def test_stats_bits_match_stream_size():
    frames = synthetic_sequence("wave", 3, point_count=700, seed=10)
    result = encode_sequence(frames, _cfg())
    frame_bits = sum(s.bits for s in result.stats)
    header_bits = result.total_bits - frame_bits
    assert 0 < header_bits <= 64 * 8
