import numpy as np
import pytest

from qis import rng

# Known-answer vectors published with the Random123 library (Philox4x32-10).
KAT = [
    ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
    ((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2, (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
    (
        (0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344),
        (0xA4093822, 0x299F31D0),
        (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1),
    ),
]


@pytest.mark.parametrize("ctr,key,expected", KAT)
def test_philox_known_answers(ctr, key, expected):
    out = rng.philox4x32([np.array([c], dtype=np.uint64) for c in ctr], key)
    assert tuple(int(w[0]) for w in out) == expected


def test_uniforms_open_interval_and_deterministic():
    u = rng.uniforms(5, rng.STREAM_PATH, 0, 1000, 7)
    assert u.shape == (1000, 7)
    assert np.all((u > 0) & (u < 1))
    assert np.array_equal(u, rng.uniforms(5, rng.STREAM_PATH, 0, 1000, 7))


def test_blocks_are_position_addressed():
    whole = rng.normals(3, rng.STREAM_FINITE, 0, 500, 4)
    parts = np.concatenate([rng.normals(3, rng.STREAM_FINITE, s, 100, 4) for s in range(0, 500, 100)])
    assert np.array_equal(whole, parts)


def test_width_prefix_is_stable():
    # the first steps of a sample do not depend on how many steps are requested
    a = rng.normals(3, rng.STREAM_PATH, 10, 50, 3)
    b = rng.normals(3, rng.STREAM_PATH, 10, 50, 8)
    assert np.array_equal(a, b[:, :3])


def test_streams_and_seeds_differ():
    a = rng.normals(1, rng.STREAM_FINITE, 0, 100, 2)
    assert not np.array_equal(a, rng.normals(1, rng.STREAM_PATH, 0, 100, 2))
    assert not np.array_equal(a, rng.normals(2, rng.STREAM_FINITE, 0, 100, 2))


def test_normal_moments():
    z = rng.normals(11, rng.STREAM_CHECK, 0, 200_000, 5).ravel()
    n = z.size
    assert abs(z.mean()) < 4 / np.sqrt(n)
    assert abs(z.var() - 1) < 4 * np.sqrt(2 / n)
    # lag-one correlation between consecutive steps of the same sample
    zz = z.reshape(-1, 5)
    assert abs(np.corrcoef(zz[:, 0], zz[:, 1])[0, 1]) < 4 / np.sqrt(zz.shape[0])
