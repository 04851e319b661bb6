import numpy as np
import pytest

from partbench.errors import TooManyPartsError
from partbench.segmap import decode, encode, make_palette, random_permutation


def _blocks(n, size=12):
    masks = np.zeros((n, size, size * n), bool)
    for k in range(n):
        masks[k, :, k * size : (k + 1) * size] = True
    return masks


def test_palette_is_distinct_and_seeded():
    p = make_palette(16, 0)
    c = np.asarray(p.colors)
    assert c.shape == (16, 3)
    assert len({tuple(x) for x in c}) == 16
    assert not np.any(np.all(c == 0, axis=1))
    assert np.array_equal(c, np.asarray(make_palette(16, 0).colors))
    with pytest.raises(ValueError):
        make_palette(1)


def test_round_trip_recovers_masks():
    masks = _blocks(5)
    p = make_palette(16, 2)
    perm = random_permutation(16, 4)
    out, ids = decode(encode(masks, p, perm), p)
    assert sorted(ids) == sorted(perm[:5].tolist())
    got = {m.tobytes() for m in out}
    assert got == {m.tobytes() for m in masks}


def test_decode_tolerates_small_colour_noise():
    masks = _blocks(3)
    p = make_palette(16, 0)
    seg = encode(masks, p, np.arange(16))
    noisy = np.clip(seg + np.random.default_rng(0).normal(0, 0.03, seg.shape), 0, 1)
    out, _ = decode(noisy, p)
    assert {m.tobytes() for m in out} == {m.tobytes() for m in masks}


def test_small_regions_become_background():
    masks = np.zeros((2, 10, 10), bool)
    masks[0, :5] = True
    masks[1, 9, 9] = True
    p = make_palette(16, 0)
    out, _ = decode(encode(masks, p, np.arange(16)), p, min_pixels=10)
    assert len(out) == 1 and np.array_equal(out[0], masks[0])


def test_encode_errors():
    p = make_palette(4, 0)
    with pytest.raises(TooManyPartsError):
        encode(_blocks(5, 4), p, np.arange(4))
    overlap = np.ones((2, 4, 4), bool)
    with pytest.raises(ValueError):
        encode(overlap, p, np.arange(4))
    with pytest.raises(ValueError):
        encode(_blocks(2, 4), p, [0, 0, 1, 2])
