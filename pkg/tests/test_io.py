import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from partbench import io


@given(arrays(bool, st.tuples(st.integers(1, 12), st.integers(1, 12))))
@settings(max_examples=100, deadline=None)
def test_rle_round_trip(mask):
    rle = io.rle_encode(mask)
    assert sum(rle["counts"]) == mask.size
    assert np.array_equal(io.rle_decode(rle), mask)


def test_rle_starts_with_background():
    assert io.rle_encode(np.array([[True, False]]))["counts"][0] == 0


def test_pfm_round_trip(tmp_path):
    d = np.random.default_rng(0).uniform(0, 5, (5, 7)).astype(np.float32)
    d[1, 2] = np.inf
    io.write_pfm(tmp_path / "d.pfm", d)
    back = io.read_pfm(tmp_path / "d.pfm")
    assert np.isinf(back[1, 2])
    fin = np.isfinite(d)
    assert np.array_equal(back[fin], d[fin])


def test_png_and_mask_round_trip(tmp_path):
    img = np.random.default_rng(1).uniform(size=(6, 5, 3))
    io.save_png(tmp_path / "a.png", img)
    assert np.max(np.abs(io.load_png(tmp_path / "a.png") - img)) <= 0.5 / 255 + 1e-12
    m = np.random.default_rng(2).uniform(size=(6, 5)) > 0.5
    io.save_mask_png(tmp_path / "m.png", m)
    assert np.array_equal(io.load_mask_png(tmp_path / "m.png"), m)


def test_json_float_rounding():
    doc = io.format_floats({"a": 1 / 3, "b": [np.float64(2 / 3), 1], "c": "x"})
    assert doc == {"a": 0.333333333, "b": [0.666666667, 1], "c": "x"}
    assert io.dumps_json({"b": 1, "a": 0.1}).index('"a"') < io.dumps_json({"b": 1, "a": 0.1}).index('"b"')
